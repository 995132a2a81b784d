use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{subset_diameter, Graph};
use crate::nr_gen::WeightSequence;
use crate::pa_gen;
use crate::rng::{self, domain};
use crate::rules::AttachmentRule;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoreParams {
    pub alpha: f64,
    /// M_N = ⌊c_eps·(log N)^r_exp⌋ unless `m_n` is set.
    pub r_exp: f64,
    pub c_eps: f64,
    pub m_n: Option<u64>,
    pub eps: f64,
    /// Evolutions used to estimate E f(Z[M_N, N_ε]).
    pub replicas: u32,
    /// Seed for the replica substreams.
    pub seed: u64,
}

impl CoreParams {
    pub fn new(alpha: f64, seed: u64) -> Self {
        Self {
            alpha,
            r_exp: 2.0 * alpha + 2.0,
            c_eps: 1.0,
            m_n: None,
            eps: 0.2,
            replicas: 1000,
            seed,
        }
    }

    pub fn m_n(&self, n: u32) -> u64 {
        self.m_n
            .unwrap_or_else(|| (self.c_eps * (n as f64).ln().powf(self.r_exp)).floor() as u64)
    }

    /// max(6, ⌊R/α⌋ + 2).
    pub fn diameter_bound(&self) -> u32 {
        if self.alpha <= 0.0 {
            return u32::MAX;
        }
        6.max((self.r_exp / self.alpha).floor() as u32 + 2)
    }
}

/// N_ε = ⌈N/(1+ε)⌉.
pub fn n_eps(n: u32, eps: f64) -> u32 {
    ((n as f64) / (1.0 + eps)).ceil() as u32
}

pub enum CoreInput<'a> {
    /// Preferential attachment graph generated with this rule.
    Pa(&'a AttachmentRule),
    /// Norros–Reittu graph with these weights.
    Nr(&'a WeightSequence),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoreReport {
    #[serde(rename = "N")]
    pub n: u32,
    pub n_eps: u32,
    pub m_n: u64,
    /// Monte Carlo E f(Z[M_N, N_ε]) (preferential attachment only).
    pub expected_f: Option<f64>,
    pub core: Vec<u32>,
    pub size_ratio: f64,
    pub diameter: Option<u32>,
    pub diameter_bound: u32,
}

impl CoreReport {
    pub fn size_ok(&self, c: f64) -> bool {
        self.size_ratio >= c
    }

    pub fn diameter_ok(&self) -> bool {
        !self.core.is_empty() && self.diameter.is_some_and(|d| d <= self.diameter_bound)
    }
}

/// Z[v, t]: edges from v to younger vertices w ≤ t.
pub fn indegree_at(g: &Graph, v: u32, t: u32) -> u64 {
    g.neighbors(v).iter().filter(|&&w| w > v && w <= t).count() as u64
}

pub fn core_study(g: &Graph, input: CoreInput<'_>, p: &CoreParams) -> Result<CoreReport> {
    let n = g.n();
    let ne = n_eps(n, p.eps);
    let m = p.m_n(n);
    if m < 1 || m > ne as u64 {
        return Err(Error::InvalidParameter(format!(
            "core size M_N={m} must lie in [1, N_eps={ne}]"
        )));
    }
    let (core, expected_f) = match input {
        CoreInput::Pa(rule) => {
            let total: f64 = (0..p.replicas as u64)
                .into_par_iter()
                .map(|r| {
                    let mut s = rng::substream(p.seed, domain::CORE_REPLICAS, r);
                    let z = pa_gen::final_indegree(m, 0, ne as u64, rule, &mut s)?;
                    rule.evaluate(z)
                })
                .collect::<Result<Vec<f64>>>()?
                .iter()
                .sum();
            let est = total / p.replicas.max(1) as f64;
            let mut core = Vec::new();
            for v in 1..=m as u32 {
                if rule.evaluate(indegree_at(g, v, ne))? >= 0.5 * est {
                    core.push(v);
                }
            }
            (core, Some(est))
        }
        CoreInput::Nr(ws) => {
            if ws.len() != n as usize {
                return Err(Error::InvalidParameter(
                    "weight sequence does not match graph size".into(),
                ));
            }
            let mut order: Vec<u32> = (1..=n).collect();
            order.sort_by(|&a, &b| ws.weight(b).total_cmp(&ws.weight(a)).then(a.cmp(&b)));
            let mut core = order[..m as usize].to_vec();
            core.sort_unstable();
            (core, None)
        }
    };
    let diameter = if core.is_empty() {
        None
    } else {
        subset_diameter(g, &core)?
    };
    Ok(CoreReport {
        n,
        n_eps: ne,
        m_n: m,
        expected_f,
        size_ratio: core.len() as f64 / m as f64,
        core,
        diameter,
        diameter_bound: p.diameter_bound(),
    })
}
