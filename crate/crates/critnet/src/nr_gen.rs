//! Norros–Reittu graphs with heavy-tailed i.i.d. weights.
//!
//! Each unordered pair {v, w} receives a Poisson(W_vW_w/L) number of edges,
//! L = ∑W; parallel edges are merged. The sampler draws the total count
//! M ~ Poisson((L² − ∑W²)/(2L)) and places each edge on an ordered pair drawn
//! from the weights, resampling self-pairs.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, domain};

/// Weight law with survival min(1, c·w⁻²·(log(w ∨ e^{α∨1}))^{2α}) for w ≥ w_min.
///
/// For α ≤ 1 this is the law with shape w⁻²(log(e ∨ w))^{2α}. For α > 1 that
/// shape rises on (e, e^α), so the log is floored at e^α instead; the tail is
/// unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightDistribution {
    pub alpha: f64,
    pub w_min: f64,
    pub norm_c: f64,
}

impl WeightDistribution {
    pub fn new(alpha: f64, w_min: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !(w_min >= 1.0 && w_min.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "w_min must be >= 1, got {w_min}"
            )));
        }
        let mut d = Self {
            alpha,
            w_min,
            norm_c: 1.0,
        };
        d.norm_c = 1.0 / d.shape(w_min);
        Ok(d)
    }

    fn log_floor(&self) -> f64 {
        self.alpha.max(1.0)
    }

    fn shape(&self, w: f64) -> f64 {
        let l = w.ln().max(self.log_floor());
        l.powf(2.0 * self.alpha) / (w * w)
    }

    /// P(W ≥ w).
    pub fn survival(&self, w: f64) -> f64 {
        if w <= self.w_min {
            return 1.0;
        }
        (self.norm_c * self.shape(w)).min(1.0)
    }

    /// Smallest w with survival(w) ≤ u.
    pub fn survival_inverse(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return self.w_min;
        }
        if self.alpha == 0.0 {
            return self.w_min / u.sqrt();
        }
        let mut lo = self.w_min;
        let mut hi = self.w_min * 2.0;
        while self.survival(hi) > u {
            lo = hi;
            hi *= 2.0;
        }
        while hi / lo - 1.0 > 1e-13 {
            let mid = (lo * hi).sqrt();
            if self.survival(mid) > u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// E[W² 1{W ≤ q}], by quadrature on log w.
    pub fn truncated_second_moment(&self, q: f64) -> f64 {
        if q <= self.w_min {
            return 0.0;
        }
        // E[W²1{W≤q}] = w_min² − q²S(q) + 2∫_{w_min}^{q} w S(w) dw
        let (a, b) = (self.w_min.ln(), q.ln());
        let steps = 4000usize;
        let h = (b - a) / steps as f64;
        let integrand = |t: f64| {
            let w = t.exp();
            w * w * self.survival(w)
        };
        let mut s = integrand(a) + integrand(b);
        for i in 1..steps {
            let x = a + h * i as f64;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(x);
        }
        let integral = s * h / 3.0;
        self.w_min * self.w_min - q * q * self.survival(q) + 2.0 * integral
    }
}

/// Weight draw by inverse survival; u must lie in (0, 1].
pub fn sample_weight(dist: &WeightDistribution, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::Domain(format!(
            "sample_weight needs u in (0,1], got {u}"
        )));
    }
    Ok(dist.survival_inverse(u))
}

/// W_1..W_N with summary statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    pub weights: Vec<f64>,
    pub total: f64,
    pub sum_sq: f64,
    pub sum_cube: f64,
    pub max_w: f64,
}

impl WeightSequence {
    pub fn from_weights(weights: Vec<f64>) -> Self {
        let total = weights.iter().sum();
        let sum_sq = weights.iter().map(|w| w * w).sum();
        let sum_cube = weights.iter().map(|w| w * w * w).sum();
        let max_w = weights.iter().copied().fold(0.0, f64::max);
        Self {
            weights,
            total,
            sum_sq,
            sum_cube,
            max_w,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight of vertex v (labels from 1).
    pub fn weight(&self, v: u32) -> f64 {
        self.weights[v as usize - 1]
    }
}

/// N i.i.d. weights; W_i uses the first draw of substream i.
pub fn sample_weights(n: u32, dist: &WeightDistribution, seed: u64) -> WeightSequence {
    let weights: Vec<f64> = (1..=n as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::substream(seed, domain::NR_WEIGHTS, i);
            dist.survival_inverse(rng::open_unit(&mut r))
        })
        .collect();
    WeightSequence::from_weights(weights)
}

pub fn generate_nr(
    n: u32,
    dist: &WeightDistribution,
    seed: u64,
) -> Result<(Graph, WeightSequence)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "generate_nr needs N >= 2, got {n}"
        )));
    }
    let ws = sample_weights(n, dist, seed);
    let g = nr_from_weights(&ws, seed)?;
    Ok((g, ws))
}

const BLOCK: u64 = 1 << 16;

/// Candidate edges (u < v) before merging, in block order.
pub fn nr_candidate_edges(ws: &WeightSequence, seed: u64) -> Result<Vec<(u32, u32)>> {
    let n = ws.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let rate = (ws.total * ws.total - ws.sum_sq) / (2.0 * ws.total);
    let mut count_rng = rng::substream(seed, domain::NR_COUNT, 0);
    let m = if rate > 0.0 {
        Poisson::new(rate)
            .map_err(|e| Error::InvalidParameter(format!("poisson rate {rate}: {e}")))?
            .sample(&mut count_rng) as u64
    } else {
        0
    };
    let alias = WeightedAliasIndex::new(ws.weights.clone())
        .map_err(|e| Error::InvalidParameter(format!("weights not usable for sampling: {e}")))?;
    let blocks = m.div_ceil(BLOCK);
    let parts: Vec<Vec<(u32, u32)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::substream(seed, domain::NR_EDGES, b);
            let len = BLOCK.min(m - b * BLOCK);
            let mut out = Vec::with_capacity(len as usize);
            for _ in 0..len {
                loop {
                    let v = alias.sample(&mut r) as u32 + 1;
                    let w = alias.sample(&mut r) as u32 + 1;
                    if v != w {
                        out.push((v.min(w), v.max(w)));
                        break;
                    }
                }
            }
            out
        })
        .collect();
    Ok(parts.concat())
}

/// The merged Norros–Reittu graph for fixed weights.
pub fn nr_from_weights(ws: &WeightSequence, seed: u64) -> Result<Graph> {
    let mut edges = nr_candidate_edges(ws, seed)?;
    edges.sort_unstable();
    edges.dedup();
    Graph::from_edges(ws.len() as u32, &edges)
}

pub const REFERENCE_LIMIT: u64 = 3000;

/// Literal construction: one Poisson(W_vW_w/L) draw per pair.
pub fn reference_generate_nr(
    n: u32,
    dist: &WeightDistribution,
    seed: u64,
) -> Result<(Graph, WeightSequence)> {
    if n as u64 > REFERENCE_LIMIT {
        return Err(Error::TooLarge {
            n: n as u64,
            limit: REFERENCE_LIMIT,
        });
    }
    let ws = sample_weights(n, dist, seed);
    let g = reference_nr_from_weights(&ws, seed)?;
    Ok((g, ws))
}

pub fn reference_nr_from_weights(ws: &WeightSequence, seed: u64) -> Result<Graph> {
    let n = ws.len() as u32;
    if n as u64 > REFERENCE_LIMIT {
        return Err(Error::TooLarge {
            n: n as u64,
            limit: REFERENCE_LIMIT,
        });
    }
    let mut edges = Vec::new();
    for v in 1..=n {
        let mut r = rng::substream(seed, domain::NR_REFERENCE, v as u64);
        for w in v + 1..=n {
            let lambda = ws.weight(v) * ws.weight(w) / ws.total;
            // P(Poisson(λ) ≥ 1) = 1 − e^{−λ}; the count itself is not needed
            let u: f64 = r.random();
            if u < -(-lambda).exp_m1() {
                edges.push((v, w));
            }
        }
    }
    Graph::from_edges(n, &edges)
}

/// Extreme-value and moment ratios of a weight sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightDiagnostics {
    pub n: usize,
    /// Generalized inverse of 1/(1−F₁) at N.
    pub quantile: f64,
    pub max_ratio: f64,
    /// (∑W² − J(N)) / q², J(N) = N·E[W²1{W² ≤ q²}].
    pub sum_sq_ratio: f64,
    /// ∑W³ / q³.
    pub sum_cube_ratio: f64,
    pub heavy_tailed: bool,
}

pub fn weight_diagnostics(ws: &WeightSequence, dist: &WeightDistribution) -> WeightDiagnostics {
    let n = ws.len();
    let min = ws.weights.iter().copied().fold(f64::INFINITY, f64::min);
    let heavy_tailed = n >= 2 && ws.max_w > min;
    // inverses for W² and W³ are powers of the one for W
    let q = dist.survival_inverse(1.0 / n.max(1) as f64);
    let j = n as f64 * dist.truncated_second_moment(q);
    WeightDiagnostics {
        n,
        quantile: q,
        max_ratio: ws.max_w / q,
        sum_sq_ratio: (ws.sum_sq - j) / (q * q),
        sum_cube_ratio: ws.sum_cube / (q * q * q),
        heavy_tailed,
    }
}

/// Metadata stored next to a weight file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSidecar {
    pub model: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub alpha: f64,
    pub w_min: f64,
    pub norm_c: f64,
    pub seed: u64,
}

/// Writes the weights as little-endian f64.
pub fn save_weights(ws: &WeightSequence, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for w in &ws.weights {
        f.write_all(&w.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

pub fn load_weights(path: &Path) -> Result<WeightSequence> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse {
            line: 0,
            msg: format!("weight file length {} is not a multiple of 8", bytes.len()),
        });
    }
    let weights = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(WeightSequence::from_weights(weights))
}
