use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{Diagnostic, DistanceSample, Status};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nr_gen::{self, WeightDistribution, WeightSequence};
use crate::pa_gen;
use crate::rng::{self, domain};
use crate::rules::{
    decay_start, mu_sequence, mu_tail, truncation_sequence, x_step, xi, y_step, AttachmentRule,
};
use crate::stats;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeLawReport {
    pub indegree: Diagnostic,
    pub tail: Diagnostic,
    pub outdegree: Diagnostic,
    pub indegree_p: Option<f64>,
    /// Slope of log ccdf(total degree) against log k on [10, 300].
    pub tail_slope: Option<f64>,
    /// Same slope after removing the (log k)^{2α} correction.
    pub corrected_tail_slope: Option<f64>,
    pub outdegree_p: Option<f64>,
}

fn histogram(values: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut h: Vec<u64> = Vec::new();
    for x in values {
        if x as usize >= h.len() {
            h.resize(x as usize + 1, 0);
        }
        h[x as usize] += 1;
    }
    h
}

/// Log-spaced integers from `lo` to `hi`.
fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<u64> {
    let mut ks: Vec<u64> = (0..points)
        .map(|i| (lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).round() as u64)
        .collect();
    ks.dedup();
    ks
}

fn tail_fit(graphs: &[&Graph], alpha: f64) -> (Diagnostic, Option<f64>, Option<f64>) {
    let ks = log_grid(10.0, 300.0, 20);
    let mut deg: Vec<u64> = graphs
        .iter()
        .flat_map(|g| (1..=g.n()).map(|v| g.degree(v)))
        .collect();
    deg.sort_unstable();
    let total = deg.len() as f64;
    let (mut xs, mut ys, mut yc) = (Vec::new(), Vec::new(), Vec::new());
    for &k in &ks {
        let count = deg.len() - deg.partition_point(|&d| d < k);
        if count > 0 {
            let lk = (k as f64).ln();
            let y = (count as f64 / total).ln();
            xs.push(lk);
            ys.push(y);
            yc.push(y - 2.0 * alpha * lk.ln());
        }
    }
    let (raw, corrected) = if xs.len() >= 3 {
        (stats::ols(&xs, &ys), stats::ols(&xs, &yc))
    } else {
        (None, None)
    };
    let d = match (&raw, &corrected) {
        (Some(r), Some(c)) => Diagnostic::pass_if("tail_exponent", (c.slope + 2.0).abs() <= 0.15)
            .with("slope", r.slope)
            .with("corrected_slope", c.slope)
            .with("points", xs.len())
            .with("graphs", graphs.len()),
        _ => Diagnostic::new("tail_exponent", Status::Skipped)
            .with("reason", "fewer than three nonempty tail points"),
    };
    (d, raw.map(|r| r.slope), corrected.map(|c| c.slope))
}

/// Slope of log ccdf(total degree) against log k at 20 log-spaced k in
/// [10, 300], pooling the degrees of all graphs; passes if the slope after
/// removing the (log k)^{2α} correction is within 0.15 of −2.
pub fn tail_exponent_check(graphs: &[&Graph], alpha: f64) -> Diagnostic {
    tail_fit(graphs, alpha).0
}

/// Indegrees against μ_k, total-degree tail exponent, outdegrees against a
/// Poisson law with the empirical mean.
pub fn degree_law_check(g: &Graph, rule: &AttachmentRule) -> Result<DegreeLawReport> {
    let n = g.n();
    let indeg = histogram((1..=n).map(|v| g.younger_degree(v)));
    let probs = mu_sequence(rule, indeg.len().saturating_sub(1) as u64)?;
    let chi = stats::chi_square_gof(&indeg, 0, &probs, 5.0).filter(|c| c.buckets >= 3);
    let indegree = match &chi {
        Some(c) => Diagnostic::pass_if("indegree_vs_mu", c.p_value > 0.01)
            .with("p_value", c.p_value)
            .with("statistic", c.statistic)
            .with("df", c.df),
        None => Diagnostic::new("indegree_vs_mu", Status::Skipped)
            .with("reason", "insufficient mass for three buckets"),
    };

    let (tail, raw, corrected) = tail_fit(&[g], rule.alpha());

    let outdeg = histogram((1..=n).map(|v| g.degree(v) - g.younger_degree(v)));
    let total: u64 = outdeg.iter().sum();
    let mean = outdeg
        .iter()
        .enumerate()
        .map(|(k, &c)| k as f64 * c as f64)
        .sum::<f64>()
        / total.max(1) as f64;
    let mut pmf = Vec::with_capacity(outdeg.len());
    let mut p = (-mean).exp();
    for k in 0..outdeg.len() {
        pmf.push(p);
        p *= mean / (k + 1) as f64;
    }
    let out_chi = stats::chi_square_gof(&outdeg, 0, &pmf, 5.0)
        .filter(|c| c.buckets >= 3)
        .map(|c| {
            // one parameter estimated from the data
            let df = c.df - 1;
            (c.statistic, df, stats::chi_square_sf(c.statistic, df))
        });
    let outdegree = match out_chi {
        Some((stat, df, p)) => Diagnostic::pass_if("outdegree_vs_poisson", p > 0.01)
            .with("p_value", p)
            .with("statistic", stat)
            .with("df", df)
            .with("mean", mean),
        None => Diagnostic::new("outdegree_vs_poisson", Status::Skipped)
            .with("reason", "insufficient mass for three buckets"),
    };

    Ok(DegreeLawReport {
        indegree,
        tail,
        outdegree,
        indegree_p: chi.map(|c| c.p_value),
        tail_slope: raw,
        corrected_tail_slope: corrected,
        outdegree_p: out_chi.map(|c| c.2),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentCell {
    pub m: u64,
    pub n: u64,
    pub mean_f: f64,
    pub mean_f2: f64,
    /// Êf / [√(n/m)(1∨log n/m)^α].
    pub first_ratio: f64,
    /// Êf² / [(n/m)(1∨log n/m)^{2α}].
    pub second_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub cells: Vec<MomentCell>,
    pub diagnostic: Diagnostic,
}

/// Monte Carlo moments of f(Z[m,n]) started from Z[m,m] = 0; passes if both
/// normalized ratios stay positive and within a factor 10 across the grid.
pub fn moment_bounds_check(
    rule: &AttachmentRule,
    m_grid: &[u64],
    n_grid: &[u64],
    replicas: u32,
    seed: u64,
) -> Result<MomentReport> {
    if replicas < 1 {
        return Err(Error::InvalidParameter("replicas must be >= 1".into()));
    }
    let alpha = rule.alpha();
    let pairs: Vec<(u64, u64)> = m_grid
        .iter()
        .flat_map(|&m| {
            n_grid
                .iter()
                .filter(move |&&n| n >= m)
                .map(move |&n| (m, n))
        })
        .collect();
    let mut cells = Vec::new();
    for (ci, &(m, n)) in pairs.iter().enumerate() {
        let draws: Vec<f64> = (0..replicas as u64)
            .into_par_iter()
            .map(|r| {
                let mut s = rng::substream(seed, domain::EVOLUTION, ((ci as u64) << 32) | r);
                rule.evaluate(pa_gen::final_indegree(m, 0, n, rule, &mut s)?)
            })
            .collect::<Result<_>>()?;
        let mean_f = draws.iter().sum::<f64>() / draws.len() as f64;
        let mean_f2 = draws.iter().map(|x| x * x).sum::<f64>() / draws.len() as f64;
        let ratio = n as f64 / m as f64;
        let lg = ratio.ln().max(1.0).powf(alpha);
        cells.push(MomentCell {
            m,
            n,
            mean_f,
            mean_f2,
            first_ratio: mean_f / (ratio.sqrt() * lg),
            second_ratio: mean_f2 / (ratio * lg * lg),
        });
    }
    let band = |xs: Vec<f64>| {
        let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().copied().fold(0.0, f64::max);
        (lo, hi)
    };
    let (l1, h1) = band(cells.iter().map(|c| c.first_ratio).collect());
    let (l2, h2) = band(cells.iter().map(|c| c.second_ratio).collect());
    let ok = !cells.is_empty() && l1 > 0.0 && l2 > 0.0 && h1 / l1 <= 10.0 && h2 / l2 <= 10.0;
    let diagnostic = Diagnostic::pass_if("moment_bounds", ok)
        .with("first_band", (l1, h1))
        .with("second_band", (l2, h2))
        .with("cells", cells.len())
        .with("replicas", replicas);
    Ok(MomentReport { cells, diagnostic })
}

/// ⌈log N / (log log N + log Ψ_N + log κ_N)⌉.
pub fn predicted_floor(n: u64, psi: f64, kappa: f64) -> Option<u64> {
    let nf = n as f64;
    let denom = nf.ln().ln() + psi.ln() + kappa.ln();
    (denom > 0.0 && denom.is_finite()).then(|| (nf.ln() / denom).ceil() as u64)
}

/// Fraction of samples with d ≥ floor − 1; passes at 95%.
pub fn floor_check(samples: &[DistanceSample], floor: u64) -> Diagnostic {
    let ok = samples.iter().filter(|s| s.d as u64 + 1 >= floor).count();
    let frac = ok as f64 / samples.len().max(1) as f64;
    let min = samples.iter().map(|s| s.d).min();
    Diagnostic::pass_if("distance_floor", !samples.is_empty() && frac >= 0.95)
        .with("floor", floor)
        .with("fraction_at_or_above_floor_minus_one", frac)
        .with("min_distance", min)
}

/// Edge probabilities of replica graphs over dyadic label buckets against
/// Ψ_N/√(vw) with Ψ_N = C(log N)^α; C is fitted as the largest bucket ratio.
/// κ_N is taken as f(1)/f(0).
pub fn pa_lower_bound_audit(graphs: &[Graph], rule: &AttachmentRule) -> Result<Diagnostic> {
    let g0 = graphs
        .first()
        .ok_or_else(|| Error::InvalidParameter("no replica graphs".into()))?;
    let n = g0.n();
    if graphs.iter().any(|g| g.n() != n) {
        return Err(Error::InvalidParameter(
            "replica graphs differ in size".into(),
        ));
    }
    let bucket = |v: u32| 31 - v.leading_zeros() as usize;
    let nb = bucket(n) + 1;
    let mut size = vec![0f64; nb];
    let mut inv_sqrt = vec![0f64; nb];
    for v in 1..=n {
        size[bucket(v)] += 1.0;
        inv_sqrt[bucket(v)] += 1.0 / (v as f64).sqrt();
    }
    let mut edges = vec![0f64; nb * nb];
    for g in graphs {
        for (u, w) in g.edges() {
            let (a, b) = (bucket(u), bucket(w));
            edges[a.min(b) * nb + a.max(b)] += 1.0;
        }
    }
    let reps = graphs.len() as f64;
    let lg = (n as f64).ln().powf(rule.alpha());
    let mut c_fit: f64 = 0.0;
    for a in 0..nb {
        for b in a..nb {
            let pairs = if a == b {
                size[a] * (size[a] - 1.0) / 2.0
            } else {
                size[a] * size[b]
            };
            if pairs <= 0.0 {
                continue;
            }
            let p = edges[a * nb + b] / (pairs * reps);
            let envelope = (inv_sqrt[a] / size[a]) * (inv_sqrt[b] / size[b]) * lg;
            c_fit = c_fit.max(p / envelope);
        }
    }
    let kappa = rule.evaluate(1)? / rule.evaluate(0)?;
    let psi = c_fit * lg;
    Ok(Diagnostic::new("pa_connection_envelope", Status::Pass)
        .with("C", c_fit)
        .with("psi", psi)
        .with("kappa", kappa)
        .with("floor", predicted_floor(n as u64, psi, kappa))
        .with("replicas", graphs.len()))
}

/// Order-statistic envelope W^{(v)} ≤ C√((N/v)(log N)^{2α}) for v ≥ 2M, with
/// M the least integer such that ∑_{v≥M} e^{−3v/8} < ε/2. Passes if at most
/// an ε fraction of weight samples violate it.
pub fn nr_lower_bound_audit(
    samples: &[WeightSequence],
    alpha: f64,
    c: f64,
    eps: f64,
) -> Diagnostic {
    let tail = |m: f64| (-3.0 * m / 8.0).exp() / (1.0 - (-3.0f64 / 8.0).exp());
    let mut m = 1u64;
    while tail(m as f64) >= eps / 2.0 {
        m += 1;
    }
    let mut violating = 0usize;
    let mut worst: f64 = 0.0;
    let mut n_last = 0usize;
    for ws in samples {
        let n = ws.len();
        n_last = n;
        let mut w = ws.weights.clone();
        w.sort_by(|a, b| b.total_cmp(a));
        let psi_bar = (n as f64).ln().powf(2.0 * alpha);
        let mut bad = false;
        for v in (2 * m as usize)..=n {
            let r = w[v - 1] / (n as f64 / v as f64 * psi_bar).sqrt();
            worst = worst.max(r);
            if r > c {
                bad = true;
            }
        }
        violating += bad as usize;
    }
    let frac = violating as f64 / samples.len().max(1) as f64;
    let psi = c * c * (n_last as f64).ln().powf(2.0 * alpha);
    Diagnostic::pass_if("nr_weight_envelope", !samples.is_empty() && frac <= eps)
        .with("M", m)
        .with("C", c)
        .with("violating_fraction", frac)
        .with("worst_ratio", worst)
        .with("floor", predicted_floor(n_last as u64, psi, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome", content = "detail")]
pub enum LogsumOutcome {
    Holds,
    Violated,
    HypothesisNotSatisfied(String),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogsumReport {
    pub outcome: LogsumOutcome,
    pub c: f64,
    pub eta: f64,
    pub rhs: f64,
    /// (a, left side) per a ∈ A.
    pub lhs: Vec<(u64, f64)>,
}

/// η = ε₀² with ε₀ = exp(−(2 + 2 log(e^α + e⁻²/2))^{1/(1+α)}).
pub fn logsum_eta(alpha: f64) -> f64 {
    let e0 =
        (-(2.0 + 2.0 * (alpha.exp() + (-2.0f64).exp() / 2.0).ln()).powf(1.0 / (1.0 + alpha))).exp();
    e0 * e0
}

/// Default constant (2^α(1+α)(1+c_ξ))⁻¹ with c_ξ = 1, from 1/a ≤ ξ(a,N)²/N.
pub fn logsum_default_c(alpha: f64) -> f64 {
    1.0 / (2f64.powf(alpha) * (1.0 + alpha) * 2.0)
}

/// For V = {v0..N} ∖ A and each a ∈ A, checks
/// ∑_{v∈V} (1/v)(log((a∨v)/(a∧v)) ∨ 1)^α ≥ (c/2)(log(N/v0))^{α+1}.
pub fn logsum_bound_check(
    n: u64,
    v0: u64,
    a: &[u64],
    alpha: f64,
    c: Option<f64>,
) -> Result<LogsumReport> {
    let c = c.unwrap_or_else(|| logsum_default_c(alpha));
    let eta = logsum_eta(alpha);
    let nf = n as f64;
    let rhs = 0.5 * c * (nf / v0 as f64).ln().powf(alpha + 1.0);
    let mut set = a.to_vec();
    set.sort_unstable();
    set.dedup();
    let report = |outcome, lhs| LogsumReport {
        outcome,
        c,
        eta,
        rhs,
        lhs,
    };
    let low = (2.0 * std::f64::consts::E.powi(2)).ceil() as u64;
    let min_a = match set.first() {
        Some(&m) => m,
        None => {
            return Ok(report(
                LogsumOutcome::HypothesisNotSatisfied("A is empty".into()),
                vec![],
            ))
        }
    };
    if min_a < low || *set.last().unwrap() > n {
        return Ok(report(
            LogsumOutcome::HypothesisNotSatisfied(format!("A must lie in [{low}, {n}]")),
            vec![],
        ));
    }
    let v0f = v0 as f64;
    if v0 < 1 || v0f >= min_a as f64 / std::f64::consts::E.powi(2) || v0f >= eta * nf {
        return Ok(report(
            LogsumOutcome::HypothesisNotSatisfied(format!(
                "v0 must be below min(A)/e^2 and eta*N (eta={eta:.3e})"
            )),
            vec![],
        ));
    }
    let mut xi2 = 0.0;
    for &x in &set {
        xi2 += xi(x, n)?.powi(2);
    }
    let lhs_cond = (nf / min_a as f64).ln().max(1.0).powf(alpha) * xi2;
    let rhs_cond = 0.5 * c * nf * (nf / v0f).ln().powf(alpha + 1.0);
    if lhs_cond > rhs_cond {
        return Ok(report(
            LogsumOutcome::HypothesisNotSatisfied(format!(
                "score condition fails: {lhs_cond:.4e} > {rhs_cond:.4e}"
            )),
            vec![],
        ));
    }
    let lhs: Vec<(u64, f64)> = set
        .par_iter()
        .map(|&x| {
            let xf = x as f64;
            let mut s = 0.0;
            let mut next = 0;
            for v in v0..=n {
                if next < set.len() && set[next] == v {
                    next += 1;
                    continue;
                }
                let vf = v as f64;
                let r = if vf > xf { vf / xf } else { xf / vf };
                s += r.ln().max(1.0).powf(alpha) / vf;
            }
            (x, s)
        })
        .collect();
    let ok = lhs.iter().all(|&(_, s)| s >= rhs);
    Ok(report(
        if ok {
            LogsumOutcome::Holds
        } else {
            LogsumOutcome::Violated
        },
        lhs,
    ))
}

/// Random admissible (N, v0, A, α) instances, resampled until the hypotheses
/// hold; passes if no instance violates the bound.
pub fn logsum_random_check(instances: u32, seed: u64) -> Result<Diagnostic> {
    let base = rng::derive_seed(seed, 0x6c6f_6773);
    let low = (2.0 * std::f64::consts::E.powi(2)).ceil() as u64;
    let (mut holds, mut violated, mut draws) = (0u32, 0u32, 0u64);
    let mut worst = f64::INFINITY;
    for i in 0..instances as u64 {
        let mut r = rng::substream(base, domain::MISC, i);
        let report = loop {
            draws += 1;
            let alpha = r.random_range(0.0..3.0);
            let n = 10f64.powf(r.random_range(3.0..5.3)) as u64;
            let v_hi = ((logsum_eta(alpha) * n as f64).ceil() as u64)
                .saturating_sub(1)
                .max(1);
            let v0 = r.random_range(1..=v_hi);
            let a_lo = low.max((std::f64::consts::E.powi(2) * v0 as f64).floor() as u64 + 1);
            if a_lo > n {
                continue;
            }
            let size = r.random_range(1..=10usize);
            let a: Vec<u64> = (0..size).map(|_| r.random_range(a_lo..=n)).collect();
            let rep = logsum_bound_check(n, v0, &a, alpha, None)?;
            if !matches!(rep.outcome, LogsumOutcome::HypothesisNotSatisfied(_)) {
                break rep;
            }
        };
        match report.outcome {
            LogsumOutcome::Holds => holds += 1,
            _ => violated += 1,
        }
        let margin = report
            .lhs
            .iter()
            .map(|&(_, l)| l / report.rhs)
            .fold(f64::INFINITY, f64::min);
        worst = worst.min(margin);
    }
    Ok(
        Diagnostic::pass_if("logsum_random", violated == 0 && holds == instances)
            .with("instances", instances)
            .with("violations", violated)
            .with("draws", draws)
            .with("min_lhs_over_rhs", worst),
    )
}

/// ∑_{k≤K} μ_k + P(Z > K) = 1 for each rule.
pub fn mu_normalization_check(rules: &[AttachmentRule], k_max: u64) -> Result<Diagnostic> {
    let mut worst: f64 = 0.0;
    for r in rules {
        let head: f64 = mu_sequence(r, k_max)?.iter().sum();
        worst = worst.max((head + mu_tail(r, k_max)? - 1.0).abs());
    }
    Ok(Diagnostic::pass_if("mu_normalization", worst <= 1e-12)
        .with("k_max", k_max)
        .with("rules", rules.len())
        .with("max_error", worst))
}

fn push_degrees(h: &mut Vec<u64>, values: impl Iterator<Item = u64>) {
    for d in values {
        if h.len() <= d as usize {
            h.resize(d as usize + 1, 0);
        }
        h[d as usize] += 1;
    }
}

fn add_hist(t: &mut Vec<u64>, x: &[u64]) {
    if t.len() < x.len() {
        t.resize(x.len(), 0);
    }
    for (a, b) in t.iter_mut().zip(x) {
        *a += b;
    }
}

/// Chi-square homogeneity statistic of two groups of per-graph histograms.
/// Degrees within one graph are neither independent nor identically
/// distributed, so the p-value comes from permuting whole graphs between the
/// groups (999 permutations); the asymptotic χ² p-value is reported alongside.
fn graph_permutation_test(name: &str, a: &[Vec<u64>], b: &[Vec<u64>], seed: u64) -> Diagnostic {
    let pool: Vec<&Vec<u64>> = a.iter().chain(b).collect();
    let sum = |idx: &[usize]| {
        let mut t = Vec::new();
        for &i in idx {
            add_hist(&mut t, pool[i]);
        }
        t
    };
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    let (ia, ib) = idx.split_at(a.len());
    let observed = stats::chi_square_two_sample(&sum(ia), &sum(ib), 5.0);
    let perms = 999u64;
    let mut r = rng::substream(seed, domain::MISC, u64::MAX - 1);
    let mut ge = 0u64;
    for _ in 0..perms {
        idx.shuffle(&mut r);
        let (pa, pb) = idx.split_at(a.len());
        if stats::chi_square_two_sample(&sum(pa), &sum(pb), 5.0).statistic >= observed.statistic {
            ge += 1;
        }
    }
    let p = (ge + 1) as f64 / (perms + 1) as f64;
    Diagnostic::pass_if(name, observed.df >= 1 && p > 0.01)
        .with("statistic", observed.statistic)
        .with("df", observed.df)
        .with("p_value", p)
        .with("asymptotic_p", observed.p_value)
        .with("permutations", perms)
}

/// Fast against literal preferential attachment: pooled histograms of
/// younger-neighbour counts and of older-neighbour counts over `seeds`
/// graphs with seeds derived from `seed`.
pub fn pa_oracle_check(
    n: u32,
    rule: &AttachmentRule,
    seed: u64,
    seeds: u64,
) -> Result<Vec<Diagnostic>> {
    let hists: Vec<[Vec<u64>; 4]> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let s = rng::derive_seed(seed, i);
            let fast = pa_gen::generate(n, rule, s)?;
            let slow = pa_gen::reference_generate(n, rule, s)?;
            let mut h: [Vec<u64>; 4] = Default::default();
            push_degrees(&mut h[0], (1..=n).map(|v| fast.younger_degree(v)));
            push_degrees(&mut h[1], (1..=n).map(|v| slow.younger_degree(v)));
            push_degrees(
                &mut h[2],
                (1..=n).map(|v| fast.degree(v) - fast.younger_degree(v)),
            );
            push_degrees(
                &mut h[3],
                (1..=n).map(|v| slow.degree(v) - slow.younger_degree(v)),
            );
            Ok(h)
        })
        .collect::<Result<_>>()?;
    let col = |j: usize| hists.iter().map(|h| h[j].clone()).collect::<Vec<_>>();
    Ok(vec![
        graph_permutation_test("pa_oracle_indegree", &col(0), &col(1), seed)
            .with("N", n)
            .with("seeds", seeds),
        graph_permutation_test("pa_oracle_outdegree", &col(2), &col(3), seed)
            .with("N", n)
            .with("seeds", seeds),
    ])
}

/// Exact law of Z[v,n] for every v ∈ [n], by running the indegree chain
/// forward: row v holds P(Z[v,n] = k) for k = 0..n.
pub fn pa_exact_indegree_law(n: u32, rule: &AttachmentRule) -> Result<Vec<Vec<f64>>> {
    let n = n as usize;
    let f: Vec<f64> = (0..=n as u64)
        .map(|k| rule.evaluate(k))
        .collect::<Result<_>>()?;
    let mut rows = vec![Vec::new()];
    for v in 1..=n {
        let mut p = vec![0.0; n - v + 1];
        p[0] = 1.0;
        for new in v + 1..=n {
            let t = (new - 1) as f64;
            // the chain has made at most new − 1 − v jumps so far
            for z in (0..new - v).rev() {
                let a = (f[z] / t).min(1.0);
                let moved = p[z] * a;
                p[z] -= moved;
                p[z + 1] += moved;
            }
        }
        rows.push(p);
    }
    Ok(rows)
}

/// Both generators against the exact indegree law: per-vertex mean of
/// Z[v,n] over `reps` graphs, standardized by the exact variance. Vertex
/// chains are independent, so Σ z² over vertices is χ² with one degree of
/// freedom per non-degenerate vertex.
pub fn pa_exact_law_check(
    n: u32,
    rule: &AttachmentRule,
    seed: u64,
    reps: u64,
) -> Result<Vec<Diagnostic>> {
    let law = pa_exact_indegree_law(n, rule)?;
    let moments: Vec<(f64, f64)> = law
        .iter()
        .map(|p| {
            let m: f64 = p.iter().enumerate().map(|(k, x)| k as f64 * x).sum();
            let s: f64 = p.iter().enumerate().map(|(k, x)| (k * k) as f64 * x).sum();
            (m, s - m * m)
        })
        .collect();
    let mut out = Vec::new();
    for (name, fast) in [
        ("pa_exact_law_fast", true),
        ("pa_exact_law_reference", false),
    ] {
        let sums = (0..reps)
            .into_par_iter()
            .map(|i| {
                let s = rng::derive_seed(seed, i);
                let g = if fast {
                    pa_gen::generate(n, rule, s)?
                } else {
                    pa_gen::reference_generate(n, rule, s)?
                };
                Ok::<_, Error>(
                    (1..=n)
                        .map(|v| g.younger_degree(v) as f64)
                        .collect::<Vec<_>>(),
                )
            })
            .try_reduce(
                || vec![0.0; n as usize],
                |mut a, b| {
                    a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                    Ok(a)
                },
            )?;
        let (mut stat, mut df, mut worst) = (0.0, 0u64, 0.0f64);
        for (v, sum) in sums.iter().enumerate() {
            let (m, var) = moments[v + 1];
            if var > 1e-12 {
                let z = (sum / reps as f64 - m) / (var / reps as f64).sqrt();
                stat += z * z;
                df += 1;
                worst = if z.abs() > worst.abs() { z } else { worst };
            }
        }
        let p = if df > 0 {
            stats::chi_square_sf(stat, df)
        } else {
            f64::NAN
        };
        out.push(
            Diagnostic::pass_if(name, df > 0 && p > 0.01)
                .with("N", n)
                .with("reps", reps)
                .with("statistic", stat)
                .with("df", df)
                .with("p_value", p)
                .with("worst_z", worst),
        );
    }
    Ok(out)
}

/// Fast against literal Norros–Reittu: pooled degree histograms over `seeds`
/// graphs, and, for one fixed weight sequence, the empirical frequency of
/// three pairs against 1 − e^{−W_vW_w/L} (Wilson 99% interval, both
/// generators).
pub fn nr_oracle_check(
    n: u32,
    dist: &WeightDistribution,
    seed: u64,
    seeds: u64,
) -> Result<Vec<Diagnostic>> {
    let hists: Vec<[Vec<u64>; 2]> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let s = rng::derive_seed(seed, i);
            let (fast, _) = nr_gen::generate_nr(n, dist, s)?;
            let (slow, _) = nr_gen::reference_generate_nr(n, dist, s)?;
            let mut h: [Vec<u64>; 2] = Default::default();
            push_degrees(&mut h[0], (1..=n).map(|v| fast.degree(v)));
            push_degrees(&mut h[1], (1..=n).map(|v| slow.degree(v)));
            Ok(h)
        })
        .collect::<Result<_>>()?;
    let a: Vec<Vec<u64>> = hists.iter().map(|h| h[0].clone()).collect();
    let b: Vec<Vec<u64>> = hists.iter().map(|h| h[1].clone()).collect();
    let mut out = vec![graph_permutation_test("nr_oracle_degree", &a, &b, seed)
        .with("N", n)
        .with("seeds", seeds)];

    let ws = nr_gen::sample_weights(n, dist, rng::derive_seed(seed, u64::MAX));
    let mut order: Vec<u32> = (1..=n).collect();
    order.sort_by(|&x, &y| ws.weight(y).total_cmp(&ws.weight(x)).then(x.cmp(&y)));
    let mid = order.len() / 2;
    let pairs = [
        (order[0], order[1]),
        (order[0], order[mid]),
        (order[mid], order[mid + 1]),
    ];
    let counts: Vec<([u64; 3], [u64; 3])> = (0..seeds)
        .into_par_iter()
        .map(|i| {
            let s = rng::derive_seed(seed, i);
            let fast = nr_gen::nr_from_weights(&ws, s)?;
            let slow = nr_gen::reference_nr_from_weights(&ws, s)?;
            let mut c = ([0u64; 3], [0u64; 3]);
            for (i, &(v, w)) in pairs.iter().enumerate() {
                c.0[i] += fast.has_edge(v, w) as u64;
                c.1[i] += slow.has_edge(v, w) as u64;
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    for (label, pick) in [
        ("nr_pair_probability_fast", 0usize),
        ("nr_pair_probability_reference", 1),
    ] {
        let mut ok = true;
        let mut detail = Vec::new();
        for (i, &(v, w)) in pairs.iter().enumerate() {
            let hits: u64 = counts
                .iter()
                .map(|c| if pick == 0 { c.0[i] } else { c.1[i] })
                .sum();
            let p = 1.0 - (-ws.weight(v) * ws.weight(w) / ws.total).exp();
            let (lo, hi) = stats::wilson_interval(hits, seeds, 0.99);
            ok &= lo <= p && p <= hi;
            detail.push((v, w, p, hits as f64 / seeds as f64, lo, hi));
        }
        out.push(
            Diagnostic::pass_if(label, ok)
                .with("pairs", detail)
                .with("trials", seeds),
        );
    }
    Ok(out)
}

/// Untruncated explorations replayed against BFS on `graphs` random graphs
/// with N ≤ 1000, alternating preferential attachment and Norros–Reittu
/// with random α ∈ [0, 2]; three random starts per graph.
pub fn exploration_bfs_check(graphs: u32, seed: u64) -> Result<Diagnostic> {
    let base = rng::derive_seed(seed, 0x62_6673);
    let results: Vec<(u32, crate::exploration::BfsAgreement)> = (0..graphs as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::substream(base, domain::MISC, i);
            let n = r.random_range(2..=1000u32);
            let alpha = r.random_range(0.0..2.0);
            let gs = r.random();
            let g = if i % 2 == 0 {
                pa_gen::generate(n, &AttachmentRule::critical(alpha, 1.0)?, gs)?
            } else {
                nr_gen::generate_nr(n, &WeightDistribution::new(alpha, 1.0)?, gs)?.0
            };
            let mut worst = None;
            for _ in 0..3 {
                let a = crate::exploration::bfs_agreement(&g, r.random_range(1..=n))?;
                if worst.is_none() || !a.ok() {
                    worst = Some(a);
                }
            }
            Ok((n, worst.expect("three starts")))
        })
        .collect::<Result<_>>()?;
    let failed = results.iter().filter(|(_, a)| !a.ok()).count();
    let max_gen = results
        .iter()
        .map(|(_, a)| a.generations)
        .max()
        .unwrap_or(0);
    let max_n = results.iter().map(|(n, _)| *n).max().unwrap_or(0);
    Ok(Diagnostic::pass_if("exploration_equals_bfs", failed == 0)
        .with("graphs", graphs)
        .with("failed", failed)
        .with("max_N", max_n)
        .with("max_generations", max_gen))
}

/// Empirical survival of N sampled weights at the 1/2, 1/10, 1/100 and
/// 1/1000 quantiles of the law, each inside its Wilson 99.9% interval.
pub fn nr_weight_law_check(dist: &WeightDistribution, n: u32, seed: u64) -> Diagnostic {
    let ws = nr_gen::sample_weights(n, dist, seed);
    let mut ok = true;
    let mut detail = Vec::new();
    for q in [0.5, 0.1, 0.01, 0.001] {
        let w = dist.survival_inverse(q);
        let p = dist.survival(w);
        let hits = ws.weights.iter().filter(|&&x| x >= w).count() as u64;
        let (lo, hi) = stats::wilson_interval(hits, n as u64, 0.999);
        ok &= lo <= p && p <= hi;
        detail.push((w, p, hits as f64 / n as f64));
    }
    Diagnostic::pass_if("nr_weight_law", ok)
        .with("alpha", dist.alpha)
        .with("N", n)
        .with("norm_c", dist.norm_c)
        .with("points", detail)
}

/// Upper decay ℓ_k ≤ N e^{−(2α+2−δ)(k−k₀) log k} for k₀ ≤ k < K*, and the
/// fitted constant c in ℓ_k ≥ cN e^{−(4α+5)k(1∨log k)}.
pub fn ell_decay_check(
    n: u64,
    alpha: f64,
    s0: f64,
    delta0: f64,
    kappa: f64,
    delta: f64,
) -> Result<Diagnostic> {
    let seq = truncation_sequence(n, s0, delta0, kappa, alpha)?;
    let k0 = decay_start(alpha, delta);
    let k_star = seq.k_star() as u64;
    let nf = n as f64;
    let mut violations = 0u64;
    let mut checked = 0u64;
    for k in k0..k_star {
        let kf = k as f64;
        let bound = nf * (-(2.0 * alpha + 2.0 - delta) * (kf - k0 as f64) * kf.ln()).exp();
        checked += 1;
        if seq.level(k) as f64 > bound {
            violations += 1;
        }
    }
    let c_fit = (1..=k_star)
        .map(|k| {
            let kf = k as f64;
            seq.level(k) as f64 / (nf * (-(4.0 * alpha + 5.0) * kf * kf.ln().max(1.0)).exp())
        })
        .fold(f64::INFINITY, f64::min);
    Ok(Diagnostic::pass_if(
        format!("ell_decay alpha={alpha}"),
        violations == 0 && c_fit > 0.0,
    )
    .with("k0", k0)
    .with("k_star", k_star)
    .with("checked", checked)
    .with("vacuous", checked == 0)
    .with("lower_constant", c_fit)
    .with("levels", seq.levels()))
}

/// √(n/m) ≤ ξ(m,n) ≤ 1.13√(n/m) on a log grid, and ξ(m,N)/√(N/m) nonincreasing
/// in m ≤ 100 at N = n_max.
pub fn xi_sandwich_check(n_max: u64, points: usize) -> Result<Diagnostic> {
    let mut worst_lo: f64 = f64::INFINITY;
    let mut worst_hi: f64 = 0.0;
    let golden = 0.618_033_988_749_895;
    for i in 0..points {
        let n = (n_max as f64)
            .powf(i as f64 / (points - 1).max(1) as f64)
            .round()
            .max(1.0) as u64;
        let frac = (i as f64 * golden).fract();
        let m = ((n as f64).powf(frac).round() as u64).clamp(1, n);
        let r = xi(m, n)? / (n as f64 / m as f64).sqrt();
        worst_lo = worst_lo.min(r);
        worst_hi = worst_hi.max(r);
    }
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for m in 1..=100u64 {
        let r = xi(m, n_max)? / (n_max as f64 / m as f64).sqrt();
        monotone &= r <= prev;
        prev = r;
    }
    Ok(Diagnostic::pass_if(
        "xi_sandwich",
        worst_lo >= 1.0 - 1e-12 && worst_hi <= 1.13 && monotone,
    )
    .with("min_ratio", worst_lo)
    .with("max_ratio", worst_hi)
    .with("monotone_in_m", monotone)
    .with("points", points))
}

/// Exact one-step drifts of X and Y for z ≤ z_max on `n_grid` (m = 1):
/// equality within 1e−12 relative for `affine`, nonnegative drift for `concave`.
pub fn martingale_check(
    affine: &AttachmentRule,
    concave: &AttachmentRule,
    z_max: u64,
    n_grid: &[u64],
) -> Result<Vec<Diagnostic>> {
    let mut eq_x: f64 = 0.0;
    let mut eq_y: f64 = 0.0;
    let mut sub_x: f64 = f64::INFINITY;
    let mut sub_y: f64 = f64::INFINITY;
    for &n in n_grid {
        for z in 0..=z_max {
            let (e, x) = x_step(affine, 1, n, z)?;
            eq_x = eq_x.max((e - x).abs() / x);
            let (e, y) = y_step(affine, 1, n, z)?;
            eq_y = eq_y.max((e - y).abs() / y);
            let (e, x) = x_step(concave, 1, n, z)?;
            sub_x = sub_x.min((e - x) / x);
            let (e, y) = y_step(concave, 1, n, z)?;
            sub_y = sub_y.min((e - y) / y);
        }
    }
    Ok(vec![
        Diagnostic::pass_if("martingale_x_affine", eq_x <= 1e-12).with("max_rel_error", eq_x),
        Diagnostic::pass_if("martingale_y_affine", eq_y <= 1e-12).with("max_rel_error", eq_y),
        Diagnostic::pass_if("submartingale_x", sub_x >= -1e-12).with("min_rel_drift", sub_x),
        Diagnostic::pass_if("submartingale_y", sub_y >= -1e-12).with("min_rel_drift", sub_y),
    ])
}
