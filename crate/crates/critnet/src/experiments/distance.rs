use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{distance_scale, Diagnostic, ExperimentConfig, Status};
use crate::error::Result;
use crate::graph::{components, BfsScratch, Graph};
use crate::rng::{self, domain};
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DistanceSample {
    #[serde(rename = "N")]
    pub n: u32,
    pub seed: u64,
    pub u: u32,
    pub v: u32,
    pub d: u32,
}

/// Least-squares fit of mean distance against log N / log log N.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CHatFit {
    pub c_hat: f64,
    pub intercept: f64,
    pub se: f64,
    pub df: u64,
    pub ci: (f64, f64),
    /// (N, log N/log log N, mean distance, samples).
    pub points: Vec<(u32, f64, f64, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub samples: Vec<DistanceSample>,
    pub fit: Option<CHatFit>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,seed,u,v,d\n");
        for x in &self.samples {
            let _ = writeln!(s, "{},{},{},{},{}", x.n, x.seed, x.u, x.v, x.d);
        }
        s
    }

    /// {config, c_hat, ci, diagnostics}.
    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "config": self.config,
            "c_hat": self.fit.as_ref().map(|f| f.c_hat),
            "ci": self.fit.as_ref().map(|f| [f.ci.0, f.ci.1]),
            "fit": self.fit,
            "diagnostics": self.diagnostics,
        })
    }

    /// Mean distance per grid point, in grid order.
    pub fn means(&self) -> Vec<(u32, f64, usize)> {
        self.config
            .n_grid
            .iter()
            .filter_map(|&n| {
                let ds: Vec<f64> = self
                    .samples
                    .iter()
                    .filter(|s| s.n == n)
                    .map(|s| s.d as f64)
                    .collect();
                (!ds.is_empty()).then(|| (n, stats::mean_var(&ds).0, ds.len()))
            })
            .collect()
    }
}

pub fn typical_distance_study(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let model = cfg.model.clone();
    typical_distance_study_with(cfg, move |n, seed| model.generate(n, seed))
}

/// Graph seed of the (N, seed) cell.
pub fn cell_seed(n: u32, seed: u64) -> u64 {
    rng::derive_seed(seed, n as u64)
}

/// As `typical_distance_study`, with graphs supplied by `factory(N, cell_seed)`.
pub fn typical_distance_study_with<F>(
    cfg: &ExperimentConfig,
    factory: F,
) -> Result<ExperimentReport>
where
    F: Fn(u32, u64) -> Result<Graph> + Sync,
{
    cfg.validate()?;
    let cells: Vec<(u32, u64)> = cfg
        .n_grid
        .iter()
        .flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s)))
        .collect();
    let results: Vec<Result<(Vec<DistanceSample>, Option<Diagnostic>)>> = cells
        .par_iter()
        .map(|&(n, seed)| {
            let cs = cell_seed(n, seed);
            let g = factory(n, cs)?;
            Ok(sample_cell(&g, n, seed, cs, cfg.pairs_per_graph))
        })
        .collect();
    let mut samples = Vec::new();
    let mut diagnostics = Vec::new();
    for r in results {
        let (s, d) = r?;
        samples.extend(s);
        diagnostics.extend(d);
    }
    let mut report = ExperimentReport {
        config: cfg.clone(),
        samples,
        fit: None,
        diagnostics,
    };
    let points: Vec<(u32, f64, f64, usize)> = report
        .means()
        .into_iter()
        .map(|(n, m, c)| (n, distance_scale(n as f64), m, c))
        .collect();
    report.fit = fit_c_hat(&points);
    let diag = match &report.fit {
        Some(f) => Diagnostic::new("c_hat", Status::Pass)
            .with("c_hat", f.c_hat)
            .with("ci", f.ci)
            .with("df", f.df),
        None => Diagnostic::new("c_hat", Status::Flagged).with(
            "reason",
            "degenerate fit: fewer than two distinct grid points",
        ),
    };
    report.diagnostics.push(diag.with("points", points.len()));
    Ok(report)
}

/// `k` uniform pairs u ≠ v from the largest component as (u, v, d); pair i
/// uses substream (seed, PAIRS, i). None if the component has one vertex.
pub fn sample_giant_pairs(g: &Graph, k: u32, seed: u64) -> Option<Vec<(u32, u32, u32)>> {
    let comps = components(g);
    let giant = comps.members(comps.largest);
    if giant.len() < 2 {
        return None;
    }
    let pairs = (0..k as u64)
        .into_par_iter()
        .map_init(
            || BfsScratch::new(g.n()),
            |scratch, i| {
                let mut r = rng::substream(seed, domain::PAIRS, i);
                let u = giant[r.random_range(0..giant.len())];
                let v = loop {
                    let v = giant[r.random_range(0..giant.len())];
                    if v != u {
                        break v;
                    }
                };
                let d = scratch
                    .distance(g, u, v)
                    .expect("pair drawn inside one component");
                (u, v, d)
            },
        )
        .collect();
    Some(pairs)
}

fn sample_cell(
    g: &Graph,
    n: u32,
    seed: u64,
    cs: u64,
    pairs: u32,
) -> (Vec<DistanceSample>, Option<Diagnostic>) {
    match sample_giant_pairs(g, pairs, cs) {
        Some(p) => (
            p.into_iter()
                .map(|(u, v, d)| DistanceSample { n, seed, u, v, d })
                .collect(),
            None,
        ),
        None => {
            let comps = components(g);
            let d = Diagnostic::new("skipped_graph", Status::Skipped)
                .with("N", n)
                .with("seed", seed)
                .with("largest_component", comps.largest_size());
            (Vec::new(), Some(d))
        }
    }
}

/// None unless at least two distinct grid points are present.
pub fn fit_c_hat(points: &[(u32, f64, f64, usize)]) -> Option<CHatFit> {
    let xs: Vec<f64> = points.iter().map(|p| p.1).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.2).collect();
    let f = stats::ols(&xs, &ys)?;
    Some(CHatFit {
        c_hat: f.slope,
        intercept: f.intercept,
        se: f.slope_se,
        df: f.df,
        ci: f.slope_ci(0.95),
        points: points.to_vec(),
    })
}

/// One-sided comparison of two fitted constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioTest {
    pub ratio: f64,
    pub diff: f64,
    pub se: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
    pub t: f64,
    /// P-value of H0: c_a ≤ c_b.
    pub p_one_sided: f64,
}

pub fn ratio_test(a: &CHatFit, b: &CHatFit) -> RatioTest {
    let (va, vb) = (a.se * a.se, b.se * b.se);
    let diff = a.c_hat - b.c_hat;
    let se = (va + vb).sqrt();
    let df = if va + vb > 0.0 {
        (va + vb).powi(2) / (va * va / a.df.max(1) as f64 + vb * vb / b.df.max(1) as f64)
    } else {
        f64::INFINITY
    };
    let (t, p) = if se > 0.0 && se.is_finite() {
        let t = diff / se;
        (
            t,
            if df.is_finite() {
                stats::student_t_sf(t, df)
            } else {
                stats::normal_sf(t)
            },
        )
    } else if se == 0.0 {
        (
            f64::INFINITY * diff.signum(),
            if diff > 0.0 { 0.0 } else { 1.0 },
        )
    } else {
        (f64::NAN, 1.0)
    };
    RatioTest {
        ratio: a.c_hat / b.c_hat,
        diff,
        se,
        df,
        t,
        p_one_sided: p,
    }
}

/// Even-index and odd-index halves of the grid give fits that agree within
/// their joint 95% interval.
pub fn fit_stability(report: &ExperimentReport) -> Diagnostic {
    let fit = match &report.fit {
        Some(f) => f,
        None => return Diagnostic::new("fit_stability", Status::Skipped).with("reason", "no fit"),
    };
    let half = |parity: usize| {
        let pts: Vec<_> = fit
            .points
            .iter()
            .enumerate()
            .filter(|(i, _)| i % 2 == parity)
            .map(|(_, p)| *p)
            .collect();
        fit_c_hat(&pts)
    };
    match (half(0), half(1)) {
        (Some(e), Some(o)) if e.df > 0 && o.df > 0 => {
            let t = ratio_test(&e, &o);
            let q = stats::normal_quantile(0.975);
            Diagnostic::pass_if("fit_stability", t.diff.abs() <= q * t.se)
                .with("c_even", e.c_hat)
                .with("c_odd", o.c_hat)
                .with("joint_se", t.se)
        }
        (Some(e), Some(o)) => Diagnostic::new("fit_stability", Status::Flagged)
            .with("c_even", e.c_hat)
            .with("c_odd", o.c_hat)
            .with(
                "reason",
                "halves have no residual degrees of freedom; interval unbounded",
            ),
        _ => Diagnostic::new("fit_stability", Status::Skipped)
            .with("reason", "fewer than four grid points"),
    }
}

/// Regression of mean d / (log N/log log N) on 1/log log N; passes when the
/// slope moves the ratio toward 1 as N grows.
pub fn ratio_drift(report: &ExperimentReport) -> Diagnostic {
    let pts = report.means();
    let xs: Vec<f64> = pts.iter().map(|p| 1.0 / (p.0 as f64).ln().ln()).collect();
    let rs: Vec<f64> = pts
        .iter()
        .map(|p| p.1 / distance_scale(p.0 as f64))
        .collect();
    match stats::ols(&xs, &rs) {
        Some(f) => {
            let last = *rs.last().unwrap();
            Diagnostic::pass_if("ratio_drift", (last - 1.0) * f.slope > 0.0)
                .with("ratios", &rs)
                .with("slope", f.slope)
                .with("intercept", f.intercept)
        }
        None => Diagnostic::new("ratio_drift", Status::Skipped)
            .with("reason", "fewer than two grid points"),
    }
}
