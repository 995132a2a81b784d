//! Quantitative studies: typical distances, degree laws, moment bounds, cores,
//! appendix inequalities and the end-to-end upper-bound pipeline.

mod checks;
mod core;
mod distance;
mod pipeline;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use self::checks::{
    degree_law_check, ell_decay_check, exploration_bfs_check, floor_check, logsum_bound_check,
    logsum_default_c, logsum_eta, logsum_random_check, martingale_check, moment_bounds_check,
    mu_normalization_check, nr_lower_bound_audit, nr_oracle_check, nr_weight_law_check,
    pa_exact_indegree_law, pa_exact_law_check, pa_lower_bound_audit, pa_oracle_check,
    predicted_floor, tail_exponent_check, xi_sandwich_check, DegreeLawReport, LogsumOutcome,
    LogsumReport, MomentCell, MomentReport,
};
pub use self::core::{core_study, indegree_at, n_eps, CoreInput, CoreParams, CoreReport};
pub use self::distance::{
    cell_seed, fit_c_hat, fit_stability, ratio_drift, ratio_test, sample_giant_pairs,
    typical_distance_study, typical_distance_study_with, CHatFit, DistanceSample, ExperimentReport,
    RatioTest,
};
pub use self::pipeline::{
    distance_upper_pipeline, PipelineParams, PipelineReport, PipelineSide, PipelineStatus,
};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nr_gen::{self, WeightDistribution};
use crate::pa_gen;
use crate::rules::AttachmentRule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// Ran, but the result is degenerate or only informative.
    Flagged,
}

/// One named check with its statistics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: String,
    pub status: Status,
    pub stats: BTreeMap<String, Value>,
}

impl Diagnostic {
    pub fn new(name: impl Into<String>, status: Status) -> Self {
        Self {
            name: name.into(),
            status,
            stats: BTreeMap::new(),
        }
    }

    pub fn pass_if(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { Status::Pass } else { Status::Fail })
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.stats.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// "PASS name key=value ..." on one line.
    pub fn line(&self) -> String {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
            Status::Flagged => "FLAG",
        };
        let mut s = format!("{tag} {}", self.name);
        for (k, v) in &self.stats {
            s.push_str(&format!(" {k}={v}"));
        }
        s
    }
}

/// Model and parameters of a distance study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Pa { rule: AttachmentRule },
    Nr { dist: WeightDistribution },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Pa { .. } => "pa",
            ModelSpec::Nr { .. } => "nr",
        }
    }

    pub fn generate(&self, n: u32, seed: u64) -> Result<Graph> {
        match self {
            ModelSpec::Pa { rule } => pa_gen::generate(n, rule, seed),
            ModelSpec::Nr { dist } => Ok(nr_gen::generate_nr(n.max(2), dist, seed)?.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    pub n_grid: Vec<u32>,
    pub pairs_per_graph: u32,
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::InvalidParameter("n_grid is empty".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "n_grid must be strictly ascending".into(),
            ));
        }
        if self.n_grid[0] < 1 {
            return Err(Error::InvalidParameter(
                "n_grid entries must be >= 1".into(),
            ));
        }
        if self.pairs_per_graph < 1 {
            return Err(Error::InvalidParameter(
                "pairs_per_graph must be >= 1".into(),
            ));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("seeds is empty".into()));
        }
        Ok(())
    }
}

/// log N / log log N.
pub fn distance_scale(n: f64) -> f64 {
    n.ln() / n.ln().ln()
}
