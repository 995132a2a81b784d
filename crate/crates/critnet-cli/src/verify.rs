//! Diagnostic suites behind `critnet verify`.

use clap::ValueEnum;

use critnet::experiments::{
    degree_law_check, distance_upper_pipeline, ell_decay_check, exploration_bfs_check,
    logsum_random_check, martingale_check, moment_bounds_check, mu_normalization_check,
    nr_lower_bound_audit, nr_oracle_check, nr_weight_law_check, pa_exact_law_check,
    pa_lower_bound_audit, pa_oracle_check, tail_exponent_check, xi_sandwich_check, Diagnostic,
    PipelineParams, Status,
};
use critnet::exploration::{
    is_proper, new_exploration, run_phases, ExplorationStatus, InitialPhase, Parity,
};
use critnet::graph::components;
use critnet::nr_gen::{self, WeightDistribution};
use critnet::rng::derive_seed;
use critnet::rules::truncation_sequence;
use critnet::{pa_gen, AttachmentRule, Graph, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Rules,
    Pa,
    Nr,
    Exploration,
    All,
}

pub fn run(suite: Suite, seed: u64) -> Result<Vec<Diagnostic>> {
    let mut out = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Rules {
        out.extend(rules_suite(seed)?);
    }
    if all || suite == Suite::Pa {
        out.extend(pa_suite(seed)?);
    }
    if all || suite == Suite::Nr {
        out.extend(nr_suite(seed)?);
    }
    if all || suite == Suite::Exploration {
        out.extend(exploration_suite(seed)?);
    }
    Ok(out)
}

fn crit(alpha: f64) -> AttachmentRule {
    AttachmentRule::critical(alpha, 1.0).expect("valid critical rule")
}

fn affine() -> AttachmentRule {
    AttachmentRule::affine(0.5, 0.5).expect("valid affine rule")
}

fn rules_suite(seed: u64) -> Result<Vec<Diagnostic>> {
    let mut out = vec![
        xi_sandwich_check(1_000_000, 1000)?,
        mu_normalization_check(&[crit(0.5), crit(1.0), crit(2.0), affine()], 10_000)?,
    ];
    let grid: Vec<u64> = (1..=6).map(|e| 10u64.pow(e)).collect();
    out.extend(martingale_check(&affine(), &crit(1.0), 10_000, &grid)?);
    for alpha in [0.5, 1.0, 2.0] {
        out.push(ell_decay_check(1_000_000, alpha, 100.0, 0.25, 0.25, 1.0)?);
    }
    out.push(logsum_random_check(100, seed)?);
    out.push(
        moment_bounds_check(
            &crit(1.0),
            &[1, 10, 100],
            &[1000, 10_000, 100_000],
            500,
            seed,
        )?
        .diagnostic,
    );
    Ok(out)
}

fn invariants(name: &str, g: &Graph) -> Diagnostic {
    Diagnostic::pass_if(name, g.check_invariants().is_ok())
        .with("N", g.n())
        .with("E", g.n_edges())
}

fn pa_suite(seed: u64) -> Result<Vec<Diagnostic>> {
    let rule = crit(1.0);
    let mut out = Vec::new();
    let g = pa_gen::generate(100_000, &rule, seed)?;
    out.push(invariants("pa_graph_invariants", &g));
    let law = degree_law_check(&g, &rule)?;
    out.push(law.indegree);
    out.push(law.outdegree);
    let aff: Vec<Graph> = (0..10)
        .map(|i| pa_gen::generate(100_000, &affine(), derive_seed(seed, 100 + i)))
        .collect::<Result<_>>()?;
    out.push(tail_exponent_check(&aff.iter().collect::<Vec<_>>(), 0.0));
    out.extend(pa_oracle_check(300, &rule, seed, 200)?);
    out.extend(pa_exact_law_check(300, &rule, seed, 2000)?);
    let reps: Vec<Graph> = (0..4)
        .map(|i| pa_gen::generate(10_000, &rule, derive_seed(seed, 10 + i)))
        .collect::<Result<_>>()?;
    out.push(pa_lower_bound_audit(&reps, &rule)?);
    Ok(out)
}

fn nr_suite(seed: u64) -> Result<Vec<Diagnostic>> {
    let mut out = Vec::new();
    let pareto = WeightDistribution::new(0.0, 1.0)?;
    let closed = [2.0, 5.0, 40.0]
        .iter()
        .all(|&w: &f64| (pareto.survival(w) - w.powi(-2)).abs() < 1e-15);
    out.push(
        Diagnostic::pass_if("nr_alpha_zero_pareto", closed && pareto.norm_c == 1.0)
            .with("norm_c", pareto.norm_c),
    );
    for alpha in [0.5, 1.0, 2.0] {
        out.push(nr_weight_law_check(
            &WeightDistribution::new(alpha, 1.0)?,
            100_000,
            derive_seed(seed, 20),
        ));
    }
    let dist = WeightDistribution::new(1.0, 1.0)?;
    let (g, _) = nr_gen::generate_nr(100_000, &dist, seed)?;
    out.push(invariants("nr_graph_invariants", &g));
    out.extend(nr_oracle_check(300, &dist, seed, 200)?);
    let samples: Vec<_> = (0..20)
        .map(|i| nr_gen::sample_weights(100_000, &dist, derive_seed(seed, 30 + i)))
        .collect();
    out.push(nr_lower_bound_audit(&samples, 1.0, 2.5, 0.2));
    Ok(out)
}

fn exploration_suite(seed: u64) -> Result<Vec<Diagnostic>> {
    let mut out = vec![exploration_bfs_check(40, seed)?];
    let rule = crit(1.0);
    let n = 20_000u32;
    let g = pa_gen::generate(n, &rule, seed)?;
    let comps = components(&g);
    let start = comps.members(comps.largest)[0];
    let trunc = truncation_sequence(n as u64, 100.0, 0.25, 0.25, 1.0)?;
    let mut cfg = new_exploration(&g, start, trunc, Parity::None)?;
    let target = (n as f64).sqrt() / (n as f64).ln().powi(2);
    let ip = InitialPhase {
        s0: 100.0,
        max_steps: 64,
        restart: true,
    };
    let rep = run_phases(&mut cfg, &g, target, 256, Some(ip))?;
    let monotone = rep.records.windows(2).all(|w| w[1].h_k >= w[0].h_k);
    let status = match rep.status {
        ExplorationStatus::ScoreTargetReached => Status::Pass,
        ExplorationStatus::DiedOut => Status::Flagged,
        ExplorationStatus::MaxSteps => Status::Fail,
    };
    let status = if monotone && is_proper(&cfg) {
        status
    } else {
        Status::Fail
    };
    out.push(
        Diagnostic::new("truncated_exploration", status)
            .with("start", start)
            .with("generations", rep.last().k)
            .with("main_phase_start", rep.main_phase_start)
            .with("H", rep.last().h_k)
            .with("target", target),
    );
    let mut p = PipelineParams::new(1.0, seed);
    p.replicas = 200;
    let pr = distance_upper_pipeline(&g, &rule, 1.0, &p)?;
    let status = match pr.sound {
        Some(true) => Status::Pass,
        Some(false) => Status::Fail,
        None => Status::Flagged,
    };
    out.push(
        Diagnostic::new("pipeline_path_is_walk", status)
            .with("outcome", pr.status)
            .with("length", pr.length)
            .with("bfs_distance", pr.bfs_distance),
    );
    Ok(out)
}
