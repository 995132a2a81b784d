use rand::Rng;
use serde::Serialize;

use super::core::{core_study, n_eps, CoreInput, CoreParams};
use super::distance_scale;
use crate::error::Result;
use crate::exploration::{
    initial_phase_done, new_exploration, run_to_score, step, Configuration, ExplorationReport,
    ExplorationStatus, Parity,
};
use crate::graph::{bfs_distance, components, shortest_path, Graph};
use crate::rng::{self, domain};
use crate::rules::{truncation_sequence, AttachmentRule, TruncationSequence};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PipelineParams {
    pub eps: f64,
    pub s0: f64,
    pub delta0: f64,
    pub kappa: f64,
    pub r_exp: f64,
    pub c_eps: f64,
    pub replicas: u32,
    pub initial_max_steps: u64,
    pub main_max_steps: u64,
    pub seed: u64,
}

impl PipelineParams {
    pub fn new(alpha: f64, seed: u64) -> Self {
        Self {
            eps: 0.2,
            s0: 100.0,
            delta0: 0.25,
            kappa: 0.25,
            r_exp: 2.0 * alpha + 2.0,
            c_eps: 1.0,
            replicas: 1000,
            initial_max_steps: 64,
            main_max_steps: 256,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineStatus {
    /// Both explorations reached the score target and joined the core.
    Success,
    /// The two explorations met before reaching the core.
    Met,
    /// Both starts coincide.
    SameStart,
    NoStart,
    InitialPhaseFailed,
    MainPhaseFailed,
    CoreFailure,
    NotConnected,
}

impl PipelineStatus {
    pub fn succeeded(self) -> bool {
        matches!(
            self,
            PipelineStatus::Success | PipelineStatus::Met | PipelineStatus::SameStart
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineSide {
    pub start: u32,
    pub initial_steps: u64,
    pub main: Option<ExplorationReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    #[serde(rename = "N")]
    pub n: u32,
    pub n_eps: u32,
    pub status: PipelineStatus,
    pub target: f64,
    pub sides: Vec<PipelineSide>,
    pub core_size: Option<usize>,
    pub core_diameter: Option<u32>,
    pub path: Option<Vec<u32>>,
    pub length: Option<u32>,
    pub bfs_distance: Option<u32>,
    /// length / (log N / log log N).
    pub scaled_length: Option<f64>,
    /// Every step of `path` is an edge of the graph and length ≥ BFS distance.
    pub sound: Option<bool>,
}

fn explore_side(
    g: &Graph,
    start: u32,
    main: &TruncationSequence,
    parity: Parity,
    target: f64,
    p: &PipelineParams,
) -> Result<(Configuration, PipelineSide, Option<ExplorationStatus>)> {
    let mut cfg = new_exploration(g, start, TruncationSequence::untruncated(), Parity::None)?;
    while !initial_phase_done(&cfg, p.s0)? {
        if cfg.active().is_empty() || cfg.generation() >= p.initial_max_steps {
            let side = PipelineSide {
                start,
                initial_steps: cfg.generation(),
                main: None,
            };
            return Ok((cfg, side, None));
        }
        step(&mut cfg, g)?;
    }
    let initial_steps = cfg.generation();
    cfg.restart_truncation(main.clone());
    cfg.set_parity(parity);
    let mut report = run_to_score(&mut cfg, g, target, p.main_max_steps)?;
    report.main_phase_start = initial_steps;
    let status = report.status;
    Ok((
        cfg,
        PipelineSide {
            start,
            initial_steps,
            main: Some(report),
        },
        Some(status),
    ))
}

fn depth(cfg: &Configuration, v: u32) -> usize {
    cfg.path_to_root(v).len() - 1
}

/// Best connector n ∈ (N_ε, N] with older neighbours v (explored) and w (core):
/// minimal tree depth of v, then smallest n, v, w.
fn connector(g: &Graph, ne: u32, cfg: &Configuration, in_core: &[bool]) -> Option<(u32, u32, u32)> {
    let explored = |v: u32| {
        cfg.n() >= v
            && matches!(
                cfg.state(v),
                crate::exploration::VertexState::Active | crate::exploration::VertexState::Dead
            )
    };
    let mut best: Option<(usize, u32, u32, u32)> = None;
    for n in ne + 1..=g.n() {
        let older = g.neighbors(n).iter().copied().filter(|&x| x < n);
        let w = older.clone().find(|&x| in_core[x as usize]);
        let Some(w) = w else { continue };
        let v = older
            .filter(|&x| explored(x))
            .min_by_key(|&x| (depth(cfg, x), x));
        if let Some(v) = v {
            let key = (depth(cfg, v), n, v, w);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    best.map(|(_, n, v, w)| (n, v, w))
}

/// Walk that climbs `cfg`'s tree from its root down to v.
fn root_to(cfg: &Configuration, v: u32) -> Vec<u32> {
    let mut p = cfg.path_to_root(v);
    p.reverse();
    p
}

fn sound(g: &Graph, path: &[u32], d: Option<u32>) -> bool {
    path.windows(2).all(|e| g.has_edge(e[0], e[1])) && d.is_some_and(|d| path.len() as u32 > d)
}

/// Two parity-disjoint explorations inside 𝒢_{N_ε}, each through an untruncated
/// initial phase and a truncated main phase, joined through the core by
/// vertices born after N_ε.
pub fn distance_upper_pipeline(
    g: &Graph,
    rule: &AttachmentRule,
    alpha: f64,
    p: &PipelineParams,
) -> Result<PipelineReport> {
    let n = g.n();
    let ne = n_eps(n, p.eps);
    let g_eps = g.prefix(ne);
    let target = (ne as f64).sqrt() / (ne as f64).ln().powf(alpha + 1.0);
    let mut report = PipelineReport {
        n,
        n_eps: ne,
        status: PipelineStatus::NoStart,
        target,
        sides: Vec::new(),
        core_size: None,
        core_diameter: None,
        path: None,
        length: None,
        bfs_distance: None,
        scaled_length: None,
        sound: None,
    };
    let comps = components(g);
    let pool: Vec<u32> = comps
        .members(comps.largest)
        .into_iter()
        .filter(|&v| v <= ne)
        .collect();
    if pool.is_empty() {
        return Ok(report);
    }
    let mut r = rng::substream(p.seed, domain::STARTS, 0);
    let u = pool[r.random_range(0..pool.len())];
    let v = pool[r.random_range(0..pool.len())];
    let finish = |mut report: PipelineReport, path: Vec<u32>, status| -> Result<PipelineReport> {
        let d = bfs_distance(g, u, v)?;
        let len = path.len() as u32 - 1;
        report.sound = Some(sound(g, &path, d));
        report.length = Some(len);
        report.scaled_length = Some(len as f64 / distance_scale(n as f64));
        report.bfs_distance = d;
        report.path = Some(path);
        report.status = status;
        Ok(report)
    };
    if u == v {
        report.sides = vec![PipelineSide {
            start: u,
            initial_steps: 0,
            main: None,
        }];
        return finish(report, vec![u], PipelineStatus::SameStart);
    }

    let main = truncation_sequence(ne as u64, p.s0, p.delta0, p.kappa, alpha)?;
    let (cu, su, stu) = explore_side(&g_eps, u, &main, Parity::Odd, target, p)?;
    let (cv, sv, stv) = explore_side(&g_eps, v, &main, Parity::Even, target, p)?;
    report.sides = vec![su, sv];
    match (stu, stv) {
        (None, _) | (_, None) => {
            report.status = PipelineStatus::InitialPhaseFailed;
            return Ok(report);
        }
        (Some(a), Some(b))
            if a != ExplorationStatus::ScoreTargetReached
                || b != ExplorationStatus::ScoreTargetReached =>
        {
            report.status = PipelineStatus::MainPhaseFailed;
            return Ok(report);
        }
        _ => {}
    }

    let explored = |c: &Configuration, x: u32| {
        matches!(
            c.state(x),
            crate::exploration::VertexState::Active | crate::exploration::VertexState::Dead
        )
    };
    let meet = (1..=ne)
        .filter(|&x| explored(&cu, x) && explored(&cv, x))
        .min_by_key(|&x| (depth(&cu, x) + depth(&cv, x), x));
    if let Some(x) = meet {
        let mut path = root_to(&cu, x);
        path.extend(cv.path_to_root(x).into_iter().skip(1));
        return finish(report, path, PipelineStatus::Met);
    }

    let cp = CoreParams {
        alpha,
        r_exp: p.r_exp,
        c_eps: p.c_eps,
        m_n: None,
        eps: p.eps,
        replicas: p.replicas,
        seed: rng::derive_seed(p.seed, 1),
    };
    let core = core_study(g, CoreInput::Pa(rule), &cp)?;
    report.core_size = Some(core.core.len());
    report.core_diameter = core.diameter;
    if core.core.is_empty() {
        report.status = PipelineStatus::CoreFailure;
        return Ok(report);
    }
    let mut in_core = vec![false; n as usize + 1];
    for &c in &core.core {
        in_core[c as usize] = true;
    }
    let (Some((nu, xu, wu)), Some((nv, xv, wv))) = (
        connector(g, ne, &cu, &in_core),
        connector(g, ne, &cv, &in_core),
    ) else {
        report.status = PipelineStatus::NotConnected;
        return Ok(report);
    };
    let Some(bridge) = shortest_path(g, wu, wv) else {
        report.status = PipelineStatus::CoreFailure;
        return Ok(report);
    };
    let mut path = root_to(&cu, xu);
    path.push(nu);
    path.extend(bridge);
    path.push(nv);
    path.extend(cv.path_to_root(xv));
    finish(report, path, PipelineStatus::Success)
}
