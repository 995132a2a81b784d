//! Truncated breadth-first exploration of a realized graph.
//!
//! Every vertex is veiled, active or dead. A step walks the active vertices in
//! increasing label order and uncovers their veiled neighbours with label at
//! least ℓ_k; those become active at the end of the step while the old active
//! set dies. Scores are ξ(v, N) sums over the active set (S) and over
//! active ∪ dead (H).

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BfsScratch, Graph};
use crate::rules::{xi, TruncationSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexState {
    Veiled,
    Active,
    Dead,
    PreActive,
}

/// Restricts younger endpoints w > v of examined pairs by label parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    None,
    Odd,
    Even,
}

impl Parity {
    fn admits(self, v: u32, w: u32) -> bool {
        match self {
            Parity::None => true,
            _ if w < v => true,
            Parity::Odd => !w.is_multiple_of(2),
            Parity::Even => w.is_multiple_of(2),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Configuration {
    n: u32,
    state: Vec<VertexState>,
    /// 0 marks no parent.
    parent: Vec<u32>,
    active: Vec<u32>,
    n_dead: u64,
    generation: u64,
    /// Generation at which the current truncation sequence started.
    phase_start: u64,
    truncation: TruncationSequence,
    parity: Parity,
    score_s: f64,
    score_h: f64,
}

pub fn new_exploration(
    g: &Graph,
    start: u32,
    trunc: TruncationSequence,
    parity: Parity,
) -> Result<Configuration> {
    let n = g.n();
    if start == 0 || start > n {
        return Err(Error::VertexOutOfRange(start as u64));
    }
    let mut state = vec![VertexState::Veiled; n as usize + 1];
    state[start as usize] = VertexState::Active;
    let s = xi(start as u64, n as u64)?;
    Ok(Configuration {
        n,
        state,
        parent: vec![0; n as usize + 1],
        active: vec![start],
        n_dead: 0,
        generation: 0,
        phase_start: 0,
        truncation: trunc,
        parity,
        score_s: s,
        score_h: s,
    })
}

impl Configuration {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn state(&self, v: u32) -> VertexState {
        self.state[v as usize]
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        match self.parent[v as usize] {
            0 => None,
            p => Some(p),
        }
    }

    /// Active vertices in increasing label order.
    pub fn active(&self) -> &[u32] {
        &self.active
    }

    pub fn n_dead(&self) -> u64 {
        self.n_dead
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn truncation(&self) -> &TruncationSequence {
        &self.truncation
    }

    pub fn score_s(&self) -> f64 {
        self.score_s
    }

    pub fn score_h(&self) -> f64 {
        self.score_h
    }

    /// a_k, the smallest active label.
    pub fn min_active(&self) -> Option<u32> {
        self.active.first().copied()
    }

    /// Active and dead vertices in increasing label order.
    pub fn explored(&self) -> Vec<u32> {
        (1..=self.n)
            .filter(|&v| matches!(self.state(v), VertexState::Active | VertexState::Dead))
            .collect()
    }

    /// Truncation level the next step will use.
    pub fn next_level(&self) -> u64 {
        self.truncation
            .level(self.generation - self.phase_start + 1)
    }

    /// Parity filter for subsequent steps.
    pub fn set_parity(&mut self, parity: Parity) {
        self.parity = parity;
    }

    /// Switches to a new truncation sequence whose ℓ₁ applies to the next step.
    pub fn restart_truncation(&mut self, trunc: TruncationSequence) {
        self.truncation = trunc;
        self.phase_start = self.generation;
    }

    /// Path from v back to the root along discovery edges.
    pub fn path_to_root(&self, v: u32) -> Vec<u32> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path
    }
}

/// One exploration step; fails with `DiedOut` when nothing is active.
pub fn step(cfg: &mut Configuration, g: &Graph) -> Result<()> {
    if cfg.active.is_empty() {
        return Err(Error::DiedOut);
    }
    let level = cfg.next_level();
    let mut fresh = Vec::new();
    for &v in &cfg.active {
        for &w in g.neighbors(v) {
            if (w as u64) < level
                || cfg.state[w as usize] != VertexState::Veiled
                || !cfg.parity.admits(v, w)
            {
                continue;
            }
            cfg.state[w as usize] = VertexState::PreActive;
            cfg.parent[w as usize] = v;
            fresh.push(w);
        }
    }
    for &v in &cfg.active {
        cfg.state[v as usize] = VertexState::Dead;
    }
    cfg.n_dead += cfg.active.len() as u64;
    fresh.sort_unstable();
    let mut s = 0.0;
    for &w in &fresh {
        cfg.state[w as usize] = VertexState::Active;
        s += xi(w as u64, cfg.n as u64)?;
    }
    cfg.active = fresh;
    cfg.score_s = s;
    cfg.score_h += s;
    cfg.generation += 1;
    Ok(())
}

/// Parent pointers form one tree covering exactly active ∪ dead.
pub fn is_proper(cfg: &Configuration) -> bool {
    let n = cfg.n as usize;
    let explored = |v: usize| matches!(cfg.state[v], VertexState::Active | VertexState::Dead);
    let mut roots = 0;
    for v in 1..=n {
        let p = cfg.parent[v] as usize;
        if !explored(v) {
            if p != 0 || cfg.state[v] == VertexState::PreActive {
                return false;
            }
            continue;
        }
        if p == 0 {
            roots += 1;
        } else if p > n || !explored(p) {
            return false;
        }
    }
    if roots != 1 {
        return false;
    }
    // every explored vertex reaches the root without revisiting
    let mut seen = vec![0u32; n + 1];
    for v in 1..=n {
        if !explored(v) {
            continue;
        }
        let mut cur = v;
        while cur != 0 && seen[cur] == 0 {
            seen[cur] = v as u32;
            cur = cfg.parent[cur] as usize;
        }
        if cur != 0 && seen[cur] == v as u32 {
            return false;
        }
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplorationStatus {
    ScoreTargetReached,
    DiedOut,
    MaxSteps,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub k: u64,
    /// Truncation level used to reach generation k; None at k = 0.
    pub ell_k: Option<u64>,
    pub s_k: f64,
    pub h_k: f64,
    pub a_k: Option<u32>,
    pub n_active: u64,
    pub n_dead: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExplorationReport {
    pub records: Vec<GenerationRecord>,
    pub status: ExplorationStatus,
    /// Generation at which the main phase began (0 without an initial phase).
    pub main_phase_start: u64,
}

impl ExplorationReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,ell_k,S_k,H_k,a_k,n_active,n_dead\n");
        for r in &self.records {
            let ell = r.ell_k.map(|l| l.to_string()).unwrap_or_default();
            let a = r.a_k.map(|a| a.to_string()).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.k, ell, r.s_k, r.h_k, a, r.n_active, r.n_dead
            );
        }
        s
    }

    pub fn last(&self) -> &GenerationRecord {
        self.records
            .last()
            .expect("report always holds generation 0")
    }

    /// Generations spent in the main phase.
    pub fn main_phase_steps(&self) -> u64 {
        self.last().k - self.main_phase_start
    }
}

fn record(cfg: &Configuration, ell: Option<u64>) -> GenerationRecord {
    GenerationRecord {
        k: cfg.generation,
        ell_k: ell,
        s_k: cfg.score_s,
        h_k: cfg.score_h,
        a_k: cfg.min_active(),
        n_active: cfg.active.len() as u64,
        n_dead: cfg.n_dead,
    }
}

/// Steps until H ≥ target, the active set empties, or `max_steps` steps.
pub fn run_to_score(
    cfg: &mut Configuration,
    g: &Graph,
    target: f64,
    max_steps: u64,
) -> Result<ExplorationReport> {
    run_phases(cfg, g, target, max_steps, None)
}

/// Untruncated opening phase that ends once the active set A satisfies
/// ξ(A) ≥ s0·ξ(min A).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitialPhase {
    pub s0: f64,
    pub max_steps: u64,
    /// Index the main-phase truncation from ℓ₁ at the phase switch.
    pub restart: bool,
}

/// ξ(A) ≥ s0·ξ(min A) for the active set A.
pub fn initial_phase_done(cfg: &Configuration, s0: f64) -> Result<bool> {
    match cfg.min_active() {
        Some(a) => Ok(cfg.score_s >= s0 * xi(a as u64, cfg.n as u64)?),
        None => Ok(false),
    }
}

/// As `run_to_score`, optionally preceded by an initial phase; the main
/// phase uses the configuration's truncation sequence.
pub fn run_phases(
    cfg: &mut Configuration,
    g: &Graph,
    target: f64,
    max_steps: u64,
    initial: Option<InitialPhase>,
) -> Result<ExplorationReport> {
    if !(target > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "score target must be positive, got {target}"
        )));
    }
    let mut records = vec![record(cfg, None)];
    let mut main_phase_start = cfg.generation;
    if let Some(ip) = initial {
        let main = std::mem::replace(&mut cfg.truncation, TruncationSequence::untruncated());
        let start = cfg.generation;
        let mut done = initial_phase_done(cfg, ip.s0)?;
        while !done && !cfg.active.is_empty() && cfg.generation - start < ip.max_steps {
            step(cfg, g)?;
            records.push(record(cfg, Some(1)));
            done = initial_phase_done(cfg, ip.s0)?;
        }
        cfg.truncation = main;
        if !done {
            let status = if cfg.active.is_empty() {
                ExplorationStatus::DiedOut
            } else {
                ExplorationStatus::MaxSteps
            };
            return Ok(ExplorationReport {
                records,
                status,
                main_phase_start: cfg.generation,
            });
        }
        if ip.restart {
            cfg.phase_start = cfg.generation;
        }
        main_phase_start = cfg.generation;
    }
    let mut steps = 0;
    let status = loop {
        if cfg.score_h >= target {
            break ExplorationStatus::ScoreTargetReached;
        }
        if cfg.active.is_empty() {
            break ExplorationStatus::DiedOut;
        }
        if steps >= max_steps {
            break ExplorationStatus::MaxSteps;
        }
        let level = cfg.next_level();
        step(cfg, g)?;
        records.push(record(cfg, Some(level)));
        steps += 1;
    };
    Ok(ExplorationReport {
        records,
        status,
        main_phase_start,
    })
}

/// Outcome of replaying an untruncated exploration against BFS.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BfsAgreement {
    pub generations: u32,
    /// Generations whose active set differs from the BFS layer.
    pub layer_mismatches: u32,
    /// Configurations (including the initial one) that were not proper.
    pub improper: u32,
}

impl BfsAgreement {
    pub fn ok(&self) -> bool {
        self.layer_mismatches == 0 && self.improper == 0
    }
}

/// Runs an untruncated exploration from `start` until it dies out, comparing
/// generation k's active set with the BFS layer at distance k.
pub fn bfs_agreement(g: &Graph, start: u32) -> Result<BfsAgreement> {
    let mut bfs = BfsScratch::new(g.n());
    bfs.bfs_from(g, start);
    let mut layers: Vec<Vec<u32>> = Vec::new();
    for v in 1..=g.n() {
        if let Some(d) = bfs.dist(v) {
            if layers.len() <= d as usize {
                layers.resize(d as usize + 1, Vec::new());
            }
            layers[d as usize].push(v);
        }
    }
    let mut c = new_exploration(g, start, TruncationSequence::untruncated(), Parity::None)?;
    let mut out = BfsAgreement {
        generations: 0,
        layer_mismatches: 0,
        improper: 0,
    };
    loop {
        let k = c.generation as usize;
        let mut act = c.active.clone();
        act.sort_unstable();
        if act.as_slice() != layers.get(k).map_or(&[][..], |l| l.as_slice()) {
            out.layer_mismatches += 1;
        }
        if !is_proper(&c) {
            out.improper += 1;
        }
        if c.active.is_empty() {
            break;
        }
        step(&mut c, g)?;
        out.generations += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_graph(n: u32, p: f64, seed: u64) -> Graph {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 1..=n {
            for v in u + 1..=n {
                if r.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    fn star(n: u32) -> Graph {
        Graph::from_edges(n, &(2..=n).map(|v| (1, v)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn fresh_configuration() {
        let g = star(5);
        let c = new_exploration(&g, 3, TruncationSequence::untruncated(), Parity::Odd).unwrap();
        assert_eq!(c.score_s(), xi(3, 5).unwrap());
        assert_eq!(c.parity(), Parity::Odd);
        assert!(is_proper(&c));
        assert!(new_exploration(&g, 6, TruncationSequence::untruncated(), Parity::None).is_err());
    }

    #[test]
    fn star_from_center() {
        let g = star(6);
        let mut c =
            new_exploration(&g, 1, TruncationSequence::untruncated(), Parity::None).unwrap();
        step(&mut c, &g).unwrap();
        assert_eq!(c.active(), &[2, 3, 4, 5, 6]);
        assert_eq!(c.state(1), VertexState::Dead);
        assert!((2..=6).all(|v| c.parent(v) == Some(1)));
        assert!(is_proper(&c));
    }

    #[test]
    fn degenerate_truncation_discovers_nothing() {
        let g = star(6);
        let mut c = new_exploration(&g, 1, TruncationSequence::constant(7), Parity::None).unwrap();
        step(&mut c, &g).unwrap();
        assert!(c.active().is_empty());
        assert!(matches!(step(&mut c, &g), Err(Error::DiedOut)));
    }

    #[test]
    fn run_to_score_edge_cases() {
        let g = Graph::from_edges(3, &[(1, 2)]).unwrap();
        let mut c =
            new_exploration(&g, 3, TruncationSequence::untruncated(), Parity::None).unwrap();
        let r = run_to_score(&mut c, &g, 1e9, 10).unwrap();
        assert_eq!(r.status, ExplorationStatus::DiedOut);
        assert_eq!(r.last().k, 1);
        let mut c =
            new_exploration(&g, 1, TruncationSequence::untruncated(), Parity::None).unwrap();
        let r = run_to_score(&mut c, &g, xi(1, 3).unwrap(), 10).unwrap();
        assert_eq!(r.status, ExplorationStatus::ScoreTargetReached);
        assert_eq!(r.records.len(), 1);
        assert!(run_to_score(&mut c, &g, 0.0, 10).is_err());
    }

    #[test]
    fn parity_filters_only_younger_endpoints() {
        // 4 is explored from 5 (older endpoint), 6 is skipped as an even younger vertex
        let g = Graph::from_edges(7, &[(4, 5), (5, 6), (5, 7)]).unwrap();
        let mut c = new_exploration(&g, 5, TruncationSequence::untruncated(), Parity::Odd).unwrap();
        step(&mut c, &g).unwrap();
        assert_eq!(c.active(), &[4, 7]);
        let mut c =
            new_exploration(&g, 5, TruncationSequence::untruncated(), Parity::Even).unwrap();
        step(&mut c, &g).unwrap();
        assert_eq!(c.active(), &[4, 6]);
    }

    #[test]
    fn corrupted_configurations_are_not_proper() {
        let g = random_graph(30, 0.2, 1);
        let mut c =
            new_exploration(&g, 1, TruncationSequence::untruncated(), Parity::None).unwrap();
        step(&mut c, &g).unwrap();
        step(&mut c, &g).unwrap();
        assert!(is_proper(&c));
        let v = c.active()[0];
        let mut two_roots = c.clone();
        two_roots.parent[v as usize] = 0;
        assert!(!is_proper(&two_roots));
        let mut veiled_child = c.clone();
        let w = (1..=30)
            .find(|&w| c.state(w) == VertexState::Veiled)
            .unwrap();
        veiled_child.parent[w as usize] = 1;
        assert!(!is_proper(&veiled_child));
        let mut cycle = c.clone();
        let p = cycle.parent[v as usize];
        cycle.parent[p as usize] = v;
        assert!(!is_proper(&cycle));
    }

    #[test]
    fn initial_phase_then_restart() {
        let g = random_graph(200, 0.03, 4);
        let main = TruncationSequence::constant(50);
        let mut c = new_exploration(&g, 1, main, Parity::None).unwrap();
        let ip = InitialPhase {
            s0: 3.0,
            max_steps: 20,
            restart: true,
        };
        let r = run_phases(&mut c, &g, 1e9, 50, Some(ip)).unwrap();
        assert!(r.records[..=r.main_phase_start as usize]
            .iter()
            .skip(1)
            .all(|x| x.ell_k == Some(1)));
        assert!(r.records[r.main_phase_start as usize + 1..]
            .iter()
            .all(|x| x.ell_k == Some(50)));
        assert!(is_proper(&c));
    }

    fn check_bfs_agreement(g: &Graph, start: u32) {
        let mut bfs = BfsScratch::new(g.n());
        bfs.bfs_from(g, start);
        let mut c =
            new_exploration(g, start, TruncationSequence::untruncated(), Parity::None).unwrap();
        let mut k = 0u32;
        loop {
            for &v in c.active() {
                assert_eq!(bfs.dist(v), Some(k));
            }
            let expected = (1..=g.n()).filter(|&v| bfs.dist(v) == Some(k)).count();
            assert_eq!(c.active().len(), expected);
            assert!(is_proper(&c));
            if c.active().is_empty() {
                break;
            }
            let h = c.score_h();
            step(&mut c, g).unwrap();
            let fresh: f64 = c
                .active()
                .iter()
                .map(|&v| xi(v as u64, g.n() as u64).unwrap())
                .sum();
            assert!((c.score_h() - h - fresh).abs() <= 1e-9 * c.score_h());
            k += 1;
        }
    }

    #[test]
    fn generation_equals_bfs_distance() {
        for seed in 0..20 {
            let n = 50 + (seed as u32 * 37) % 400;
            let g = random_graph(n, 2.5 / n as f64, seed);
            assert!(bfs_agreement(&g, 1 + (seed as u32 * 13) % n).unwrap().ok());
            check_bfs_agreement(&g, 1 + (seed as u32 * 13) % n);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn truncation_is_monotone(seed in 0u64..1000, cut in 1u64..60, extra in 0u64..40) {
            let g = random_graph(60, 0.06, seed);
            let run = |level: u64| {
                let mut c = new_exploration(&g, 30, TruncationSequence::constant(level), Parity::None).unwrap();
                let mut seen = vec![vec![30u32]];
                while !c.active().is_empty() && c.generation() < 70 {
                    step(&mut c, &g).unwrap();
                    let mut all = seen.last().unwrap().clone();
                    all.extend_from_slice(c.active());
                    all.sort_unstable();
                    seen.push(all);
                }
                seen
            };
            let loose = run(cut);
            let tight = run(cut + extra);
            for (k, t) in tight.iter().enumerate() {
                let l = &loose[k.min(loose.len() - 1)];
                prop_assert!(t.iter().all(|v| l.binary_search(v).is_ok()));
            }
        }

        #[test]
        fn proper_after_every_step(seed in 0u64..1000, p in 0.01f64..0.3, parity in 0u8..3) {
            let g = random_graph(40, p, seed);
            let parity = [Parity::None, Parity::Odd, Parity::Even][parity as usize];
            let trunc = TruncationSequence::constant(1 + seed % 20);
            let mut c = new_exploration(&g, 1 + (seed % 40) as u32, trunc, parity).unwrap();
            prop_assert!(is_proper(&c));
            while !c.active().is_empty() {
                step(&mut c, &g).unwrap();
                prop_assert!(is_proper(&c));
                let s: f64 = c.active().iter().map(|&v| xi(v as u64, 40).unwrap()).sum();
                prop_assert!((s - c.score_s()).abs() <= 1e-9 * s.max(1.0));
            }
        }
    }
}
