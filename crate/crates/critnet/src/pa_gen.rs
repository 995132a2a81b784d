//! Sublinear preferential attachment graphs.
//!
//! Vertex n connects to each older vertex m independently with probability
//! f(Z[m,n−1])/(n−1) ∧ 1, where Z[m,k] counts the neighbors of m with labels
//! in (m, k]. The fast generator follows each older vertex m along time and
//! jumps directly to its next attachment by inverting the closed-form no-jump
//! probability.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{self, domain, Stream};
use crate::rules::AttachmentRule;
use crate::special;

/// Indegree of `vertex` at `current_time`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeState {
    pub vertex: u64,
    pub indegree: u64,
    pub current_time: u64,
}

/// ∏_{i=a}^{b−1} (1 − c/i) for 0 ≤ c < a ≤ b.
pub fn no_jump_prob(c: f64, a: u64, b: u64) -> Result<f64> {
    if !(c >= 0.0) || c >= a as f64 || a > b {
        return Err(Error::Domain(format!(
            "no_jump_prob requires 0 <= c < a <= b, got c={c}, a={a}, b={b}"
        )));
    }
    Ok(special::ln_no_jump(c, a, b).exp())
}

/// Label of the next vertex that attaches to `state.vertex`, given the uniform
/// `u` ∈ (0,1]: the smallest n′ ∈ (t, horizon] with ∏_{i=t}^{n′−1}(1 − f(z)/i) < u,
/// where t is the current time. None if no vertex up to `horizon` attaches.
pub fn next_jump_time(
    state: &DegreeState,
    rule: &AttachmentRule,
    u: f64,
    horizon: u64,
) -> Result<Option<u64>> {
    let c = rule.evaluate(state.indegree)?;
    let t = state.current_time;
    if c >= t as f64 {
        return Err(Error::PerStepRegime { c, t });
    }
    if t >= horizon {
        return Ok(None);
    }
    Ok(jump_search(c, t, u.ln(), horizon))
}

fn jump_search(c: f64, t: u64, ln_u: f64, horizon: u64) -> Option<u64> {
    let jumped = |b: u64| special::ln_no_jump(c, t, b) < ln_u;
    if !jumped(horizon) {
        return None;
    }
    // exponential bracket: lo has not jumped, hi has
    let mut lo = t;
    let mut step = 1u64;
    let mut hi = (t + step).min(horizon);
    while hi < horizon && !jumped(hi) {
        lo = hi;
        step *= 2;
        hi = (t + step).min(horizon);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if jumped(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Runs the indegree chain of vertex m from (time m, indegree start_k) up to
/// `horizon`, calling `on_jump(n)` for every attaching vertex n.
fn run_chain(
    m: u64,
    start_k: u64,
    horizon: u64,
    rule: &AttachmentRule,
    rng: &mut Stream,
    mut on_jump: impl FnMut(u64),
) -> Result<u64> {
    let mut z = start_k;
    let mut t = m;
    while t < horizon {
        let c = rule.evaluate(z)?;
        if c >= t as f64 {
            // ∧1 regime: one trial per step
            let u = rng::open_unit(rng);
            t += 1;
            if u <= (c / (t - 1) as f64).min(1.0) {
                z += 1;
                on_jump(t);
            }
            continue;
        }
        let u = rng::open_unit(rng);
        match jump_search(c, t, u.ln(), horizon) {
            Some(n) => {
                t = n;
                z += 1;
                on_jump(n);
            }
            None => break,
        }
    }
    Ok(z)
}

/// The preferential attachment graph on [N].
///
/// Each older vertex uses its own substream, so the result does not depend on
/// how the work is scheduled.
pub fn generate(n: u32, rule: &AttachmentRule, seed: u64) -> Result<Graph> {
    let lists: Vec<Vec<u32>> = (1..n)
        .into_par_iter()
        .map(|m| {
            let mut rng = rng::substream(seed, domain::PA_EDGES, m as u64);
            let mut out = Vec::new();
            run_chain(m as u64, 0, n as u64, rule, &mut rng, |t| {
                out.push(t as u32)
            })?;
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let edges: Vec<(u32, u32)> = lists
        .iter()
        .enumerate()
        .flat_map(|(i, l)| l.iter().map(move |&w| (i as u32 + 1, w)))
        .collect();
    Graph::from_edges(n, &edges)
}

pub const REFERENCE_LIMIT: u64 = 10_000;

/// The literal O(N²) construction: for each new vertex n and each older m,
/// one uniform U(m,n) decides the edge. U(m,n) is draw n−m−1 of the substream
/// of m, so rules share randomness when run with the same seed.
pub fn reference_generate(n: u32, rule: &AttachmentRule, seed: u64) -> Result<Graph> {
    if n as u64 > REFERENCE_LIMIT {
        return Err(Error::TooLarge {
            n: n as u64,
            limit: REFERENCE_LIMIT,
        });
    }
    let mut streams: Vec<Stream> = (0..=n as u64)
        .map(|m| rng::substream(seed, domain::PA_REFERENCE, m))
        .collect();
    let mut z = vec![0u64; n as usize + 1];
    let mut edges = Vec::new();
    for new in 2..=n {
        let t = (new - 1) as f64;
        for m in 1..new {
            let p = (rule.evaluate(z[m as usize])? / t).min(1.0);
            let u: f64 = streams[m as usize].random();
            if u < p {
                z[m as usize] += 1;
                edges.push((m, new));
            }
        }
    }
    edges.sort_unstable();
    Graph::from_edges(n, &edges)
}

/// One trajectory of Z[m,·] started from indegree `start_k` at time m:
/// the initial point followed by (time, indegree) after every jump.
pub fn simulate_evolution(
    m: u64,
    start_k: u64,
    to: u64,
    rule: &AttachmentRule,
    seed: u64,
) -> Result<Vec<(u64, u64)>> {
    let mut rng = rng::substream(seed, domain::EVOLUTION, m);
    simulate_evolution_with(m, start_k, to, rule, &mut rng)
}

pub fn simulate_evolution_with(
    m: u64,
    start_k: u64,
    to: u64,
    rule: &AttachmentRule,
    rng: &mut Stream,
) -> Result<Vec<(u64, u64)>> {
    if m == 0 || to < m {
        return Err(Error::InvalidParameter(format!(
            "simulate_evolution needs 1 <= m <= to, got m={m}, to={to}"
        )));
    }
    let mut path = vec![(m, start_k)];
    let mut z = start_k;
    run_chain(m, start_k, to, rule, rng, |t| {
        z += 1;
        path.push((t, z));
    })?;
    Ok(path)
}

/// Z[m, to] only.
pub fn final_indegree(
    m: u64,
    start_k: u64,
    to: u64,
    rule: &AttachmentRule,
    rng: &mut Stream,
) -> Result<u64> {
    run_chain(m, start_k, to, rule, rng, |_| {})
}
