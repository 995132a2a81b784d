//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng;

use critnet::experiments::{
    core_study, degree_law_check, distance_scale, ell_decay_check, exploration_bfs_check,
    logsum_random_check, martingale_check, nr_oracle_check, pa_exact_law_check, pa_oracle_check,
    ratio_test, tail_exponent_check, typical_distance_study, xi_sandwich_check, CoreInput,
    CoreParams, ExperimentConfig, ModelSpec,
};
use critnet::exploration::{new_exploration, run_phases, ExplorationStatus, InitialPhase, Parity};
use critnet::graph::components;
use critnet::nr_gen::WeightDistribution;
use critnet::rng::{self, domain};
use critnet::rules::truncation_sequence;
use critnet::{pa_gen, stats, AttachmentRule, Graph};

const SEED: u64 = 20_251_015;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn crit(alpha: f64) -> AttachmentRule {
    AttachmentRule::critical(alpha, 1.0).unwrap()
}

fn affine() -> AttachmentRule {
    AttachmentRule::affine(0.5, 0.5).unwrap()
}

fn c1_martingales() -> Outcome {
    let grid: Vec<u64> = (1..=6).map(|e| 10u64.pow(e)).collect();
    let diags = martingale_check(&affine(), &crit(1.0), 10_000, &grid).unwrap();
    let detail = diags
        .iter()
        .map(|d| d.line())
        .collect::<Vec<_>>()
        .join(" | ");
    outcome(diags.iter().all(|d| d.passed()), detail)
}

fn c2_xi_sandwich() -> Outcome {
    let d = xi_sandwich_check(1_000_000, 1000).unwrap();
    outcome(d.passed(), d.line())
}

fn c3_degree_law() -> Outcome {
    let rule = crit(1.0);
    let ps: Vec<f64> = (0..20)
        .map(|s| {
            let g = pa_gen::generate(100_000, &rule, rng::derive_seed(SEED, s)).unwrap();
            degree_law_check(&g, &rule)
                .unwrap()
                .indegree_p
                .unwrap_or(0.0)
        })
        .collect();
    let median_p = stats::median(&ps);
    let aff: Vec<Graph> = (0..20)
        .map(|s| pa_gen::generate(100_000, &affine(), rng::derive_seed(SEED, 100 + s)).unwrap())
        .collect();
    let tail = tail_exponent_check(&aff.iter().collect::<Vec<_>>(), 0.0);
    outcome(
        median_p > 0.01 && tail.passed(),
        format!("median_indegree_p={median_p:.4} {}", tail.line()),
    )
}

fn c4_oracles() -> Outcome {
    let mut diags = pa_oracle_check(300, &crit(1.0), SEED, 500).unwrap();
    diags.extend(
        nr_oracle_check(300, &WeightDistribution::new(1.0, 1.0).unwrap(), SEED, 500).unwrap(),
    );
    let detail = diags
        .iter()
        .map(|d| d.line())
        .collect::<Vec<_>>()
        .join(" | ");
    // informational only: both PA generators against the exact indegree law
    let exact = pa_exact_law_check(300, &crit(1.0), SEED, 2000)
        .unwrap()
        .iter()
        .map(|d| d.line())
        .collect::<Vec<_>>()
        .join(" | ");
    outcome(
        diags.iter().all(|d| d.passed()),
        format!("{detail} | info: {exact}"),
    )
}

fn c5_exploration_bfs() -> Outcome {
    let d = exploration_bfs_check(100, SEED).unwrap();
    outcome(d.passed(), d.line())
}

fn c6_ell_decay() -> Outcome {
    let diags: Vec<_> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&a| ell_decay_check(1_000_000, a, 100.0, 0.25, 0.25, 1.0).unwrap())
        .collect();
    let detail = diags
        .iter()
        .map(|d| d.line())
        .collect::<Vec<_>>()
        .join(" | ");
    outcome(diags.iter().all(|d| d.passed()), detail)
}

fn c7_logsum() -> Outcome {
    let d = logsum_random_check(100, SEED).unwrap();
    outcome(d.passed(), d.line())
}

fn c8_core() -> Outcome {
    let rule = crit(1.0);
    let mut good = 0;
    let mut sizes = Vec::new();
    let mut diams = Vec::new();
    for s in 0..20 {
        let g = pa_gen::generate(100_000, &rule, rng::derive_seed(SEED, 200 + s)).unwrap();
        let p = CoreParams::new(1.0, rng::derive_seed(SEED, 300 + s));
        let r = core_study(&g, CoreInput::Pa(&rule), &p).unwrap();
        let ok = r.size_ok(0.1) && r.diameter.is_some_and(|d| d <= 6);
        good += ok as u32;
        sizes.push(format!("{:.3}", r.size_ratio));
        diams.push(r.diameter.map_or("inf".to_string(), |d| d.to_string()));
    }
    let m = CoreParams::new(1.0, 0).m_n(100_000);
    outcome(
        good >= 18,
        format!(
            "M_N={m} good={good}/20 gate=18/20(engineering) size_ratios=[{}] diameters=[{}]",
            sizes.join(","),
            diams.join(",")
        ),
    )
}

fn c9_distance_ordering() -> Outcome {
    let mut ratios = Vec::new();
    let mut detail = Vec::new();
    let mut alpha_one = false;
    for alpha in [0.5, 1.0, 2.0] {
        let base = ExperimentConfig {
            model: ModelSpec::Pa { rule: crit(alpha) },
            n_grid: vec![10_000, 30_000, 100_000, 300_000],
            pairs_per_graph: 200,
            seeds: (0..10).map(|s| SEED + s).collect(),
        };
        let nr = ExperimentConfig {
            model: ModelSpec::Nr {
                dist: WeightDistribution::new(alpha, 1.0).unwrap(),
            },
            ..base.clone()
        };
        let (rp, rn) = (
            typical_distance_study(&base).unwrap(),
            typical_distance_study(&nr).unwrap(),
        );
        let (Some(fp), Some(fnr)) = (rp.fit, rn.fit) else {
            return outcome(false, format!("alpha={alpha}: degenerate fit"));
        };
        let t = ratio_test(&fp, &fnr);
        if alpha == 1.0 {
            alpha_one = t.p_one_sided < 0.05 && (1.1..=2.0).contains(&t.ratio);
        }
        detail.push(format!(
            "alpha={alpha} c_pa={:.4} c_nr={:.4} ratio={:.4} p={:.4}",
            fp.c_hat, fnr.c_hat, t.ratio, t.p_one_sided
        ));
        ratios.push(t.ratio);
    }
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    outcome(
        alpha_one && increasing,
        format!("{} increasing={increasing}", detail.join(" ")),
    )
}

fn c10_score_growth() -> Outcome {
    let n = 100_000u32;
    let alpha = 1.0;
    let nf = n as f64;
    let target = nf.sqrt() / nf.ln().powf(alpha + 1.0);
    let budget = ((1.0 / (2.0 * alpha + 2.0) + 0.1) * distance_scale(nf)).ceil() as u64;
    let rule = crit(alpha);
    let trunc = truncation_sequence(n as u64, 100.0, 0.25, 0.25, alpha).unwrap();
    let (mut successful, mut reached) = (0, 0);
    let mut totals = Vec::new();
    for s in 0..20 {
        let g = pa_gen::generate(n, &rule, rng::derive_seed(SEED, 400 + s)).unwrap();
        let comps = components(&g);
        let giant = comps.members(comps.largest);
        let start = giant[rng::substream(SEED + s, domain::STARTS, 0).random_range(0..giant.len())];
        let mut cfg = new_exploration(&g, start, trunc.clone(), Parity::None).unwrap();
        let ip = InitialPhase {
            s0: 100.0,
            max_steps: 64,
            restart: true,
        };
        let r = run_phases(&mut cfg, &g, target, 256, Some(ip)).unwrap();
        if r.status == ExplorationStatus::DiedOut {
            totals.push("died".to_string());
            continue;
        }
        successful += 1;
        if r.status == ExplorationStatus::ScoreTargetReached && r.main_phase_steps() <= budget {
            reached += 1;
        }
        totals.push(format!("{}+{}", r.main_phase_start, r.main_phase_steps()));
    }
    let frac = reached as f64 / successful.max(1) as f64;
    outcome(
        successful > 0 && frac >= 0.8,
        format!(
            "target={target:.4} budget={budget} successful={successful} reached={reached} fraction={frac:.3} gate=0.8(engineering) initial+main=[{}]",
            totals.join(",")
        ),
    )
}

fn run_cli(dir: &Path, threads: &str, args: &[&str]) -> (bool, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_critnet"))
        .current_dir(dir)
        .env_remove("CRITNET_THREADS")
        .arg("--threads")
        .arg(threads)
        .args(args)
        .output()
        .expect("run critnet");
    (out.status.success(), out.stdout)
}

/// Runs every randomized command in a fresh directory and returns the bytes
/// of all outputs, in a fixed order.
fn cli_outputs(threads: &str) -> Result<Vec<(String, Vec<u8>)>, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    std::fs::write(
        d.join("sweep.json"),
        r#"{"schema":"critnet-sweep/1","alpha":1.0,"n_grid":[3000,10000],"pairs_per_graph":50,"seeds":[1,2]}"#,
    )
    .map_err(|e| e.to_string())?;
    let steps: [&[&str]; 6] = [
        &[
            "generate", "--model", "pa", "--n", "100000", "--seed", "7", "--out", "pa.txt",
        ],
        &[
            "generate", "--model", "nr", "--n", "100000", "--seed", "7", "--out", "nr.txt",
        ],
        &[
            "measure", "--in", "pa.txt", "--pairs", "300", "--seed", "3", "--out", "m.csv",
        ],
        &[
            "explore",
            "--in",
            "nr.txt",
            "--start",
            "10",
            "--initial",
            "--out",
            "e.csv",
        ],
        &["sweep", "--config", "sweep.json", "--out", "sw"],
        &["verify", "--suite", "rules", "--seed", "5"],
    ];
    let mut out = Vec::new();
    for (i, args) in steps.iter().enumerate() {
        let (ok, stdout) = run_cli(d, threads, args);
        if !ok {
            return Err(format!("critnet {} failed", args.join(" ")));
        }
        out.push((format!("stdout#{i}"), stdout));
    }
    let mut files: Vec<_> = walk(d);
    files.sort();
    for f in files {
        let bytes = std::fs::read(&f).map_err(|e| e.to_string())?;
        out.push((f.strip_prefix(d).unwrap().display().to_string(), bytes));
    }
    Ok(out)
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut v = Vec::new();
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            v.extend(walk(&p));
        } else {
            v.push(p);
        }
    }
    v
}

fn c11_determinism() -> Outcome {
    let runs: Result<Vec<_>, String> = ["1", "1", "4", "0"]
        .iter()
        .map(|t| cli_outputs(t))
        .collect();
    let runs = match runs {
        Ok(r) => r,
        Err(e) => return outcome(false, e),
    };
    let first = &runs[0];
    let mut diffs = Vec::new();
    for (i, r) in runs.iter().enumerate().skip(1) {
        if r.len() != first.len() {
            diffs.push(format!("run{i}: file set differs"));
            continue;
        }
        for ((na, a), (nb, b)) in first.iter().zip(r) {
            if na != nb || a != b {
                diffs.push(format!("run{i}:{na}"));
            }
        }
    }
    outcome(
        diffs.is_empty(),
        format!(
            "runs=4 threads=[1,1,4,auto] artifacts={} mismatches=[{}]",
            first.len(),
            diffs.join(",")
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("martingale_identities", c1_martingales),
        ("xi_sandwich", c2_xi_sandwich),
        ("degree_law", c3_degree_law),
        ("generator_oracles", c4_oracles),
        ("exploration_equals_bfs", c5_exploration_bfs),
        ("ell_decay", c6_ell_decay),
        ("logsum_inequality", c7_logsum),
        ("core_size_and_diameter", c8_core),
        ("distance_ordering", c9_distance_ordering),
        ("score_growth", c10_score_growth),
        ("determinism", c11_determinism),
    ];
    let only: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let t = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {:>2} {name} [{:.1}s] {}",
            i + 1,
            t.elapsed().as_secs_f64(),
            o.detail
        );
        failed += !o.pass as u32;
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
