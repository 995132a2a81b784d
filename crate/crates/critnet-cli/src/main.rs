//! `critnet`: generate critical scale-free networks, measure distances,
//! run explorations, verify diagnostics and sweep parameter grids.

mod verify;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use critnet::experiments::{
    ratio_test, sample_giant_pairs, typical_distance_study, ExperimentConfig, ExperimentReport,
    ModelSpec, Status,
};
use critnet::exploration::{new_exploration, run_phases, InitialPhase, Parity};
use critnet::graph::{from_edge_list, save_edge_list};
use critnet::nr_gen::{self, WeightDistribution};
use critnet::rules::{truncation_sequence, TruncationSequence};
use critnet::{pa_gen, AttachmentRule, Error};

const VERSION: &str = env!("CARGO_PKG_VERSION");
const SWEEP_SCHEMA: &str = "critnet-sweep/1";

#[derive(Parser, Debug)]
#[command(
    name = "critnet",
    version,
    about = "Critical scale-free random networks: generation, distances, diagnostics"
)]
struct Cli {
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, env = "CRITNET_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph and write it as an edge list with a JSON sidecar.
    Generate(GenerateArgs),
    /// Sample uniform pairs in the largest component and record their distances.
    Measure(MeasureArgs),
    /// Run a (truncated) exploration from one vertex and write its generations.
    Explore(ExploreArgs),
    /// Run diagnostic suites; exit 3 if any check fails.
    Verify(VerifyArgs),
    /// Typical-distance sweep over a grid for both models.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    Pa,
    Nr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RuleKind {
    Critical,
    Affine,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: Model,
    #[arg(long)]
    n: u32,
    /// Critical exponent (critical PA rule, or NR weight law); default 1.
    #[arg(long)]
    alpha: Option<f64>,
    /// Attachment offset f(0) (PA only); default 1.
    #[arg(long)]
    beta: Option<f64>,
    /// Attachment rule family (PA only).
    #[arg(long, value_enum)]
    rule: Option<RuleKind>,
    /// Slope of the affine rule (PA with --rule affine).
    #[arg(long)]
    gamma: Option<f64>,
    /// Minimal weight (NR only); default 1.
    #[arg(long)]
    w_min: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    pairs: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ParityArg {
    None,
    Odd,
    Even,
}

#[derive(Args, Debug)]
struct ExploreArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    start: u32,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 100.0)]
    s0: f64,
    #[arg(long, default_value_t = 0.25)]
    delta0: f64,
    #[arg(long, default_value_t = 0.25)]
    kappa: f64,
    /// Score target; default √N/(log N)^{α+1}.
    #[arg(long)]
    target: Option<f64>,
    #[arg(long, default_value_t = 256)]
    max_steps: u64,
    /// Explore without truncation.
    #[arg(long)]
    untruncated: bool,
    /// Open with an untruncated phase until ξ(A) ≥ s0·ξ(min A).
    #[arg(long)]
    initial: bool,
    #[arg(long, value_enum, default_value_t = ParityArg::None)]
    parity: ParityArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = verify::Suite::All)]
    suite: verify::Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Sweep configuration file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    schema: String,
    alpha: f64,
    #[serde(default = "one")]
    beta: f64,
    #[serde(default = "one")]
    w_min: f64,
    n_grid: Vec<u32>,
    pairs_per_graph: u32,
    seeds: Vec<u64>,
}

fn one() -> f64 {
    1.0
}

enum Failure {
    Io(String),
    Usage(String),
    Verification(usize),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Parse { .. } | Error::Json(_) => Failure::Io(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// SHA-256 of the canonical (key-sorted, compact) JSON of `config`.
fn config_hash(config: &Value) -> String {
    sha256_hex(
        serde_json::to_string(config)
            .expect("json value serializes")
            .as_bytes(),
    )
}

fn write_json(path: &Path, v: &Value) -> Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    std::fs::write(path, s).map_err(|e| io_err(path, e))
}

fn read_graph(path: &Path) -> Result<(critnet::Graph, String), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let g = from_edge_list(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    Ok((g, sha256_hex(text.as_bytes())))
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let usage = |m: &str| Err(Failure::Usage(m.to_string()));
    let alpha = a.alpha.unwrap_or(1.0);
    let mut config = match a.model {
        Model::Pa => {
            if a.w_min.is_some() {
                return usage("--w-min applies to --model nr only");
            }
            let rule = match a.rule.unwrap_or(RuleKind::Critical) {
                RuleKind::Critical => {
                    if a.gamma.is_some() {
                        return usage("--gamma requires --rule affine");
                    }
                    AttachmentRule::critical(alpha, a.beta.unwrap_or(1.0))?
                }
                RuleKind::Affine => {
                    if a.alpha.is_some() {
                        return usage("--alpha does not apply to --rule affine");
                    }
                    let Some(gamma) = a.gamma else {
                        return usage("--rule affine requires --gamma");
                    };
                    AttachmentRule::affine(gamma, a.beta.unwrap_or(1.0))?
                }
            };
            let g = pa_gen::generate(a.n, &rule, a.seed)?;
            save_edge_list(&g, &a.out).map_err(|e| io_err(&a.out, e))?;
            json!({ "model": "pa", "N": a.n, "rule": rule, "E": g.n_edges() })
        }
        Model::Nr => {
            if a.beta.is_some() || a.rule.is_some() || a.gamma.is_some() {
                return usage("--beta, --rule and --gamma apply to --model pa only");
            }
            let dist = WeightDistribution::new(alpha, a.w_min.unwrap_or(1.0))?;
            let (g, ws) = nr_gen::generate_nr(a.n, &dist, a.seed)?;
            save_edge_list(&g, &a.out).map_err(|e| io_err(&a.out, e))?;
            let wpath = with_suffix(&a.out, ".weights");
            nr_gen::save_weights(&ws, &wpath).map_err(|e| io_err(&wpath, e))?;
            json!({
                "model": "nr",
                "N": a.n,
                "alpha": dist.alpha,
                "w_min": dist.w_min,
                "norm_c": dist.norm_c,
                "E": g.n_edges(),
                "weights": wpath.file_name().map(|f| f.to_string_lossy().into_owned()),
            })
        }
    };
    let hash = config_hash(&json!({ "command": "generate", "params": config.clone() }));
    let obj = config.as_object_mut().expect("object");
    obj.insert("seed".into(), json!(a.seed));
    obj.insert("version".into(), json!(VERSION));
    obj.insert("config_hash".into(), json!(hash));
    write_json(&with_suffix(&a.out, ".json"), &config)
}

fn measure(a: MeasureArgs) -> Result<(), Failure> {
    let (g, input_sha) = read_graph(&a.input)?;
    let mut csv = String::from("u,v,d\n");
    let pairs = sample_giant_pairs(&g, a.pairs, a.seed);
    let sampled = match &pairs {
        Some(p) => {
            for (u, v, d) in p {
                let _ = writeln!(csv, "{u},{v},{d}");
            }
            p.len()
        }
        None => {
            eprintln!("warning: largest component has fewer than two vertices; no pairs sampled");
            0
        }
    };
    std::fs::write(&a.out, csv).map_err(|e| io_err(&a.out, e))?;
    let hash =
        config_hash(&json!({ "command": "measure", "input_sha256": input_sha, "pairs": a.pairs }));
    write_json(
        &with_suffix(&a.out, ".json"),
        &json!({
            "command": "measure",
            "input_sha256": input_sha,
            "N": g.n(),
            "pairs": a.pairs,
            "sampled": sampled,
            "seed": a.seed,
            "version": VERSION,
            "config_hash": hash,
        }),
    )
}

fn explore(a: ExploreArgs) -> Result<(), Failure> {
    let (g, input_sha) = read_graph(&a.input)?;
    let n = g.n();
    let trunc = if a.untruncated {
        TruncationSequence::untruncated()
    } else {
        truncation_sequence(n as u64, a.s0, a.delta0, a.kappa, a.alpha)?
    };
    let parity = match a.parity {
        ParityArg::None => Parity::None,
        ParityArg::Odd => Parity::Odd,
        ParityArg::Even => Parity::Even,
    };
    let target = a
        .target
        .unwrap_or_else(|| (n as f64).sqrt() / (n as f64).ln().powf(a.alpha + 1.0));
    let mut cfg = new_exploration(&g, a.start, trunc, parity)?;
    let initial = a.initial.then_some(InitialPhase {
        s0: a.s0,
        max_steps: a.max_steps,
        restart: true,
    });
    let report = run_phases(&mut cfg, &g, target, a.max_steps, initial)?;
    std::fs::write(&a.out, report.to_csv()).map_err(|e| io_err(&a.out, e))?;
    let params = json!({
        "input_sha256": input_sha,
        "start": a.start,
        "alpha": a.alpha,
        "s0": a.s0,
        "delta0": a.delta0,
        "kappa": a.kappa,
        "target": target,
        "max_steps": a.max_steps,
        "untruncated": a.untruncated,
        "initial": a.initial,
        "parity": format!("{:?}", a.parity).to_lowercase(),
    });
    let hash = config_hash(&json!({ "command": "explore", "params": params.clone() }));
    write_json(
        &with_suffix(&a.out, ".json"),
        &json!({
            "command": "explore",
            "params": params,
            "status": report.status,
            "main_phase_start": report.main_phase_start,
            "version": VERSION,
            "config_hash": hash,
        }),
    )
}

fn run_verify(a: VerifyArgs) -> Result<(), Failure> {
    let diags = verify::run(a.suite, a.seed)?;
    for d in &diags {
        println!("{}", d.line());
    }
    let count = |s: Status| diags.iter().filter(|d| d.status == s).count();
    let failed = count(Status::Fail);
    println!(
        "SUMMARY pass={} fail={failed} skip={} flag={} seed={} version={VERSION}",
        count(Status::Pass),
        count(Status::Skipped),
        count(Status::Flagged),
        a.seed
    );
    if failed > 0 {
        return Err(Failure::Verification(failed));
    }
    Ok(())
}

fn load_sweep_config(path: &Path) -> Result<SweepConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let cfg: SweepConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: schema violation: {e}", path.display())))?;
    let mut bad = Vec::new();
    if cfg.schema != SWEEP_SCHEMA {
        bad.push(format!(
            "schema: expected {SWEEP_SCHEMA:?}, got {:?}",
            cfg.schema
        ));
    }
    if !(cfg.alpha >= 0.0 && cfg.alpha.is_finite()) {
        bad.push("alpha: must be finite and >= 0".to_string());
    }
    if !(cfg.beta > 0.0 && cfg.beta.is_finite()) {
        bad.push("beta: must be finite and > 0".to_string());
    }
    if !(cfg.w_min >= 1.0 && cfg.w_min.is_finite()) {
        bad.push("w_min: must be finite and >= 1".to_string());
    }
    if cfg.n_grid.is_empty() {
        bad.push("n_grid: must not be empty".to_string());
    } else if cfg.n_grid.windows(2).any(|w| w[0] >= w[1]) || cfg.n_grid[0] < 2 {
        bad.push("n_grid: must be strictly ascending with entries >= 2".to_string());
    }
    if cfg.pairs_per_graph < 1 {
        bad.push("pairs_per_graph: must be >= 1".to_string());
    }
    if cfg.seeds.is_empty() {
        bad.push("seeds: must not be empty".to_string());
    }
    if !bad.is_empty() {
        return Err(Failure::Usage(format!(
            "{}: schema violation: {}",
            path.display(),
            bad.join("; ")
        )));
    }
    Ok(cfg)
}

fn model_summary(r: &ExperimentReport) -> Value {
    json!({
        "c_hat": r.fit.as_ref().map(|f| f.c_hat),
        "ci": r.fit.as_ref().map(|f| f.ci),
        "fit": r.fit,
        "means": r.means(),
        "diagnostics": r.diagnostics,
    })
}

fn sweep(a: SweepArgs) -> Result<(), Failure> {
    let cfg = load_sweep_config(&a.config)?;
    let rule = AttachmentRule::critical(cfg.alpha, cfg.beta)?;
    let dist = WeightDistribution::new(cfg.alpha, cfg.w_min)?;
    std::fs::create_dir_all(&a.out).map_err(|e| io_err(&a.out, e))?;
    let mut reports = Vec::new();
    for model in [ModelSpec::Pa { rule }, ModelSpec::Nr { dist }] {
        let ec = ExperimentConfig {
            model,
            n_grid: cfg.n_grid.clone(),
            pairs_per_graph: cfg.pairs_per_graph,
            seeds: cfg.seeds.clone(),
        };
        let r = typical_distance_study(&ec)?;
        for &n in &cfg.n_grid {
            for &seed in &cfg.seeds {
                let mut csv = String::from("u,v,d\n");
                for s in r.samples.iter().filter(|s| s.n == n && s.seed == seed) {
                    let _ = writeln!(csv, "{},{},{}", s.u, s.v, s.d);
                }
                let path = a
                    .out
                    .join(format!("{}_N{n}_seed{seed}.csv", ec.model.name()));
                std::fs::write(&path, csv).map_err(|e| io_err(&path, e))?;
            }
        }
        reports.push(r);
    }
    let (pa, nr) = (&reports[0], &reports[1]);
    let test = match (&pa.fit, &nr.fit) {
        (Some(x), Some(y)) => Some(ratio_test(x, y)),
        _ => None,
    };
    let cfg_value = serde_json::to_value(&cfg).expect("config serializes");
    let summary = json!({
        "schema": SWEEP_SCHEMA,
        "config": cfg_value,
        "config_hash": config_hash(&cfg_value),
        "version": VERSION,
        "seeds": cfg.seeds,
        "pa": model_summary(pa),
        "nr": model_summary(nr),
        "ratio": test.as_ref().map(|t| t.ratio),
        "ratio_test": test,
    });
    write_json(&a.out.join("summary.json"), &summary)?;
    let fmt = |x: Option<f64>| x.map_or("none".to_string(), |v| v.to_string());
    println!(
        "sweep pa_c_hat={} nr_c_hat={} ratio={} p_one_sided={}",
        fmt(pa.fit.as_ref().map(|f| f.c_hat)),
        fmt(nr.fit.as_ref().map(|f| f.c_hat)),
        fmt(test.as_ref().map(|t| t.ratio)),
        fmt(test.as_ref().map(|t| t.p_one_sided)),
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Measure(a) => measure(a),
        Command::Explore(a) => explore(a),
        Command::Verify(a) => run_verify(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Io(m) | Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Verification(k) => eprintln!("error: {k} check(s) failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
