//! `lamn`: command-line front end for the lamn-core experiments.
//!
//! Each subcommand reads an optional JSON config, applies flag overrides,
//! writes JSON or CSV to `--out` (stdout by default) and prints a one-line
//! summary on stderr. Exit status is 0 on success, 1 for configuration
//! errors and 2 for numerical failures.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use lamn_core::bias_solver::{solve_beta0, Beta0Config};
use lamn_core::bound::minimax_bound;
use lamn_core::estimators::EstimatorSpec;
use lamn_core::limit_experiment::{limit_losses, LimitEstimator, LimitSampler, Prior};
use lamn_core::losses::LossSpec;
use lamn_core::mc_harness::{diagnose, run_risk, sweep, RiskConfig};
use lamn_core::mixing::{Expectation, MixingDensity};
use lamn_core::models::Model;
use lamn_core::rng::{domain, StreamFactory};
use lamn_core::stats::McEstimate;

const CSV_VERSION: &str = "lamn-csv v1";

#[derive(Parser, Debug)]
#[command(name = "lamn", version, about = "Asymmetric-loss LAMN experiments")]
struct Cli {
    /// JSON config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed, required by the stochastic subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for replicate loops.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve for the optimal correction at one information level.
    Beta0 {
        #[arg(long)]
        loss: Option<String>,
        #[arg(long)]
        w: Option<f64>,
    },
    /// Minimax lower bound under a mixing law.
    Bound {
        #[arg(long)]
        loss: Option<String>,
        #[arg(long)]
        mixing: Option<String>,
        /// Replace the loss's truncation level.
        #[arg(long)]
        truncation: Option<f64>,
    },
    /// Simulate paths and their local statistics.
    Simulate {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        theta0: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Local risks of the configured estimators.
    Risk(RiskArgs),
    /// Convergence diagnostics of the information and the normalised score.
    Diagnose {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        theta0: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Risks over the shift family k/4 times the optimal correction.
    Sweep(RiskArgs),
    /// Bayes risks in the Gaussian limit experiment.
    Limit {
        #[arg(long)]
        loss: Option<String>,
        #[arg(long)]
        mixing: Option<String>,
        /// Prior standard deviation.
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        reps: Option<usize>,
    },
}

#[derive(clap::Args, Debug)]
struct RiskArgs {
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    theta0: Option<f64>,
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    h_grid: Option<Vec<f64>>,
    #[arg(long)]
    center: Option<f64>,
    /// Keep an untruncated loss instead of capping it at 50.
    #[arg(long)]
    untruncated: bool,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Numerical(String),
}

impl From<lamn_core::Error> for Failure {
    fn from(e: lamn_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

/// A rendered result: the JSON document, CSV columns and rows, and the
/// summary line.
struct Output {
    json: Value,
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
    summary: String,
}

fn load_config(path: &Option<PathBuf>) -> Outcome<Map<String, Value>> {
    let Some(path) = path else { return Ok(Map::new()) };
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))? {
        Value::Object(map) => Ok(map),
        _ => Err(config_err("config must be a JSON object")),
    }
}

fn set<T: Into<Value>>(map: &mut Map<String, Value>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        map.insert(key.into(), v.into());
    }
}

fn field<'a>(map: &'a Map<String, Value>, key: &str) -> Outcome<&'a Value> {
    map.get(key).ok_or_else(|| config_err(format!("missing `{key}` (flag --{} or config field)", key.replace('_', "-"))))
}

fn f64_field(map: &Map<String, Value>, key: &str) -> Outcome<f64> {
    field(map, key)?.as_f64().ok_or_else(|| config_err(format!("`{key}` must be a number")))
}

fn usize_field(map: &Map<String, Value>, key: &str) -> Outcome<usize> {
    field(map, key)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| config_err(format!("`{key}` must be a non-negative integer")))
}

/// Accepts the inline form (`check:c1=4,c2=1`) or the JSON object form.
fn loss_field(map: &Map<String, Value>) -> Outcome<LossSpec> {
    match field(map, "loss")? {
        Value::String(s) => Ok(s.parse()?),
        v => serde_json::from_value(v.clone()).map_err(|e| config_err(format!("loss: {e}"))),
    }
}

fn mixing_field(map: &Map<String, Value>) -> Outcome<MixingDensity> {
    match field(map, "mixing")? {
        Value::String(s) => Ok(s.parse()?),
        v => serde_json::from_value(v.clone()).map_err(|e| config_err(format!("mixing: {e}"))),
    }
}

fn beta0_config(map: &Map<String, Value>) -> Outcome<Beta0Config> {
    let cfg: Beta0Config = match map.get("beta0_config") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| config_err(format!("beta0_config: {e}")))?,
        None => Beta0Config::default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// `{"model": "gw", "theta0": 2}` from either a model object or the
/// separate `model` and `theta0` fields.
fn model_field(map: &Map<String, Value>) -> Outcome<Model> {
    match field(map, "model")? {
        Value::String(name) => {
            let theta0 = f64_field(map, "theta0")?;
            serde_json::from_value(json!({ "model": name, "theta0": theta0 }))
                .map_err(|e| config_err(format!("model: {e}")))
        }
        v => serde_json::from_value(v.clone()).map_err(|e| config_err(format!("model: {e}"))),
    }
}

fn require_seed(seed: Option<u64>) -> Outcome<u64> {
    seed.ok_or_else(|| config_err("--seed is required for this subcommand"))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialise")
}

fn bound_json(e: Expectation) -> (Value, bool) {
    match e {
        Expectation::Finite(v) => (json!(v), false),
        Expectation::Divergent => (Value::Null, true),
    }
}

fn run_beta0(map: Map<String, Value>) -> Outcome<Output> {
    let loss = loss_field(&map)?;
    let w = f64_field(&map, "w")?;
    let cfg = beta0_config(&map)?;
    let r = solve_beta0(&loss, w, &cfg)?;
    if !r.converged {
        return Err(Failure::Numerical(format!(
            "beta0 solver stopped on its bracket boundary at {} (half-width {})",
            r.beta0, cfg.bracket_halfwidth
        )));
    }
    Ok(Output {
        json: json!({
            "config": { "loss": to_value(&loss), "w": w, "beta0_config": to_value(&cfg) },
            "beta0": r.beta0,
            "h_min": r.h_min,
            "iterations": r.iterations,
            "converged": r.converged,
        }),
        columns: &["loss", "w", "beta0", "h_min", "iterations", "converged"],
        rows: vec![vec![
            loss.to_string(),
            w.to_string(),
            r.beta0.to_string(),
            r.h_min.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
        ]],
        summary: format!("beta0 = {} (h_min = {}) for {loss} at w = {w}", r.beta0, r.h_min),
    })
}

fn run_bound(map: Map<String, Value>) -> Outcome<Output> {
    let mut loss = loss_field(&map)?;
    if let Some(v) = map.get("truncation") {
        let a = v.as_f64().ok_or_else(|| config_err("`truncation` must be a number"))?;
        loss = loss.truncated(a)?;
    }
    let g = mixing_field(&map)?;
    let cfg = beta0_config(&map)?;
    let (bound, divergent) = bound_json(minimax_bound(&loss, &g, &cfg)?);
    let summary = if divergent {
        format!("bound for {loss} under {g} diverges")
    } else {
        format!("bound for {loss} under {g} = {bound}")
    };
    Ok(Output {
        json: json!({
            "config": { "loss": to_value(&loss), "mixing": to_value(&g), "beta0_config": to_value(&cfg) },
            "bound": bound,
            "divergent": divergent,
        }),
        columns: &["loss", "mixing", "bound", "divergent"],
        rows: vec![vec![loss.to_string(), g.to_string(), bound.to_string(), divergent.to_string()]],
        summary,
    })
}

fn run_simulate(map: Map<String, Value>, seed: u64) -> Outcome<Output> {
    let model = model_field(&map)?;
    let n = usize_field(&map, "n")?;
    let reps = map.get("reps").map(|_| usize_field(&map, "reps")).transpose()?.unwrap_or(1);
    let streams = StreamFactory::new(seed);
    let mut paths = Vec::with_capacity(reps);
    let mut rows = Vec::new();
    for i in 0..reps {
        let traj = model.simulate(n, &mut streams.stream(domain::SIMULATE, i as u64))?;
        let stats = model.local_stats(&traj).map(|s| to_value(&s)).unwrap_or(Value::Null);
        for (j, x) in traj.values().iter().enumerate() {
            rows.push(vec![i.to_string(), j.to_string(), x.to_string()]);
        }
        paths.push(json!({ "replicate": i, "path": to_value(&traj), "stats": stats }));
    }
    Ok(Output {
        json: json!({
            "config": { "model": to_value(&model), "n": n, "reps": reps, "seed": seed },
            "seed": seed,
            "paths": paths,
        }),
        columns: &["replicate", "j", "x"],
        rows,
        summary: format!("simulated {reps} {} path(s) of length {n}", model.name()),
    })
}

fn risk_config(args: &RiskArgs, mut map: Map<String, Value>, seed: u64, workers: Option<usize>) -> Outcome<RiskConfig> {
    if let Some(m) = &args.model {
        let theta0 = args
            .theta0
            .or_else(|| map.get("model").and_then(|v| v.get("theta0")).and_then(Value::as_f64))
            .ok_or_else(|| config_err("--model needs --theta0"))?;
        map.insert("model".into(), json!({ "model": m, "theta0": theta0 }));
    } else if let Some(t) = args.theta0 {
        let m = map.get_mut("model").ok_or_else(|| config_err("--theta0 needs --model"))?;
        m.as_object_mut().ok_or_else(|| config_err("`model` must be an object"))?.insert("theta0".into(), json!(t));
    }
    if let Some(l) = &args.loss {
        map.insert("loss".into(), to_value(&l.parse::<LossSpec>()?));
    } else if let Some(Value::String(s)) = map.get("loss") {
        let parsed = to_value(&s.parse::<LossSpec>()?);
        map.insert("loss".into(), parsed);
    }
    set(&mut map, "n", args.n);
    set(&mut map, "reps", args.reps);
    set(&mut map, "h_grid", args.h_grid.clone());
    set(&mut map, "center", args.center);
    if args.untruncated {
        map.insert("untruncated".into(), json!(true));
    }
    map.insert("seed".into(), json!(seed));
    map.entry("estimators").or_insert_with(|| json!([]));
    map.entry("h_grid").or_insert_with(|| json!([0.0]));
    let mut cfg: RiskConfig = serde_json::from_value(Value::Object(map)).map_err(|e| config_err(e.to_string()))?;
    if let Some(w) = workers {
        cfg.workers = w;
    }
    if cfg.estimators.is_empty() {
        cfg.estimators = vec![EstimatorSpec::Mle, EstimatorSpec::corrected(cfg.risk_loss()?)];
    }
    cfg.resolved()?;
    Ok(cfg)
}

fn risk_rows(report: &lamn_core::mc_harness::RiskReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| vec![r.estimator.clone(), r.h.to_string(), r.risk.to_string(), r.stderr.to_string(), r.degenerate.to_string()])
        .collect()
}

fn run_risk_cmd(cfg: RiskConfig) -> Outcome<Output> {
    let report = run_risk(&cfg)?;
    let summary = report
        .local_sup
        .iter()
        .map(|r| format!("{} {:.4}±{:.4}", r.estimator, r.risk, r.stderr))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(Output {
        json: to_value(&report),
        columns: &["estimator", "h", "risk", "stderr", "degenerate"],
        rows: risk_rows(&report),
        summary: format!("local-sup risk: {summary}"),
    })
}

fn run_sweep_cmd(cfg: RiskConfig) -> Outcome<Output> {
    let s = sweep(&cfg)?;
    let rows = s
        .rows
        .iter()
        .map(|r| {
            vec![r.k.to_string(), r.factor.to_string(), r.local_sup.to_string(), r.stderr.to_string(), r.risk_at_zero.to_string()]
        })
        .collect();
    Ok(Output {
        summary: format!("sweep argmin k = {}", s.argmin_k),
        json: to_value(&s),
        columns: &["k", "factor", "local_sup", "stderr", "risk_at_zero"],
        rows,
    })
}

fn run_diagnose(map: Map<String, Value>, seed: u64, workers: usize) -> Outcome<Output> {
    let model = model_field(&map)?;
    let n_list: Vec<usize> = serde_json::from_value(field(&map, "n_list")?.clone())
        .map_err(|e| config_err(format!("n_list: {e}")))?;
    let reps = usize_field(&map, "reps")?;
    let rows = diagnose(&model, model.theta0(), &n_list, reps, &StreamFactory::new(seed), workers)?;
    let last = rows.last().expect("n_list is nonempty");
    Ok(Output {
        json: json!({
            "config": { "model": to_value(&model), "n_list": n_list, "reps": reps, "seed": seed },
            "seed": seed,
            "rows": to_value(&rows),
        }),
        columns: &["n", "ks_w", "ks_g", "corr_g_w", "corr_g2_w", "samples"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.ks_w.to_string(),
                    r.ks_g.to_string(),
                    r.corr_g_w.to_string(),
                    r.corr_g2_w.to_string(),
                    r.samples.to_string(),
                ]
            })
            .collect(),
        summary: format!("n = {}: KS(W) = {:.4}, KS(G) = {:.4}", last.n, last.ks_w, last.ks_g),
    })
}

fn run_limit(map: Map<String, Value>, seed: u64, workers: usize) -> Outcome<Output> {
    let loss = loss_field(&map)?;
    let g = mixing_field(&map)?;
    let sigma = f64_field(&map, "sigma")?;
    let reps = usize_field(&map, "reps")?;
    let cfg = beta0_config(&map)?;
    let estimators: Vec<LimitEstimator> = match map.get("estimators") {
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| config_err(format!("estimators: {e}")))?,
        None => vec![
            LimitEstimator::LossBayes { sigma: None },
            LimitEstimator::PosteriorMean { sigma: None },
            LimitEstimator::LossBayes { sigma: Some(sigma) },
            LimitEstimator::PosteriorMean { sigma: Some(sigma) },
        ],
    };
    if estimators.is_empty() {
        return Err(config_err("`estimators` must be nonempty"));
    }
    let sampler = LimitSampler::new(g.clone(), loss.clone(), Prior::Normal { sigma }, cfg)?;
    let pool = rayon_pool(workers)?;
    let losses = pool.install(|| limit_losses(&estimators, &sampler, reps, &StreamFactory::new(seed)))?;
    let (bound, divergent) = bound_json(minimax_bound(&loss, &g, &cfg)?);
    let results: Vec<(String, McEstimate)> =
        estimators.iter().zip(&losses).map(|(e, l)| (e.label(), McEstimate::from_samples(l))).collect();
    Ok(Output {
        json: json!({
            "config": {
                "loss": to_value(&loss), "mixing": to_value(&g), "sigma": sigma, "reps": reps,
                "seed": seed, "estimators": to_value(&estimators), "beta0_config": to_value(&cfg),
            },
            "seed": seed,
            "bound": bound,
            "divergent": divergent,
            "rows": results.iter().map(|(l, e)| json!({
                "estimator": l, "risk": e.mean, "stderr": e.stderr, "count": e.count,
            })).collect::<Vec<_>>(),
        }),
        columns: &["estimator", "risk", "stderr", "count"],
        rows: results
            .iter()
            .map(|(l, e)| vec![l.clone(), e.mean.to_string(), e.stderr.to_string(), e.count.to_string()])
            .collect(),
        summary: format!("{} Bayes risk {:.4}±{:.4}, bound {bound}", results[0].0, results[0].1.mean, results[0].1.stderr),
    })
}

fn rayon_pool(workers: usize) -> Outcome<rayon::ThreadPool> {
    if workers == 0 {
        return Err(config_err("--workers must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| config_err(e.to_string()))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn render(out: &Output, format: Format, subcommand: &str) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&out.json).expect("serialisable") + "\n",
        Format::Csv => {
            let config = out.json.get("config").cloned().unwrap_or(Value::Null);
            let mut text = format!("# {CSV_VERSION} {subcommand}\n# config: {config}\n{}\n", out.columns.join(","));
            for row in &out.rows {
                text.push_str(&row.iter().map(|s| csv_field(s)).collect::<Vec<_>>().join(","));
                text.push('\n');
            }
            text
        }
    }
}

fn execute(cli: Cli) -> Outcome<()> {
    let mut map = load_config(&cli.config)?;
    let workers = cli.workers.unwrap_or(1);
    let (name, out) = match &cli.command {
        Command::Beta0 { loss, w } => {
            set(&mut map, "loss", loss.clone());
            set(&mut map, "w", *w);
            ("beta0", run_beta0(map)?)
        }
        Command::Bound { loss, mixing, truncation } => {
            set(&mut map, "loss", loss.clone());
            set(&mut map, "mixing", mixing.clone());
            set(&mut map, "truncation", *truncation);
            ("bound", run_bound(map)?)
        }
        Command::Simulate { model, theta0, n, reps } => {
            let seed = require_seed(cli.seed)?;
            set(&mut map, "model", model.clone());
            set(&mut map, "theta0", *theta0);
            set(&mut map, "n", *n);
            set(&mut map, "reps", *reps);
            ("simulate", run_simulate(map, seed)?)
        }
        Command::Risk(args) => {
            let seed = require_seed(cli.seed)?;
            ("risk", run_risk_cmd(risk_config(args, map, seed, cli.workers)?)?)
        }
        Command::Sweep(args) => {
            let seed = require_seed(cli.seed)?;
            ("sweep", run_sweep_cmd(risk_config(args, map, seed, cli.workers)?)?)
        }
        Command::Diagnose { model, theta0, n_list, reps } => {
            let seed = require_seed(cli.seed)?;
            set(&mut map, "model", model.clone());
            set(&mut map, "theta0", *theta0);
            set(&mut map, "n_list", n_list.clone());
            set(&mut map, "reps", *reps);
            ("diagnose", run_diagnose(map, seed, workers)?)
        }
        Command::Limit { loss, mixing, sigma, reps } => {
            let seed = require_seed(cli.seed)?;
            set(&mut map, "loss", loss.clone());
            set(&mut map, "mixing", mixing.clone());
            set(&mut map, "sigma", *sigma);
            set(&mut map, "reps", *reps);
            ("limit", run_limit(map, seed, workers)?)
        }
    };
    let text = render(&out, cli.format, name);
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| config_err(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    eprintln!("{}", out.summary);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
