//! Replication engine for local risks.
//!
//! Replicate `i` at local parameter `h` simulates a path under
//! `θ = t + δ_n h` from stream `i` of the risk domain, so every `h` sees the
//! same random numbers. Statistics and estimators are evaluated at the centre
//! `t`. Per-replicate results are collected in replicate order and reduced
//! sequentially, which makes a report independent of the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bias_solver::Beta0Config;
use crate::bound::minimax_bound;
use crate::error::{Error, Result};
use crate::estimators::{converged_beta0, EstimatorSpec, ShiftFn};
use crate::losses::LossSpec;
use crate::mixing::Expectation;
use crate::models::{local_stats, LocalStats, Model};
use crate::rng::{domain, StreamFactory};
use crate::stats::{chi2_1_cdf, correlation, exp1_cdf, normal_cdf, McEstimate};

/// Truncation level applied when a risk configuration names an untruncated
/// loss without opting out.
pub const DEFAULT_TRUNCATION: f64 = 50.0;

/// Largest tolerated fraction of degenerate paths.
pub const MAX_DEGENERATE_FRACTION: f64 = 1e-3;

/// Minimum replicate count for a reported risk.
pub const MIN_REPS: usize = 1000;

fn one() -> usize {
    1
}

/// A risk experiment. `workers` only affects scheduling: it is left out of
/// the serialised form and reports record it as 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskConfig {
    pub model: Model,
    pub loss: LossSpec,
    pub estimators: Vec<EstimatorSpec>,
    pub n: usize,
    pub reps: usize,
    pub h_grid: Vec<f64>,
    /// Centre `t`; the model's `θ₀` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    pub seed: u64,
    #[serde(default = "one", skip_serializing)]
    pub workers: usize,
    /// Keep an untruncated loss as given instead of capping it.
    #[serde(default)]
    pub untruncated: bool,
    #[serde(default)]
    pub beta0: Beta0Config,
}

impl RiskConfig {
    pub fn new(model: Model, loss: LossSpec, estimators: Vec<EstimatorSpec>, n: usize, reps: usize, seed: u64) -> Self {
        Self {
            model,
            loss,
            estimators,
            n,
            reps,
            h_grid: vec![0.0],
            center: None,
            seed,
            workers: 1,
            untruncated: false,
            beta0: Beta0Config::default(),
        }
    }

    pub fn center(&self) -> f64 {
        self.center.unwrap_or(self.model.theta0())
    }

    /// The model at the centre `t`.
    pub fn center_model(&self) -> Result<Model> {
        self.model.with_theta(self.center())
    }

    /// The loss risks are reported under.
    pub fn risk_loss(&self) -> Result<LossSpec> {
        match self.loss.truncation() {
            None if !self.untruncated => self.loss.truncated(DEFAULT_TRUNCATION),
            _ => Ok(self.loss.clone()),
        }
    }

    /// Checks the invariants and fills in defaults.
    pub fn resolved(&self) -> Result<Self> {
        if self.reps < MIN_REPS {
            return Err(Error::invalid(format!("reps must be at least {MIN_REPS}, got {}", self.reps)));
        }
        if self.n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("at least one estimator is required"));
        }
        if self.h_grid.iter().any(|h| !h.is_finite()) {
            return Err(Error::invalid("h_grid entries must be finite"));
        }
        if !self.h_grid.contains(&0.0) {
            return Err(Error::invalid("h_grid must contain 0"));
        }
        self.beta0.validate()?;
        let model = self.center_model()?;
        let delta = model.norming_constant(self.n)?;
        for &h in &self.h_grid {
            model.with_theta(self.center() + delta * h)?;
        }
        Ok(Self { model, loss: self.risk_loss()?, center: None, ..self.clone() })
    }

    /// Hex SHA-256 of the serialised resolved configuration.
    pub fn hash(&self) -> Result<String> {
        let json = serde_json::to_vec(&self.resolved()?).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(hex::encode(Sha256::digest(json)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub estimator: String,
    pub h: f64,
    pub risk: f64,
    pub stderr: f64,
    pub degenerate: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSupRow {
    pub estimator: String,
    pub risk: f64,
    pub stderr: f64,
    pub h: f64,
}

/// Risk difference `other − baseline` on common replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedRow {
    pub baseline: String,
    pub estimator: String,
    pub h: f64,
    pub difference: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasRow {
    pub estimator: String,
    pub bias: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub bound: Option<f64>,
    pub divergent: bool,
}

impl From<Expectation> for BoundSummary {
    fn from(e: Expectation) -> Self {
        match e {
            Expectation::Finite(v) => Self { bound: Some(v), divergent: false },
            Expectation::Divergent => Self { bound: None, divergent: true },
        }
    }
}

/// Distance of `(W_n, G_n)` from its limit at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub n: usize,
    pub ks_w: f64,
    pub ks_g: f64,
    pub corr_g_w: f64,
    pub corr_g2_w: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub config_hash: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub config: RiskConfig,
    pub rows: Vec<RiskRow>,
    pub local_sup: Vec<LocalSupRow>,
    pub paired: Vec<PairedRow>,
    pub bias: Vec<BiasRow>,
    pub bound: BoundSummary,
    /// Computed from the `h = 0` replicates.
    pub diagnostics: DiagnosticRow,
    pub warnings: Vec<String>,
    pub provenance: Provenance,
}

impl RiskReport {
    pub fn row(&self, estimator: &str, h: f64) -> Option<&RiskRow> {
        self.rows.iter().find(|r| r.estimator == estimator && r.h == h)
    }

    pub fn local_sup_of(&self, estimator: &str) -> Option<&LocalSupRow> {
        self.local_sup.iter().find(|r| r.estimator == estimator)
    }
}

/// Sup-distance between the empirical cdf of `sample` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    d.clamp(0.0, 1.0)
}

/// Cdf of the model's mixing law.
pub fn limit_cdf(model: &Model) -> fn(f64) -> f64 {
    match model {
        Model::Ar1(_) => chi2_1_cdf,
        Model::Gw(_) => exp1_cdf,
    }
}

fn diagnostic_row(model: &Model, n: usize, w: &[f64], g: &[f64]) -> DiagnosticRow {
    let g2: Vec<f64> = g.iter().map(|x| x * x).collect();
    DiagnosticRow {
        n,
        ks_w: ks_statistic(w, limit_cdf(model)),
        ks_g: ks_statistic(g, normal_cdf),
        corr_g_w: correlation(g, w),
        corr_g2_w: correlation(&g2, w),
        samples: w.len(),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

/// Convergence diagnostics of `(W_n, G_n)` at `theta0` for each `n`.
pub fn diagnose(
    model: &Model,
    theta0: f64,
    n_list: &[usize],
    reps: usize,
    streams: &StreamFactory,
    workers: usize,
) -> Result<Vec<DiagnosticRow>> {
    if n_list.is_empty() || n_list.windows(2).any(|p| p[0] >= p[1]) {
        return Err(Error::invalid("n_list must be nonempty and increasing"));
    }
    if reps < 2 {
        return Err(Error::invalid("reps must be at least 2"));
    }
    let model = model.with_theta(theta0)?;
    pool(workers)?.install(|| {
        n_list
            .iter()
            .map(|&n| {
                let stats: Vec<Option<LocalStats>> = (0..reps as u64)
                    .into_par_iter()
                    .map(|i| {
                        let traj = model.simulate(n, &mut streams.stream(domain::DIAGNOSE, i))?;
                        match model.local_stats(&traj) {
                            Ok(s) => Ok(Some(s)),
                            Err(Error::DegeneratePath(_)) => Ok(None),
                            Err(e) => Err(e),
                        }
                    })
                    .collect::<Result<_>>()?;
                let (w, g): (Vec<f64>, Vec<f64>) = stats.iter().flatten().map(|s| (s.w_n, s.g_n)).unzip();
                Ok(diagnostic_row(&model, n, &w, &g))
            })
            .collect()
    })
}

struct Replicate {
    w: f64,
    g: f64,
    errors: Vec<f64>,
}

/// Normalised errors of every estimator on every replicate at `h`; `None`
/// marks a degenerate path.
fn replicate_errors(cfg: &RiskConfig, h: f64) -> Result<Vec<Option<Replicate>>> {
    let model = cfg.center_model()?;
    let delta = model.norming_constant(cfg.n)?;
    let truth = model.with_theta(cfg.center() + delta * h)?;
    let streams = StreamFactory::new(cfg.seed);
    (0..cfg.reps as u64)
        .into_par_iter()
        .map(|i| {
            let traj = truth.simulate(cfg.n, &mut streams.stream(domain::RISK, i))?;
            let stats = match local_stats(&model, &traj, cfg.center()) {
                Ok(s) => s,
                Err(Error::DegeneratePath(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let mut solved: Vec<(LossSpec, f64)> = Vec::new();
            let errors = cfg
                .estimators
                .iter()
                .map(|spec| {
                    let shift = spec.shift_with(stats.w_n, |loss| {
                        if let Some((_, b)) = solved.iter().find(|(l, _)| l == loss) {
                            return Ok(*b);
                        }
                        let b = converged_beta0(loss, stats.w_n, &cfg.beta0)?;
                        solved.push((loss.clone(), b));
                        Ok(b)
                    })?;
                    Ok(stats.scaled_mle_error + shift - h)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Some(Replicate { w: stats.w_n, g: stats.g_n, errors }))
        })
        .collect()
}

fn check_degenerate(reps: &[Option<Replicate>]) -> Result<usize> {
    let degenerate = reps.iter().filter(|r| r.is_none()).count();
    if degenerate as f64 > MAX_DEGENERATE_FRACTION * reps.len() as f64 {
        return Err(Error::TooManyDegenerate { degenerate, reps: reps.len() });
    }
    Ok(degenerate)
}

/// Runs every estimator over the whole `h` grid.
pub fn run_risk(cfg: &RiskConfig) -> Result<RiskReport> {
    let resolved = cfg.resolved()?;
    let loss = resolved.loss.clone();
    let labels: Vec<String> = resolved.estimators.iter().map(EstimatorSpec::label).collect();
    let mut rows = Vec::new();
    let mut paired = Vec::new();
    let mut bias = Vec::new();
    let mut diagnostics = None;
    pool(cfg.workers)?.install(|| -> Result<()> {
        for &h in &resolved.h_grid {
            let reps = replicate_errors(&resolved, h)?;
            let degenerate = check_degenerate(&reps)?;
            let ok: Vec<&Replicate> = reps.iter().flatten().collect();
            let losses: Vec<Vec<f64>> = (0..labels.len())
                .map(|k| ok.iter().map(|r| loss.eval(r.errors[k])).collect())
                .collect();
            for (k, label) in labels.iter().enumerate() {
                let e = McEstimate::from_samples(&losses[k]);
                rows.push(RiskRow { estimator: label.clone(), h, risk: e.mean, stderr: e.stderr, degenerate });
                if k > 0 {
                    let diff: Vec<f64> = losses[k].iter().zip(&losses[0]).map(|(a, b)| a - b).collect();
                    let d = McEstimate::from_samples(&diff);
                    paired.push(PairedRow {
                        baseline: labels[0].clone(),
                        estimator: label.clone(),
                        h,
                        difference: d.mean,
                        stderr: d.stderr,
                    });
                }
            }
            if h == 0.0 && diagnostics.is_none() {
                for (k, label) in labels.iter().enumerate() {
                    let errs: Vec<f64> = ok.iter().map(|r| r.errors[k]).collect();
                    let e = McEstimate::from_samples(&errs);
                    bias.push(BiasRow { estimator: label.clone(), bias: e.mean, stderr: e.stderr });
                }
                let (w, g): (Vec<f64>, Vec<f64>) = ok.iter().map(|r| (r.w, r.g)).unzip();
                diagnostics = Some(diagnostic_row(&resolved.model, resolved.n, &w, &g));
            }
        }
        Ok(())
    })?;
    let local_sup = labels
        .iter()
        .map(|label| {
            let best = rows
                .iter()
                .filter(|r| &r.estimator == label)
                .fold(None::<&RiskRow>, |acc, r| match acc {
                    Some(a) if a.risk >= r.risk => Some(a),
                    _ => Some(r),
                })
                .expect("h_grid is nonempty");
            LocalSupRow { estimator: label.clone(), risk: best.risk, stderr: best.stderr, h: best.h }
        })
        .collect();
    let bound = minimax_bound(&loss, &resolved.model.mixing(), &resolved.beta0)?.into();
    let mut warnings = Vec::new();
    if loss.truncation().is_none() {
        warnings.push(format!(
            "loss {loss} is untruncated; risks may be dominated by rare paths and their standard errors unreliable"
        ));
    }
    let provenance =
        Provenance { seed: resolved.seed, config_hash: resolved.hash()?, version: env!("CARGO_PKG_VERSION").into() };
    Ok(RiskReport {
        config: RiskConfig { workers: 1, ..resolved },
        rows,
        local_sup,
        paired,
        bias,
        bound,
        diagnostics: diagnostics.expect("h_grid contains 0"),
        warnings,
        provenance,
    })
}

/// Risk of one estimator at one `h`.
pub fn estimate_risk(cfg: &RiskConfig, estimator: &EstimatorSpec, h: f64) -> Result<McEstimate> {
    let mut single = RiskConfig { estimators: vec![estimator.clone()], ..cfg.clone() };
    if !single.h_grid.contains(&h) {
        single.h_grid = vec![0.0, h];
    } else {
        single.h_grid = vec![0.0];
        if h != 0.0 {
            single.h_grid.push(h);
        }
    }
    let resolved = single.resolved()?;
    let loss = resolved.loss.clone();
    let reps = pool(cfg.workers)?.install(|| replicate_errors(&resolved, h))?;
    check_degenerate(&reps)?;
    let losses: Vec<f64> = reps.iter().flatten().map(|r| loss.eval(r.errors[0])).collect();
    Ok(McEstimate::from_samples(&losses))
}

/// Largest risk over the configured `h` grid, with its standard error.
pub fn local_sup_risk(cfg: &RiskConfig, estimator: &EstimatorSpec) -> Result<McEstimate> {
    if cfg.h_grid.is_empty() {
        return Err(Error::invalid("h_grid must be nonempty"));
    }
    let mut best: Option<McEstimate> = None;
    for &h in &cfg.h_grid {
        let e = estimate_risk(cfg, estimator, h)?;
        if best.is_none_or(|b| e.mean > b.mean) {
            best = Some(e);
        }
    }
    Ok(best.expect("nonempty grid"))
}

/// Mean normalised error at `h = 0`.
pub fn bias_measure(cfg: &RiskConfig, estimator: &EstimatorSpec) -> Result<McEstimate> {
    let single = RiskConfig { estimators: vec![estimator.clone()], h_grid: vec![0.0], ..cfg.clone() };
    let resolved = single.resolved()?;
    let reps = pool(cfg.workers)?.install(|| replicate_errors(&resolved, 0.0))?;
    check_degenerate(&reps)?;
    let errs: Vec<f64> = reps.iter().flatten().map(|r| r.errors[0]).collect();
    Ok(McEstimate::from_samples(&errs))
}

/// The shift family `k/4 · w^{-1/2} β₀(w)`, `k = 0, …, 8`.
pub fn sweep_estimators(loss: &LossSpec) -> Vec<(f64, EstimatorSpec)> {
    (0..=8)
        .map(|k| {
            let factor = k as f64 / 4.0;
            (k as f64, EstimatorSpec::shifted(ShiftFn::CorrectionMultiple { loss: loss.clone(), factor }))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: f64,
    pub factor: f64,
    pub local_sup: f64,
    pub stderr: f64,
    pub risk_at_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// `k` with the smallest local-sup risk.
    pub argmin_k: f64,
    pub report: RiskReport,
}

/// Runs the configured estimators together with the shift family for the
/// risk loss, on common replicates.
pub fn sweep(cfg: &RiskConfig) -> Result<SweepReport> {
    let family = sweep_estimators(&cfg.risk_loss()?);
    let mut all = cfg.estimators.clone();
    all.extend(family.iter().map(|(_, e)| e.clone()));
    let report = run_risk(&RiskConfig { estimators: all, ..cfg.clone() })?;
    let rows: Vec<SweepRow> = family
        .iter()
        .map(|(k, spec)| {
            let label = spec.label();
            let sup = report.local_sup_of(&label).expect("family member in report");
            let zero = report.row(&label, 0.0).expect("h_grid contains 0");
            SweepRow { k: *k, factor: k / 4.0, local_sup: sup.risk, stderr: sup.stderr, risk_at_zero: zero.risk }
        })
        .collect();
    let argmin_k = rows
        .iter()
        .fold(None::<&SweepRow>, |acc, r| match acc {
            Some(a) if a.local_sup <= r.local_sup => Some(a),
            _ => Some(r),
        })
        .expect("nonempty family")
        .k;
    Ok(SweepReport { rows, argmin_k, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gw_cfg(reps: usize) -> RiskConfig {
        let loss = LossSpec::check(4.0, 1.0).unwrap().truncated(50.0).unwrap();
        RiskConfig::new(
            Model::gw(2.0).unwrap(),
            loss.clone(),
            vec![EstimatorSpec::Mle, EstimatorSpec::corrected(loss)],
            12,
            reps,
            7,
        )
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[0.3; 10], normal_cdf), normal_cdf(0.3));
        assert_eq!(ks_statistic(&[-2.0; 3], normal_cdf), 1.0 - normal_cdf(-2.0));
        let a = [0.5, -1.0, 2.0, 0.1];
        let mut b = a;
        b.sort_by(f64::total_cmp);
        assert_eq!(ks_statistic(&a, normal_cdf), ks_statistic(&b, normal_cdf));
        assert_eq!(ks_statistic(&[0.5], |x| x), 0.5);
    }

    #[test]
    fn config_validation() {
        let mut c = gw_cfg(1000);
        assert!(c.resolved().is_ok());
        c.h_grid = vec![1.0];
        assert!(c.resolved().is_err());
        let mut c = gw_cfg(999);
        assert!(c.resolved().is_err());
        c.reps = 1000;
        c.workers = 0;
        assert!(c.resolved().is_err());
        // AR(1) at θ = 1.01 with a huge local step leaves the region
        let mut c = gw_cfg(1000);
        c.model = Model::ar1(1.01).unwrap();
        c.n = 1;
        c.h_grid = vec![0.0, -10.0];
        assert!(matches!(c.resolved(), Err(Error::ParameterRegion { .. })));
    }

    #[test]
    fn default_truncation_and_hash() {
        let mut c = gw_cfg(1000);
        c.loss = LossSpec::linex(1.0, 1.0).unwrap();
        assert_eq!(c.resolved().unwrap().loss.truncation(), Some(DEFAULT_TRUNCATION));
        c.untruncated = true;
        assert_eq!(c.resolved().unwrap().loss.truncation(), None);
        let a = gw_cfg(1000);
        let mut b = gw_cfg(1000);
        b.workers = 4;
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        b.seed = 8;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
    }

    #[test]
    fn report_invariants() {
        let mut c = gw_cfg(1000);
        c.h_grid = vec![-1.0, 0.0, 1.0];
        c.estimators.push(EstimatorSpec::corrected(LossSpec::squared()));
        let r = run_risk(&c).unwrap();
        assert_eq!(r.rows.len(), 9);
        for row in &r.rows {
            assert!(row.risk >= 0.0 && row.risk <= 50.0);
        }
        for sup in &r.local_sup {
            let zero = r.row(&sup.estimator, 0.0).unwrap();
            assert!(sup.risk >= zero.risk);
        }
        let e = estimate_risk(&c, &EstimatorSpec::Mle, 0.0).unwrap();
        assert_eq!(e.mean, r.row("mle", 0.0).unwrap().risk);
        let s = local_sup_risk(&c, &EstimatorSpec::Mle).unwrap();
        assert_eq!(s.mean, r.local_sup_of("mle").unwrap().risk);
        let sq = r.row(&EstimatorSpec::corrected(LossSpec::squared()).label(), 1.0).unwrap();
        assert_eq!(sq.risk, r.row("mle", 1.0).unwrap().risk);
        assert_eq!(r.provenance.config_hash, c.hash().unwrap());
        assert_eq!(r.bias.len(), 3);
    }

    #[test]
    fn singleton_grid_sup_is_the_point_risk() {
        let c = gw_cfg(1000);
        let s = local_sup_risk(&c, &EstimatorSpec::Mle).unwrap();
        let e = estimate_risk(&c, &EstimatorSpec::Mle, 0.0).unwrap();
        assert_eq!(s, e);
    }

    #[test]
    fn vanishing_truncation_gives_vanishing_risk() {
        let mut prev = f64::INFINITY;
        for cap in [1.0, 1e-2, 1e-4] {
            let mut c = gw_cfg(1000);
            c.loss = c.loss.truncated(cap).unwrap();
            let e = estimate_risk(&c, &EstimatorSpec::Mle, 0.0).unwrap();
            assert!(e.mean <= cap && e.mean < prev);
            prev = e.mean;
        }
    }

    #[test]
    fn worker_count_does_not_change_the_report() {
        let mut c = gw_cfg(1000);
        c.h_grid = vec![0.0, 2.0];
        let a = run_risk(&c).unwrap();
        c.workers = 3;
        let b = run_risk(&c).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn report_round_trips_through_json() {
        let r = run_risk(&gw_cfg(1000)).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        let back: RiskReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        let rerun = run_risk(&back.config).unwrap();
        assert_eq!(rerun, r);
    }

    #[test]
    fn diagnose_rejects_bad_lists() {
        let m = Model::gw(2.0).unwrap();
        let f = StreamFactory::new(1);
        assert!(diagnose(&m, 2.0, &[], 100, &f, 1).is_err());
        assert!(diagnose(&m, 2.0, &[10, 5], 100, &f, 1).is_err());
        let rows = diagnose(&m, 2.0, &[5, 10], 200, &f, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.ks_w) && r.samples == 200));
    }

    #[test]
    fn sweep_family_contains_mle_and_corrected() {
        let c = gw_cfg(1000);
        let s = sweep(&c).unwrap();
        assert_eq!(s.rows.len(), 9);
        let mle = s.report.local_sup_of("mle").unwrap().risk;
        let corrected = s.report.local_sup_of(&c.estimators[1].label()).unwrap().risk;
        assert_eq!(s.rows[0].local_sup, mle);
        assert!((s.rows[4].local_sup - corrected).abs() < 1e-12);
    }
}
