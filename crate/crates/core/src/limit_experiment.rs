//! The Gaussian limit experiment with a normal prior.
//!
//! Given `W = w`, the observation is `Z | θ, w ~ N(θ√w + β₀(w), 1)` and the
//! prior is `θ ~ N(0, σ²)`. With `r(w, σ) = w + 1/σ²` the posterior is
//! `N(√w (z − β₀(w)) / r, 1/r)` and the marginal density of `(Z, W)` is
//! `φ(z; β₀(w), σ² r) g(w)`.
//!
//! Two Bayes rules appear. The posterior mean tends to `w^{-1/2}(z − β₀(w))`
//! as `σ → ∞`. The Bayes rule for the loss itself adds the posterior-scale
//! correction and tends to `w^{-1/2} z`; its conditional risk is
//! `h(β₀(w), w)`, which is the bound.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias_solver::Beta0Config;
use crate::error::{Error, Result};
use crate::estimators::converged_beta0;
use crate::losses::LossSpec;
use crate::mixing::MixingDensity;
use crate::rng::{domain, StreamFactory};
use crate::stats::{normal_pdf, McEstimate};

/// One draw `(θ, W, Z, U)`, with the `β₀(W)` used to centre `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSample {
    pub theta: f64,
    pub w: f64,
    pub z: f64,
    pub u: f64,
    pub beta0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PosteriorParams {
    pub mean: f64,
    pub variance: f64,
}

/// Law of `θ` in the limit experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prior {
    Normal { sigma: f64 },
    Fixed { theta: f64 },
}

impl Prior {
    fn validate(&self) -> Result<()> {
        match *self {
            Prior::Normal { sigma } if !(sigma > 0.0) || sigma.is_nan() => {
                Err(Error::invalid(format!("prior sigma must be positive, got {sigma}")))
            }
            Prior::Fixed { theta } if !theta.is_finite() => Err(Error::invalid("fixed theta must be finite")),
            _ => Ok(()),
        }
    }
}

/// `r(s, t) = s + 1/t²`.
pub fn r(s: f64, t: f64) -> f64 {
    s + 1.0 / (t * t)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Conjugate posterior of `θ` given `(w, z)` when `Z` is centred at
/// `θ√w + beta0`. An infinite `sigma` gives the flat-prior limit.
pub fn posterior_with_beta0(w: f64, z: f64, sigma: f64, beta0: f64) -> Result<PosteriorParams> {
    check_positive("w", w)?;
    check_positive("sigma", sigma)?;
    let rr = r(w, sigma);
    Ok(PosteriorParams { mean: w.sqrt() * (z - beta0) / rr, variance: 1.0 / rr })
}

/// Conjugate posterior with `β₀(w)` solved for `loss`.
pub fn posterior(w: f64, z: f64, sigma: f64, loss: &LossSpec, cfg: &Beta0Config) -> Result<PosteriorParams> {
    check_positive("w", w)?;
    posterior_with_beta0(w, z, sigma, converged_beta0(loss, w, cfg)?)
}

/// Joint density (or, for a point mass, density times atom mass) of
/// `(Z, W)` under the normal prior.
pub fn marginal_density(
    z: f64,
    w: f64,
    sigma: f64,
    g: &MixingDensity,
    loss: &LossSpec,
    cfg: &Beta0Config,
) -> Result<f64> {
    check_positive("w", w)?;
    check_positive("sigma", sigma)?;
    let weight = g.weight(w);
    if weight == 0.0 {
        return Ok(0.0);
    }
    let beta0 = converged_beta0(loss, w, cfg)?;
    let sd = (sigma * sigma * r(w, sigma)).sqrt();
    Ok(normal_pdf((z - beta0) / sd) / sd * weight)
}

/// Draws from the limit experiment; `β₀` is solved once when `g` is a point
/// mass and per draw otherwise.
#[derive(Debug, Clone)]
pub struct LimitSampler {
    g: MixingDensity,
    loss: LossSpec,
    prior: Prior,
    cfg: Beta0Config,
    atom_beta0: Option<f64>,
}

impl LimitSampler {
    pub fn new(g: MixingDensity, loss: LossSpec, prior: Prior, cfg: Beta0Config) -> Result<Self> {
        prior.validate()?;
        cfg.validate()?;
        let atom_beta0 = match g.atom() {
            Some(w0) => Some(converged_beta0(&loss, w0, &cfg)?),
            None => None,
        };
        Ok(Self { g, loss, prior, cfg, atom_beta0 })
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    pub fn prior(&self) -> Prior {
        self.prior
    }

    pub fn config(&self) -> &Beta0Config {
        &self.cfg
    }

    pub fn beta0(&self, w: f64) -> Result<f64> {
        match (self.atom_beta0, self.g.atom()) {
            (Some(b), Some(w0)) if w == w0 => Ok(b),
            _ => converged_beta0(&self.loss, w, &self.cfg),
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<LimitSample> {
        let theta = match self.prior {
            Prior::Normal { sigma } => {
                let n: f64 = StandardNormal.sample(rng);
                sigma * n
            }
            Prior::Fixed { theta } => theta,
        };
        let w = self.g.draw(rng);
        let beta0 = self.beta0(w)?;
        let noise: f64 = StandardNormal.sample(rng);
        let z = theta * w.sqrt() + beta0 + noise;
        let u: f64 = rng.random();
        Ok(LimitSample { theta, w, z, u, beta0 })
    }
}

/// One draw of `(θ, W, Z, U)` from `stream`.
pub fn sample_limit<R: Rng + ?Sized>(
    g: &MixingDensity,
    loss: &LossSpec,
    prior: Prior,
    cfg: &Beta0Config,
    stream: &mut R,
) -> Result<LimitSample> {
    LimitSampler::new(g.clone(), loss.clone(), prior, *cfg)?.draw(stream)
}

/// Estimators `ξ(Z, W, U)` of `θ` in the limit experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitEstimator {
    /// `√w (z − β₀) / r(w, σ)`; `sigma: None` is the flat-prior limit
    /// `w^{-1/2}(z − β₀)`.
    PosteriorMean { sigma: Option<f64> },
    /// Minimiser of the posterior expected loss: posterior mean plus
    /// `r^{-1/2} β₀(r)`. With `sigma: None` this is `w^{-1/2} z`.
    LossBayes { sigma: Option<f64> },
    /// `w^{-1/2}(z − k β₀(w))`.
    Shifted { k: f64 },
    Constant { c: f64 },
    /// `w^{-1/2}(z + spread (u − 1/2))`.
    Randomized { spread: f64 },
}

impl LimitEstimator {
    pub fn label(&self) -> String {
        match self {
            LimitEstimator::PosteriorMean { sigma: None } => "posterior_mean_diffuse".into(),
            LimitEstimator::PosteriorMean { sigma: Some(s) } => format!("posterior_mean[sigma={s}]"),
            LimitEstimator::LossBayes { sigma: None } => "loss_bayes_diffuse".into(),
            LimitEstimator::LossBayes { sigma: Some(s) } => format!("loss_bayes[sigma={s}]"),
            LimitEstimator::Shifted { k } => format!("shifted[k={k}]"),
            LimitEstimator::Constant { c } => format!("constant[{c}]"),
            LimitEstimator::Randomized { spread } => format!("randomized[{spread}]"),
        }
    }

    pub fn evaluate(&self, s: &LimitSample, sampler: &LimitSampler) -> Result<f64> {
        let root_w = s.w.sqrt();
        Ok(match *self {
            LimitEstimator::PosteriorMean { sigma } => {
                posterior_with_beta0(s.w, s.z, sigma.unwrap_or(f64::INFINITY), s.beta0)?.mean
            }
            LimitEstimator::LossBayes { sigma } => {
                let p = posterior_with_beta0(s.w, s.z, sigma.unwrap_or(f64::INFINITY), s.beta0)?;
                let precision = 1.0 / p.variance;
                let b = if precision == s.w { s.beta0 } else { sampler.beta0(precision)? };
                p.mean + b / precision.sqrt()
            }
            LimitEstimator::Shifted { k } => (s.z - k * s.beta0) / root_w,
            LimitEstimator::Constant { c } => c,
            LimitEstimator::Randomized { spread } => (s.z + spread * (s.u - 0.5)) / root_w,
        })
    }
}

/// Monte Carlo Bayes risk `E l(ξ(Z, W, U) − θ)` over `reps` draws; draw `i`
/// uses stream `i` of the limit domain.
pub fn bayes_risk_mc(
    xi: &LimitEstimator,
    sampler: &LimitSampler,
    reps: usize,
    streams: &StreamFactory,
) -> Result<McEstimate> {
    let losses = limit_losses(&[*xi], sampler, reps, streams)?;
    Ok(McEstimate::from_samples(&losses[0]))
}

/// Per-draw losses of several estimators on common draws.
pub fn limit_losses(
    xis: &[LimitEstimator],
    sampler: &LimitSampler,
    reps: usize,
    streams: &StreamFactory,
) -> Result<Vec<Vec<f64>>> {
    if reps < 1000 {
        return Err(Error::invalid(format!("reps must be at least 1000, got {reps}")));
    }
    let rows: Vec<Vec<f64>> = (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(domain::LIMIT, i);
            let s = sampler.draw(&mut rng)?;
            xis.iter().map(|xi| Ok(sampler.loss().eval(xi.evaluate(&s, sampler)? - s.theta))).collect()
        })
        .collect::<Result<_>>()?;
    Ok((0..xis.len()).map(|k| rows.iter().map(|row| row[k]).collect()).collect())
}

/// Total-variation distance between the closed-form posterior and a
/// discretised Bayes update on `points` equally spaced `θ` values in
/// `[−8σ, 8σ]`.
pub fn posterior_grid_tv(w: f64, z: f64, sigma: f64, beta0: f64, points: usize) -> Result<f64> {
    let p = posterior_with_beta0(w, z, sigma, beta0)?;
    let lo = -8.0 * sigma;
    let step = 16.0 * sigma / (points - 1) as f64;
    let grid: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    let log_unnorm: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let resid = z - t * w.sqrt() - beta0;
            -0.5 * (t / sigma).powi(2) - 0.5 * resid * resid
        })
        .collect();
    let max = log_unnorm.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bayes: Vec<f64> = log_unnorm.iter().map(|v| (v - max).exp()).collect();
    let closed: Vec<f64> =
        grid.iter().map(|&t| normal_pdf((t - p.mean) / p.variance.sqrt())).collect();
    let (sb, sc): (f64, f64) = (bayes.iter().sum(), closed.iter().sum());
    Ok(0.5 * bayes.iter().zip(&closed).map(|(b, c)| (b / sb - c / sc).abs()).sum::<f64>())
}
