//! Estimators compared by the risk harness.
//!
//! Every estimator has the form `T_n = θ̂_n + δ_n c(W_n)` for a shift
//! function `c` of the observed information, so its normalised error is
//! `δ_n^{-1}(θ̂_n − θ₀) + c(W_n) − h` at `θ = θ₀ + δ_n h`.

use serde::{Deserialize, Serialize};

use crate::bias_solver::{solve_beta0, Beta0Config};
use crate::error::{Error, Result};
use crate::losses::LossSpec;
use crate::models::{local_stats, LocalStats, Model, Trajectory};

/// A shift `c(w)` applied in normalised units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShiftFn {
    Constant { c: f64 },
    /// `factor · w^{-1/2} β₀(w)` for the given loss.
    CorrectionMultiple { loss: LossSpec, factor: f64 },
    /// `coef · w^power`.
    Power { coef: f64, power: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum EstimatorSpec {
    Mle,
    /// `θ̂_n + δ_n W_n^{-1/2} β₀(W_n)`, with `β₀` solved for `loss`.
    Corrected { loss: LossSpec },
    Shifted { shift: ShiftFn },
}

impl EstimatorSpec {
    pub fn corrected(loss: LossSpec) -> Self {
        EstimatorSpec::Corrected { loss }
    }

    pub fn shifted(shift: ShiftFn) -> Self {
        EstimatorSpec::Shifted { shift }
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            EstimatorSpec::Mle => "mle".into(),
            EstimatorSpec::Corrected { loss } => format!("corrected[{loss}]"),
            EstimatorSpec::Shifted { shift } => match shift {
                ShiftFn::Constant { c } => format!("shifted[c={c}]"),
                ShiftFn::CorrectionMultiple { loss, factor } => format!("shifted[{factor}x {loss}]"),
                ShiftFn::Power { coef, power } => format!("shifted[{coef}w^{power}]"),
            },
        }
    }

    /// The loss whose `β₀` the shift needs, if any.
    pub fn correction_loss(&self) -> Option<&LossSpec> {
        match self {
            EstimatorSpec::Corrected { loss } => Some(loss),
            EstimatorSpec::Shifted { shift: ShiftFn::CorrectionMultiple { loss, .. } } => Some(loss),
            _ => None,
        }
    }

    /// `c(w)`; `beta0` supplies `β₀(w)` for [`Self::correction_loss`].
    pub fn shift_with<F>(&self, w: f64, beta0: F) -> Result<f64>
    where
        F: FnOnce(&LossSpec) -> Result<f64>,
    {
        Ok(match self {
            EstimatorSpec::Mle => 0.0,
            EstimatorSpec::Corrected { loss } => beta0(loss)? / w.sqrt(),
            EstimatorSpec::Shifted { shift } => match shift {
                ShiftFn::Constant { c } => *c,
                ShiftFn::CorrectionMultiple { loss, factor } => factor * beta0(loss)? / w.sqrt(),
                ShiftFn::Power { coef, power } => coef * w.powf(*power),
            },
        })
    }

    /// `c(w)` with `β₀` solved on demand.
    pub fn shift(&self, w: f64, cfg: &Beta0Config) -> Result<f64> {
        self.shift_with(w, |loss| converged_beta0(loss, w, cfg))
    }
}

/// `β₀(w)`, with an error when the solver stopped on its bracket boundary.
pub fn converged_beta0(loss: &LossSpec, w: f64, cfg: &Beta0Config) -> Result<f64> {
    let r = solve_beta0(loss, w, cfg)?;
    if r.converged {
        Ok(r.beta0)
    } else {
        Err(Error::BracketBoundary { at: r.beta0, half_width: cfg.bracket_halfwidth })
    }
}

/// `T_n` with statistics evaluated at `theta0_eval`.
pub fn estimate(
    spec: &EstimatorSpec,
    model: &Model,
    traj: &Trajectory,
    theta0_eval: f64,
    cfg: &Beta0Config,
) -> Result<f64> {
    let s = local_stats(model, traj, theta0_eval)?;
    Ok(s.mle + s.delta_n * spec.shift(s.w_n, cfg)?)
}

/// `δ_n^{-1}(T_n − θ)` for `θ = θ₀ + δ_n h`, from precomputed statistics.
pub fn normalized_error_from_stats(spec: &EstimatorSpec, stats: &LocalStats, h: f64, cfg: &Beta0Config) -> Result<f64> {
    Ok(stats.scaled_mle_error + spec.shift(stats.w_n, cfg)? - h)
}

/// `δ_n^{-1}(T_n − θ)` at the local parameter `θ = θ₀ + δ_n h`.
pub fn normalized_error_local(
    spec: &EstimatorSpec,
    model: &Model,
    traj: &Trajectory,
    theta0_eval: f64,
    h: f64,
    cfg: &Beta0Config,
) -> Result<f64> {
    let s = local_stats(model, traj, theta0_eval)?;
    normalized_error_from_stats(spec, &s, h, cfg)
}

/// `δ_n^{-1}(T_n − θ_true)`. Prefer [`normalized_error_local`] when `θ_true`
/// is a local parameter, since `θ_true − θ₀` loses digits.
pub fn normalized_error(
    spec: &EstimatorSpec,
    model: &Model,
    traj: &Trajectory,
    theta_true: f64,
    theta0_eval: f64,
    cfg: &Beta0Config,
) -> Result<f64> {
    let s = local_stats(model, traj, theta0_eval)?;
    let h = (theta_true - theta0_eval) / s.delta_n;
    normalized_error_from_stats(spec, &s, h, cfg)
}
