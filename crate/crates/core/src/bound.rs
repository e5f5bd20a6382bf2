//! Local asymptotic minimax lower bound `E_g[h(β₀(W), W)]`.

use crate::bias_solver::{expect_with, h_min_converged, Beta0Config};
use crate::error::{Error, Result};
use crate::losses::LossSpec;
use crate::mixing::{Expectation, MixingDensity};

/// Mixed conditional minimum risk, or divergence when the mixing integral
/// does not converge.
pub fn minimax_bound(loss: &LossSpec, g: &MixingDensity, cfg: &Beta0Config) -> Result<Expectation> {
    cfg.validate()?;
    expect_with(g, |w| h_min_converged(loss, w, cfg))
}

/// The bound for `l_a = min(l, a)`; `β₀` is re-solved under the truncated
/// loss. An existing truncation level on `loss` is replaced by `a_trunc`.
pub fn minimax_bound_truncated(
    loss: &LossSpec,
    a_trunc: f64,
    g: &MixingDensity,
    cfg: &Beta0Config,
) -> Result<f64> {
    let truncated = loss.truncated(a_trunc)?;
    minimax_bound(&truncated, g, cfg)?.finite().map_err(|_| {
        Error::invalid(format!("bound for loss truncated at {a_trunc} did not converge"))
    })
}
