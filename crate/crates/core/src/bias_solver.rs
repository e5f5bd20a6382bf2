//! Conditional expected loss `h(β, w)` and its minimiser `β₀(w)`.
//!
//! With `Y ~ N(0, 1/w)` and `s = w^{-1/2}`,
//!
//! ```text
//! h(β, w) = E l(sβ − Y) = ∫ l(s(β − z)) φ(z) dz.
//! ```
//!
//! The standardised integral is evaluated with Gauss–Legendre panels on
//! `[−12, 12]`, split at every non-smooth point of the loss. For an
//! untruncated LINEX loss the integrand `e^{a s(β − z)} φ(z)` has its mass
//! near `z = −a s`, so a second window is centred there and the integrand is
//! formed in log space.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{LossKind, LossSpec};
use crate::minimize::golden_section;
use crate::mixing::{Expectation, MixingDensity};
use crate::quadrature::{panel_integrate, PANEL_ORDER};
use crate::stats::normal_quantile;

const Z_HALF_WIDTH: f64 = 12.0;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const BRACKET_DOUBLINGS: usize = 4;

/// Numerical settings for [`h_value`] and [`solve_beta0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Beta0Config {
    /// Node budget on the standard window `[−12, 12]`; more nodes mean
    /// narrower panels.
    pub quad_nodes: usize,
    /// Half-width of the initial search bracket in units of `max(1, w^{-1/2})`.
    pub bracket_halfwidth: f64,
    pub min_tol: f64,
    pub max_iter: usize,
}

impl Default for Beta0Config {
    fn default() -> Self {
        Self { quad_nodes: 64, bracket_halfwidth: 50.0, min_tol: 1e-10, max_iter: 200 }
    }
}

impl Beta0Config {
    pub fn validate(&self) -> Result<()> {
        if self.quad_nodes < 16 {
            return Err(Error::invalid(format!("quad_nodes must be at least 16, got {}", self.quad_nodes)));
        }
        if !(self.min_tol > 0.0 && self.min_tol.is_finite()) {
            return Err(Error::invalid("min_tol must be positive"));
        }
        if !(self.bracket_halfwidth > 0.0 && self.bracket_halfwidth.is_finite()) {
            return Err(Error::invalid("bracket_halfwidth must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be positive"));
        }
        Ok(())
    }

    fn panel_width(&self) -> f64 {
        (2.0 * Z_HALF_WIDTH * PANEL_ORDER as f64 / self.quad_nodes as f64).min(3.0)
    }
}

/// Minimiser of `h(·, w)` and the minimum value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beta0Result {
    pub beta0: f64,
    pub h_min: f64,
    pub iterations: usize,
    /// `false` when the minimiser is still on the boundary after all bracket
    /// doublings.
    pub converged: bool,
}

/// `E l_cap(c − s Z)` restricted to `Z ∈ [z_lo, z_hi]`, with the loss's
/// non-smooth points precomputed.
struct Kernel<'a> {
    loss: &'a LossSpec,
    breaks: Vec<f64>,
    growth: f64,
    width: f64,
}

impl<'a> Kernel<'a> {
    fn new(loss: &'a LossSpec, cfg: &Beta0Config) -> Self {
        Self { loss, breaks: loss.breakpoints(), growth: loss.growth_rate(), width: cfg.panel_width() }
    }

    /// Returns `+∞` when the integrand overflows; NaN values are errors.
    fn expect(&self, c: f64, s: f64, z_lo: f64, z_hi: f64) -> Result<f64> {
        let z_breaks: Vec<f64> = self.breaks.iter().map(|d| (c - d) / s).collect();
        let mut windows = vec![(-Z_HALF_WIDTH, Z_HALF_WIDTH)];
        if self.growth != 0.0 {
            let centre = -self.growth * s;
            let tilt = (centre - Z_HALF_WIDTH, centre + Z_HALF_WIDTH);
            let base = windows[0];
            if tilt.1 >= base.0 && tilt.0 <= base.1 {
                windows[0] = (base.0.min(tilt.0), base.1.max(tilt.1));
            } else {
                windows.push(tilt);
            }
        }
        let loss = self.loss;
        let log_space = self.growth != 0.0;
        let integrand = |z: f64| {
            let delta = c - s * z;
            if log_space {
                (loss.ln_eval(delta) - 0.5 * z * z - LN_SQRT_2PI).exp()
            } else {
                loss.eval(delta) * (-0.5 * z * z - LN_SQRT_2PI).exp()
            }
        };
        let mut total = 0.0;
        for (lo, hi) in windows {
            let (lo, hi) = (lo.max(z_lo), hi.min(z_hi));
            match panel_integrate(integrand, lo, hi, &z_breaks, self.width) {
                Ok(v) => total += v,
                Err(Error::NonFinite { value, .. }) if value == f64::INFINITY => return Ok(f64::INFINITY),
                Err(e) => return Err(e),
            }
        }
        Ok(total)
    }
}

fn check_w(w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("w must be positive and finite, got {w}")))
    }
}

fn finite_or_error(v: f64, beta: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { node: beta, value: v })
    }
}

/// `h(β, w) = E l(w^{-1/2}β − Y)` with `Y ~ N(0, 1/w)`.
pub fn h_value(loss: &LossSpec, beta: f64, w: f64, cfg: &Beta0Config) -> Result<f64> {
    check_w(w)?;
    cfg.validate()?;
    let s = w.sqrt().recip();
    let v = Kernel::new(loss, cfg).expect(s * beta, s, f64::NEG_INFINITY, f64::INFINITY)?;
    finite_or_error(v, beta)
}

/// Minimises `h(·, w)` by golden-section search.
///
/// The bracket starts at `±bracket_halfwidth · max(1, w^{-1/2})` and is
/// doubled up to four times while the minimiser sits on its boundary.
pub fn solve_beta0(loss: &LossSpec, w: f64, cfg: &Beta0Config) -> Result<Beta0Result> {
    check_w(w)?;
    cfg.validate()?;
    let s = w.sqrt().recip();
    let kernel = Kernel::new(loss, cfg);
    let guess = closed_form_beta0(&loss.untruncated(), w);
    minimise(loss, s, guess, cfg, |beta| kernel.expect(s * beta, s, f64::NEG_INFINITY, f64::INFINITY))
}

fn minimise<F>(loss: &LossSpec, s: f64, guess: Option<f64>, cfg: &Beta0Config, objective: F) -> Result<Beta0Result>
where
    F: Fn(f64) -> Result<f64>,
{
    if loss.is_symmetric() {
        let h_min = finite_or_error(objective(0.0)?, 0.0)?;
        return Ok(Beta0Result { beta0: 0.0, h_min, iterations: 0, converged: true });
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let f = |beta: f64| match objective(beta) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let mut half = cfg.bracket_halfwidth * s.max(1.0);
    let mut iterations = 0;
    for attempt in 0..=BRACKET_DOUBLINGS {
        let (lo, hi, scanned) = locate(&f, half, guess.map(|g| g.clamp(-half, half)));
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        let m = golden_section(f, lo, hi, cfg.min_tol, cfg.max_iter);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        iterations += scanned + m.iterations;
        let edge = 2.0 * (1e-7 * (1.0 + m.x.abs())).max(cfg.min_tol);
        let interior = m.x - (-half) > edge && half - m.x > edge;
        if interior || attempt == BRACKET_DOUBLINGS {
            let h_min = finite_or_error(m.value, m.x)?;
            return Ok(Beta0Result { beta0: m.x, h_min, iterations, converged: interior });
        }
        half *= 2.0;
    }
    unreachable!()
}

/// Coarse scan over `0, ±1/2, ±1, ±2, …` up to `±half` (plus `guess`), so
/// that plateaus of a truncated loss cannot mislead the golden-section
/// search. Returns the grid cell around the best point and the number of
/// evaluations.
fn locate<F: Fn(f64) -> f64>(f: &F, half: f64, guess: Option<f64>) -> (f64, f64, usize) {
    let mut pts = vec![0.0, -half, half];
    let mut d = 0.5;
    while d < half {
        pts.extend([-d, d]);
        d *= 2.0;
    }
    if let Some(g) = guess {
        pts.extend([g - 0.5, g, g + 0.5].iter().map(|x| x.clamp(-half, half)));
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let vals: Vec<f64> = pts.iter().map(|&x| f(x)).collect();
    let best = (0..pts.len())
        .min_by(|&i, &j| {
            let (a, b) = (vals[i], vals[j]);
            let a = if a.is_nan() { f64::INFINITY } else { a };
            let b = if b.is_nan() { f64::INFINITY } else { b };
            a.total_cmp(&b).then(pts[i].abs().total_cmp(&pts[j].abs()))
        })
        .unwrap_or(0);
    let lo = if best == 0 { pts[0] } else { pts[best - 1] };
    let hi = if best + 1 == pts.len() { pts[best] } else { pts[best + 1] };
    (lo, hi, pts.len())
}

fn truncated_at(loss: &LossSpec, a: f64) -> Result<LossSpec> {
    let cap = loss.truncation().map_or(a, |t| t.min(a));
    loss.truncated(cap)
}

fn check_tilde_args(a: f64, b: f64, lambda: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0 && lambda >= 0.0) || a.is_nan() || b.is_nan() || !lambda.is_finite() {
        return Err(Error::invalid(format!("need a > 0, b > 0, λ ≥ 0; got a={a}, b={b}, λ={lambda}")));
    }
    Ok(())
}

/// `h̃(β, w) = ∫_{−√b}^{√b} l_a(w^{-1/2}β − y) φ(y; 0, ((1+λ)w)^{-1}) dy`.
pub fn h_tilde_value(
    loss: &LossSpec,
    beta: f64,
    w: f64,
    a: f64,
    b: f64,
    lambda: f64,
    cfg: &Beta0Config,
) -> Result<f64> {
    check_w(w)?;
    cfg.validate()?;
    check_tilde_args(a, b, lambda)?;
    let capped = truncated_at(loss, a)?;
    let sd = ((1.0 + lambda) * w).sqrt().recip();
    let z_max = b.sqrt() / sd;
    let v = Kernel::new(&capped, cfg).expect(beta / w.sqrt(), sd, -z_max, z_max)?;
    finite_or_error(v, beta)
}

/// Minimiser of [`h_tilde_value`] over `β`.
pub fn solve_beta_tilde(
    loss: &LossSpec,
    w: f64,
    a: f64,
    b: f64,
    lambda: f64,
    cfg: &Beta0Config,
) -> Result<Beta0Result> {
    check_w(w)?;
    cfg.validate()?;
    check_tilde_args(a, b, lambda)?;
    let capped = truncated_at(loss, a)?;
    let s = w.sqrt().recip();
    let sd = ((1.0 + lambda) * w).sqrt().recip();
    let z_max = b.sqrt() / sd;
    let kernel = Kernel::new(&capped, cfg);
    let guess = closed_form_beta0(&loss.untruncated(), w);
    minimise(&capped, s, guess, cfg, |beta| kernel.expect(s * beta, sd, -z_max, z_max))
}

/// Runs `f` under `g`, turning solver failures inside the integrand into
/// the returned error.
pub(crate) fn expect_with<F>(g: &MixingDensity, f: F) -> Result<Expectation>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let out = g.expect(|w| match f(w) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    });
    match failure.into_inner() {
        Some(e) => Err(e),
        None => out,
    }
}

fn converged(r: Beta0Result, w: f64, cfg: &Beta0Config) -> Result<Beta0Result> {
    if r.converged {
        Ok(r)
    } else {
        let s = w.sqrt().recip();
        Err(Error::BracketBoundary {
            at: r.beta0,
            half_width: cfg.bracket_halfwidth * s.max(1.0) * (1u32 << BRACKET_DOUBLINGS) as f64,
        })
    }
}

/// `E β₀(W)` under `g`, or divergence.
pub fn expected_beta0(loss: &LossSpec, g: &MixingDensity, cfg: &Beta0Config) -> Result<Expectation> {
    cfg.validate()?;
    expect_with(g, |w| Ok(converged(solve_beta0(loss, w, cfg)?, w, cfg)?.beta0))
}

/// Conditional minimum risk `h(β₀(w), w)` with an error on an unconverged
/// solve.
pub(crate) fn h_min_converged(loss: &LossSpec, w: f64, cfg: &Beta0Config) -> Result<f64> {
    Ok(converged(solve_beta0(loss, w, cfg)?, w, cfg)?.h_min)
}

/// Closed-form `h(β, w)` for LINEX.
pub fn linex_h(a: f64, b: f64, beta: f64, w: f64) -> f64 {
    let x = a * beta / w.sqrt();
    b * ((x + a * a / (2.0 * w)).exp() - x - 1.0)
}

/// Closed-form `β₀(w) = −a / (2√w)` for LINEX.
pub fn linex_beta0(a: f64, w: f64) -> f64 {
    -a / (2.0 * w.sqrt())
}

/// Closed-form minimum `b a² / (2w)` for LINEX.
pub fn linex_h_min(a: f64, b: f64, w: f64) -> f64 {
    b * a * a / (2.0 * w)
}

/// `β₀ = Φ^{-1}(C₂ / (C₁ + C₂))` for the untruncated check loss, for every `w`.
pub fn check_beta0(c1: f64, c2: f64) -> f64 {
    normal_quantile(c2 / (c1 + c2))
}

/// Closed-form `β₀(w)` when one is available for the loss as configured.
pub fn closed_form_beta0(loss: &LossSpec, w: f64) -> Option<f64> {
    if loss.truncation().is_some() {
        return None;
    }
    match *loss.kind() {
        LossKind::Linex { a, .. } => Some(linex_beta0(a, w)),
        LossKind::Check { c1, c2 } => Some(check_beta0(c1, c2)),
        LossKind::Squared => Some(0.0),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::SymmetricBase;
    use proptest::prelude::*;

    fn cfg() -> Beta0Config {
        Beta0Config::default()
    }

    #[test]
    fn linex_h_examples() {
        let l = LossSpec::linex(1.0, 1.0).unwrap();
        let h = h_value(&l, 0.0, 1.0, &cfg()).unwrap();
        assert!((h - 0.648_721_270_700_128_1).abs() < 1e-8, "{h}");
        let h = h_value(&l, -0.5, 1.0, &cfg()).unwrap();
        assert!((h - 0.5).abs() < 1e-8, "{h}");
    }

    #[test]
    fn squared_h_is_variance() {
        for w in [0.25, 1.0, 4.0] {
            let h = h_value(&LossSpec::squared(), 0.0, w, &cfg()).unwrap();
            assert!((h - 1.0 / w).abs() < 1e-10);
        }
    }

    #[test]
    fn linex_quadrature_matches_closed_form() {
        for a in [0.5, 1.0, 2.0, -1.5] {
            for w in [1e-2, 0.25, 1.0, 4.0, 100.0] {
                let l = LossSpec::linex(a, 2.0).unwrap();
                for beta in [-3.0, -0.7, 0.0, 0.4, 2.0] {
                    let exact = linex_h(a, 2.0, beta, w);
                    let h = h_value(&l, beta, w, &cfg()).unwrap();
                    assert!((h - exact).abs() <= 1e-9 * exact.max(1.0), "a={a} w={w} β={beta}: {h} vs {exact}");
                }
            }
        }
    }

    #[test]
    fn linex_oracle_grid() {
        for a in [0.5, 1.0, 2.0] {
            for b in [1.0, 3.0] {
                for w in [0.25, 1.0, 4.0] {
                    let l = LossSpec::linex(a, b).unwrap();
                    let r = solve_beta0(&l, w, &cfg()).unwrap();
                    assert!(r.converged);
                    assert!((r.beta0 - linex_beta0(a, w)).abs() <= 1e-8, "a={a} b={b} w={w}: {}", r.beta0);
                    assert!((r.h_min - linex_h_min(a, b, w)).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn named_solver_examples() {
        let r = solve_beta0(&LossSpec::linex(1.0, 1.0).unwrap(), 1.0, &cfg()).unwrap();
        assert!((r.beta0 + 0.5).abs() < 1e-8);
        let r = solve_beta0(&LossSpec::linex(2.0, 1.0).unwrap(), 4.0, &cfg()).unwrap();
        assert!((r.beta0 + 0.5).abs() < 1e-8);
        for w in [0.1, 1.0, 7.0] {
            assert_eq!(solve_beta0(&LossSpec::squared(), w, &cfg()).unwrap().beta0, 0.0);
        }
        let r = solve_beta0(&LossSpec::check(2.0, 1.0).unwrap(), 1.0, &cfg()).unwrap();
        assert!((r.beta0 + 0.430_727_299_295_457_5).abs() < 1e-7, "{}", r.beta0);
    }

    #[test]
    fn check_loss_beta0_is_constant_in_w() {
        // brute-force grid minimisers computed independently with scipy
        let cases = [((2.0, 1.0), -0.430_727_3), ((4.0, 1.0), -0.841_621_2), ((1.0, 3.0), 0.674_489_8)];
        for ((c1, c2), grid) in cases {
            let l = LossSpec::check(c1, c2).unwrap();
            let exact = check_beta0(c1, c2);
            assert!((exact - grid).abs() < 1e-6);
            for w in [0.25, 1.0, 4.0] {
                let r = solve_beta0(&l, w, &cfg()).unwrap();
                assert!((r.beta0 - exact).abs() < 1e-6, "({c1},{c2}) w={w}: {}", r.beta0);
            }
        }
    }

    #[test]
    fn direction_of_correction() {
        for w in [0.25, 1.0, 4.0] {
            assert!(solve_beta0(&LossSpec::linex(1.0, 1.0).unwrap(), w, &cfg()).unwrap().beta0 < 0.0);
            assert!(solve_beta0(&LossSpec::linex(-1.0, 1.0).unwrap(), w, &cfg()).unwrap().beta0 > 0.0);
            assert!(solve_beta0(&LossSpec::check(3.0, 1.0).unwrap(), w, &cfg()).unwrap().beta0 < 0.0);
            assert!(solve_beta0(&LossSpec::check(1.0, 3.0).unwrap(), w, &cfg()).unwrap().beta0 > 0.0);
            let heavy_over = LossSpec::weighted_asym(2.0, SymmetricBase::Squared, 1.0).unwrap();
            assert!(solve_beta0(&heavy_over, w, &cfg()).unwrap().beta0 < 0.0);
        }
    }

    #[test]
    fn local_optimality_and_convexity() {
        let c = cfg();
        for l in [LossSpec::linex(1.0, 1.0).unwrap(), LossSpec::check(4.0, 1.0).unwrap()] {
            for w in [0.25, 1.0, 4.0] {
                let r = solve_beta0(&l, w, &c).unwrap();
                for d in [-10.0 * c.min_tol, 10.0 * c.min_tol] {
                    assert!(h_value(&l, r.beta0 + d, w, &c).unwrap() >= r.h_min - 1e-12);
                }
                assert!((h_value(&l, r.beta0, w, &c).unwrap() - r.h_min).abs() < 1e-12);
                let grid: Vec<f64> = (0..21).map(|i| -5.0 + 0.5 * i as f64).collect();
                let hs: Vec<f64> = grid.iter().map(|&b| h_value(&l, b, w, &c).unwrap()).collect();
                for i in 1..20 {
                    assert!(hs[i] <= 0.5 * (hs[i - 1] + hs[i + 1]) + 1e-12, "{l} w={w} at {}", grid[i]);
                }
            }
        }
    }

    #[test]
    fn bracket_is_widened_for_distant_minimisers() {
        let narrow = Beta0Config { bracket_halfwidth: 1.0, ..cfg() };
        let l = LossSpec::linex(20.0, 1.0).unwrap();
        let r = solve_beta0(&l, 1.0, &narrow).unwrap();
        assert!(r.converged);
        assert!((r.beta0 + 10.0).abs() < 1e-7);
        let narrower = Beta0Config { bracket_halfwidth: 0.5, ..cfg() };
        let r = solve_beta0(&l, 1.0, &narrower).unwrap();
        assert!(!r.converged);
        assert!((r.beta0 + 8.0).abs() < 1e-6);
    }

    #[test]
    fn config_validation() {
        let bad = Beta0Config { quad_nodes: 8, ..cfg() };
        assert!(matches!(h_value(&LossSpec::squared(), 0.0, 1.0, &bad), Err(Error::InvalidParameter(_))));
        let bad = Beta0Config { min_tol: 0.0, ..cfg() };
        assert!(solve_beta0(&LossSpec::squared(), 1.0, &bad).is_err());
        assert!(h_value(&LossSpec::squared(), 0.0, 0.0, &cfg()).is_err());
    }

    #[test]
    fn overflowing_integrand_is_reported() {
        let l = LossSpec::linex(1.0, 1.0).unwrap();
        match h_value(&l, 1e4, 1.0, &cfg()) {
            Err(Error::NonFinite { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn h_tilde_limits() {
        let c = cfg();
        let check = LossSpec::check(1.0, 1.0).unwrap();
        let h = h_value(&check, 0.0, 1.0, &c).unwrap();
        let ht = h_tilde_value(&check, 0.0, 1.0, 1e6, 400.0, 0.0, &c).unwrap();
        assert!((h - ht).abs() < 1e-8);
        for l in [LossSpec::linex(1.0, 1.0).unwrap(), LossSpec::check(4.0, 1.0).unwrap(), LossSpec::squared()] {
            for beta in [-1.0, -0.5, 0.0] {
                let h = h_value(&l, beta, 1.0, &c).unwrap();
                let ht = h_tilde_value(&l, beta, 1.0, 1e6, 400.0, 1e-6, &c).unwrap();
                assert!((h - ht).abs() < 1e-6, "{l} β={beta}: {h} vs {ht}");
            }
        }
        // the window variance enters the LINEX closed form through a²/(2(1+λ)w)
        let l = LossSpec::linex(1.0, 1.0).unwrap();
        let lambda: f64 = 1e-3;
        let exact = (0.5f64 + 0.5 / (1.0 + lambda)).exp() - 0.5 - 1.0;
        let ht = h_tilde_value(&l, 0.5, 1.0, 1e6, 400.0, lambda, &c).unwrap();
        assert!((ht - exact).abs() < 1e-9, "{ht} vs {exact}");
        for beta in [-20.0, -1.0, 0.0, 3.0, 20.0] {
            assert!(h_tilde_value(&l, beta, 1.0, 0.1, 400.0, 0.5, &c).unwrap() <= 0.1 + 1e-15);
        }
    }

    #[test]
    fn beta_tilde_approaches_beta0() {
        let c = cfg();
        let l = LossSpec::linex(1.0, 1.0).unwrap();
        let r = solve_beta_tilde(&l, 1.0, 1e6, 400.0, 1e-6, &c).unwrap();
        assert!((r.beta0 + 0.5).abs() < 1e-4, "{}", r.beta0);
        let gaps: Vec<f64> = [10.0, 1e2, 1e6]
            .iter()
            .map(|&a| (solve_beta_tilde(&l, 1.0, a, 400.0, 1e-6, &c).unwrap().beta0 + 0.5).abs())
            .collect();
        assert!(gaps[0] >= gaps[1] && gaps[1] >= gaps[2], "{gaps:?}");
        for (a, b, lambda) in [(1.0, 1.0, 0.5), (10.0, 4.0, 0.1)] {
            assert_eq!(solve_beta_tilde(&LossSpec::squared(), 2.0, a, b, lambda, &c).unwrap().beta0, 0.0);
        }
    }

    #[test]
    fn expected_beta0_examples() {
        let c = cfg();
        let l = LossSpec::linex(1.0, 1.0).unwrap();
        let v = expected_beta0(&l, &MixingDensity::point_mass(1.0).unwrap(), &c).unwrap();
        assert!((v.finite().unwrap() + 0.5).abs() < 1e-8);
        let v = expected_beta0(&l, &MixingDensity::exp_unit(), &c).unwrap().finite().unwrap();
        assert!((v + 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-6, "{v}");
        assert!(expected_beta0(&l, &MixingDensity::chi_squared_1(), &c).unwrap().is_divergent());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(closed_form_beta0(&LossSpec::linex(2.0, 1.0).unwrap(), 4.0), Some(-0.5));
        assert_eq!(closed_form_beta0(&LossSpec::check(4.0, 1.0).unwrap().truncated(50.0).unwrap(), 1.0), None);
        assert!((linex_h(1.0, 1.0, 0.0, 1.0) - (0.5f64.exp() - 1.0)).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn linex_solver_matches_closed_form(a in 0.2f64..3.0, b in 0.5f64..4.0, lw in -2.0f64..2.0) {
            let w = lw.exp();
            let r = solve_beta0(&LossSpec::linex(a, b).unwrap(), w, &cfg()).unwrap();
            prop_assert!((r.beta0 - linex_beta0(a, w)).abs() < 1e-7);
            prop_assert!((r.h_min - linex_h_min(a, b, w)).abs() < 1e-8 * linex_h_min(a, b, w).max(1.0));
        }

        #[test]
        fn h_is_nonnegative(beta in -10.0f64..10.0, lw in -3.0f64..3.0, c1 in 0.1f64..5.0, c2 in 0.1f64..5.0) {
            let l = LossSpec::check(c1, c2).unwrap().truncated(50.0).unwrap();
            prop_assert!(h_value(&l, beta, lw.exp(), &cfg()).unwrap() >= 0.0);
        }
    }
}
