//! Laws of the mixing variable `W` and integrals against them.
//!
//! Integrals over `(0, ∞)` are split at `w = 1` and taken in `u = ln w`. The
//! lower part is accumulated decade by decade over the cutoffs
//! `ε_k = 10^{-k}`, `k = 1..=12`; the behaviour of the per-decade increments
//! decides between a finite value and divergence:
//!
//! * two consecutive increments below `1e-10`: converged;
//! * increments shrinking geometrically: converged, the remaining tail
//!   below `ε_12` is added as the geometric remainder;
//! * increments not shrinking, or a partial value above `1e8`: divergent.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, AdaptiveTol};

/// Finite value or divergence of an integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Expectation {
    Finite(f64),
    Divergent,
}

impl Expectation {
    pub fn value(self) -> Option<f64> {
        match self {
            Expectation::Finite(v) => Some(v),
            Expectation::Divergent => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Expectation::Divergent)
    }

    /// The finite value, or [`Error::Divergent`].
    pub fn finite(self) -> Result<f64> {
        self.value().ok_or(Error::Divergent)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixingKind {
    #[serde(rename = "chi2_1")]
    ChiSquared1,
    #[serde(rename = "exp1")]
    ExpUnit,
    #[serde(rename = "point")]
    PointMass { w0: f64 },
    /// Piecewise-linear density through `(nodes[i], densities[i])`, zero
    /// outside `[nodes[0], nodes[last]]`.
    Tabulated { nodes: Vec<f64>, densities: Vec<f64> },
}

/// The law `g(w)` of `W`, supported on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MixingKind", into = "MixingKind")]
pub struct MixingDensity {
    kind: MixingKind,
}

impl TryFrom<MixingKind> for MixingDensity {
    type Error = Error;

    fn try_from(kind: MixingKind) -> Result<Self> {
        MixingDensity::new(kind)
    }
}

impl From<MixingDensity> for MixingKind {
    fn from(g: MixingDensity) -> Self {
        g.kind
    }
}

const LOWER_DECADES: i32 = 12;
const CAUCHY_TOL: f64 = 1e-10;
const GROWTH_LIMIT: f64 = 1e8;
const MAX_TAIL_RATIO: f64 = 0.98;

impl MixingDensity {
    /// Validates the parameters; a tabulated density is renormalised to
    /// integrate to one.
    pub fn new(kind: MixingKind) -> Result<Self> {
        let kind = match kind {
            MixingKind::PointMass { w0 } => {
                if !(w0.is_finite() && w0 > 0.0) {
                    return Err(Error::invalid(format!("point mass location must be positive, got {w0}")));
                }
                MixingKind::PointMass { w0 }
            }
            MixingKind::Tabulated { nodes, densities } => {
                if nodes.len() < 2 || nodes.len() != densities.len() {
                    return Err(Error::invalid("tabulated density needs at least two nodes"));
                }
                if !(nodes[0] > 0.0) || nodes.windows(2).any(|p| !(p[1] > p[0])) {
                    return Err(Error::invalid("tabulated nodes must be positive and strictly increasing"));
                }
                if densities.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                    return Err(Error::invalid("tabulated densities must be finite and non-negative"));
                }
                let mass: f64 = nodes
                    .windows(2)
                    .zip(densities.windows(2))
                    .map(|(x, d)| 0.5 * (x[1] - x[0]) * (d[0] + d[1]))
                    .sum();
                if !(mass > 0.0) {
                    return Err(Error::invalid("tabulated density has zero mass"));
                }
                let densities = densities.iter().map(|d| d / mass).collect();
                MixingKind::Tabulated { nodes, densities }
            }
            other => other,
        };
        Ok(Self { kind })
    }

    pub fn chi_squared_1() -> Self {
        Self { kind: MixingKind::ChiSquared1 }
    }

    pub fn exp_unit() -> Self {
        Self { kind: MixingKind::ExpUnit }
    }

    pub fn point_mass(w0: f64) -> Result<Self> {
        Self::new(MixingKind::PointMass { w0 })
    }

    pub fn tabulated(nodes: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        Self::new(MixingKind::Tabulated { nodes, densities })
    }

    pub fn kind(&self) -> &MixingKind {
        &self.kind
    }

    /// Location of the atom for a point mass.
    pub fn atom(&self) -> Option<f64> {
        match self.kind {
            MixingKind::PointMass { w0 } => Some(w0),
            _ => None,
        }
    }

    /// Lebesgue density `g(w)`; `None` for a point mass, which has none.
    pub fn density(&self, w: f64) -> Option<f64> {
        if let MixingKind::PointMass { .. } = self.kind {
            return None;
        }
        if !(w > 0.0) {
            return Some(0.0);
        }
        Some(match &self.kind {
            MixingKind::ChiSquared1 => (-0.5 * w).exp() / (2.0 * std::f64::consts::PI * w).sqrt(),
            MixingKind::ExpUnit => (-w).exp(),
            MixingKind::Tabulated { nodes, densities } => {
                if w < nodes[0] || w > nodes[nodes.len() - 1] {
                    0.0
                } else {
                    let i = (nodes.partition_point(|&x| x <= w) - 1).min(nodes.len() - 2);
                    let t = (w - nodes[i]) / (nodes[i + 1] - nodes[i]);
                    densities[i] + t * (densities[i + 1] - densities[i])
                }
            }
            MixingKind::PointMass { .. } => unreachable!(),
        })
    }

    /// Density for continuous laws, probability mass for the atom of a
    /// point mass (1 at `w0`, 0 elsewhere).
    pub fn weight(&self, w: f64) -> f64 {
        match self.kind {
            MixingKind::PointMass { w0 } => {
                if w == w0 {
                    1.0
                } else {
                    0.0
                }
            }
            _ => self.density(w).unwrap_or(0.0),
        }
    }

    /// `count` i.i.d. draws from `g`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.draw(rng)).collect()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            MixingKind::ChiSquared1 => {
                let z: f64 = StandardNormal.sample(rng);
                z * z
            }
            MixingKind::ExpUnit => Exp1.sample(rng),
            MixingKind::PointMass { w0 } => *w0,
            MixingKind::Tabulated { nodes, densities } => {
                let u: f64 = rng.random();
                tabulated_quantile(nodes, densities, u)
            }
        }
    }

    /// `E(W^{-1/2})`, possibly divergent.
    pub fn neg_half_moment(&self) -> Result<Expectation> {
        self.expect(|w| 1.0 / w.sqrt())
    }

    /// `∫ f(w) g(w) dw` under the cutoff protocol described in the module docs.
    pub fn expect<F>(&self, mut f: F) -> Result<Expectation>
    where
        F: FnMut(f64) -> f64,
    {
        let tol = AdaptiveTol { abs: 1e-15, rel: 1e-12, max_segments: 64 };
        match &self.kind {
            MixingKind::PointMass { w0 } => {
                let v = f(*w0);
                if v.is_finite() {
                    Ok(Expectation::Finite(v))
                } else {
                    Err(Error::NonFinite { node: *w0, value: v })
                }
            }
            MixingKind::Tabulated { nodes, .. } => {
                let mut total = 0.0;
                for seg in nodes.windows(2) {
                    total += integrate_adaptive(|w| f(w) * self.weight(w), seg[0], seg[1], tol)?;
                }
                Ok(Expectation::Finite(total))
            }
            MixingKind::ChiSquared1 | MixingKind::ExpUnit => {
                let g = |w: f64| self.density(w).unwrap_or(0.0);
                let mut in_log = |u: f64| {
                    let w = u.exp();
                    let d = g(w);
                    if d == 0.0 {
                        0.0
                    } else {
                        f(w) * d * w
                    }
                };
                // density is below 1e-300 beyond these points
                let w_max: f64 = if matches!(self.kind, MixingKind::ExpUnit) { 700.0 } else { 1400.0 };
                let mut upper = 0.0;
                let mut a = 0.0;
                while a < w_max.ln() {
                    let b = (a + 1.0f64).min(w_max.ln());
                    upper += integrate_adaptive(&mut in_log, a, b, tol)?;
                    a = b;
                }
                lower_cutoff_protocol(upper, |k| {
                    let hi = -((k - 1) as f64) * std::f64::consts::LN_10;
                    let lo = -(k as f64) * std::f64::consts::LN_10;
                    integrate_adaptive(&mut in_log, lo, hi, tol)
                })
            }
        }
    }
}

/// Accumulates decade increments `I_k = ∫_{10^{-k}}^{10^{-k+1}}` onto `start`
/// and classifies the result.
fn lower_cutoff_protocol<F>(start: f64, mut increment: F) -> Result<Expectation>
where
    F: FnMut(i32) -> Result<f64>,
{
    let mut partial = start;
    let mut incs: Vec<f64> = Vec::with_capacity(LOWER_DECADES as usize);
    for k in 1..=LOWER_DECADES {
        let inc = increment(k)?;
        partial += inc;
        incs.push(inc);
        if partial.abs() > GROWTH_LIMIT {
            return Ok(Expectation::Divergent);
        }
        let n = incs.len();
        if n >= 2 && incs[n - 1].abs() < CAUCHY_TOL && incs[n - 2].abs() < CAUCHY_TOL {
            return Ok(Expectation::Finite(partial));
        }
        // three non-shrinking decades in a row
        if n >= 4 && (n - 3..n).all(|i| incs[i].abs() >= incs[i - 1].abs() * (1.0 - 1e-9) && incs[i] != 0.0) {
            return Ok(Expectation::Divergent);
        }
    }
    let n = incs.len();
    let ratio = |i: usize| incs[i] / incs[i - 1];
    let (r1, r2) = (ratio(n - 2), ratio(n - 1));
    if r1 > 0.0 && r2 > 0.0 && r1 < MAX_TAIL_RATIO && r2 < MAX_TAIL_RATIO {
        let r = r1.max(r2);
        let tail = incs[n - 1] * r / (1.0 - r);
        Ok(Expectation::Finite(partial + tail))
    } else {
        Ok(Expectation::Divergent)
    }
}

fn tabulated_quantile(nodes: &[f64], densities: &[f64], u: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..nodes.len() - 1 {
        let (x0, x1) = (nodes[i], nodes[i + 1]);
        let (d0, d1) = (densities[i], densities[i + 1]);
        let mass = 0.5 * (x1 - x0) * (d0 + d1);
        if acc + mass >= u || i == nodes.len() - 2 {
            let target = (u - acc).clamp(0.0, mass);
            // solve d0 t + (d1-d0) t²/(2h) = target for t in [0, h]
            let h = x1 - x0;
            let slope = (d1 - d0) / h;
            let t = if slope.abs() < 1e-14 * (d0 + d1).max(1e-300) {
                if d0 > 0.0 {
                    target / d0
                } else {
                    0.0
                }
            } else {
                let disc = (d0 * d0 + 2.0 * slope * target).max(0.0);
                2.0 * target / (d0 + disc.sqrt())
            };
            return (x0 + t.min(h)).max(x0);
        }
        acc += mass;
    }
    nodes[nodes.len() - 1]
}

impl fmt::Display for MixingDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MixingKind::ChiSquared1 => write!(f, "chi2_1"),
            MixingKind::ExpUnit => write!(f, "exp1"),
            MixingKind::PointMass { w0 } => write!(f, "point:w0={w0}"),
            MixingKind::Tabulated { nodes, .. } => write!(f, "tabulated[{}]", nodes.len()),
        }
    }
}

/// Parses `chi2_1`, `exp1` or `point:w0=1`.
impl FromStr for MixingDensity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
        match (name.to_ascii_lowercase().as_str(), rest.trim()) {
            ("chi2_1" | "chi2", "") => Ok(Self::chi_squared_1()),
            ("exp1" | "exp", "") => Ok(Self::exp_unit()),
            ("point", param) => {
                let w0 = param
                    .strip_prefix("w0=")
                    .ok_or_else(|| Error::invalid(format!("expected point:w0=<value>, got {s:?}")))?
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("w0: {e}")))?;
                Self::point_mass(w0)
            }
            _ => Err(Error::invalid(format!("unknown mixing law {s:?}"))),
        }
    }
}
