//! Asymmetric loss functions and their truncations.
//!
//! A [`LossSpec`] is validated at construction; evaluation never fails. The
//! optional truncation level `a` turns `l` into `l_a(Δ) = min(l(Δ), a)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric base loss `L` of the weighted asymmetric family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricBase {
    Squared,
    Absolute,
}

impl SymmetricBase {
    fn eval(self, delta: f64) -> f64 {
        match self {
            SymmetricBase::Squared => delta * delta,
            SymmetricBase::Absolute => delta.abs(),
        }
    }

    fn inverse(self, level: f64) -> f64 {
        match self {
            SymmetricBase::Squared => level.sqrt(),
            SymmetricBase::Absolute => level,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    /// `b (exp(aΔ) − aΔ − 1)`.
    Linex { a: f64, b: f64 },
    /// `C₁Δ` for `Δ ≥ 0`, `−C₂Δ` for `Δ < 0`.
    Check { c1: f64, c2: f64 },
    /// `λ·w·L(Δ)` on over-estimation, `w·L(Δ)` on under-estimation, with a
    /// constant weight `w`.
    WeightedAsym { lambda: f64, base: SymmetricBase, weight: f64 },
    Squared,
    /// Piecewise-linear loss through `(deltas[i], values[i])`, flat outside.
    /// Not required to satisfy the shape assumptions; see
    /// [`check_assumptions_a1_a2`].
    Tabulated { deltas: Vec<f64>, values: Vec<f64> },
}

#[derive(Serialize, Deserialize)]
struct RawLossSpec {
    #[serde(flatten)]
    kind: LossKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    truncation: Option<f64>,
}

/// A validated loss function with an optional truncation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLossSpec", into = "RawLossSpec")]
pub struct LossSpec {
    kind: LossKind,
    truncation: Option<f64>,
}

impl TryFrom<RawLossSpec> for LossSpec {
    type Error = Error;

    fn try_from(raw: RawLossSpec) -> Result<Self> {
        LossSpec::new(raw.kind, raw.truncation)
    }
}

impl From<LossSpec> for RawLossSpec {
    fn from(spec: LossSpec) -> Self {
        RawLossSpec { kind: spec.kind, truncation: spec.truncation }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be a positive real, got {v}")))
    }
}

impl LossSpec {
    pub fn new(kind: LossKind, truncation: Option<f64>) -> Result<Self> {
        match &kind {
            LossKind::Linex { a, b } => {
                if !(a.is_finite() && *a != 0.0) {
                    return Err(Error::invalid(format!("LINEX a must be non-zero, got {a}")));
                }
                positive("LINEX b", *b)?;
            }
            LossKind::Check { c1, c2 } => {
                positive("check C1", *c1)?;
                positive("check C2", *c2)?;
            }
            LossKind::WeightedAsym { lambda, weight, .. } => {
                positive("lambda", *lambda)?;
                positive("weight", *weight)?;
            }
            LossKind::Squared => {}
            LossKind::Tabulated { deltas, values } => {
                if deltas.len() < 2 || deltas.len() != values.len() {
                    return Err(Error::invalid(
                        "tabulated loss needs at least two (delta, value) pairs of equal length",
                    ));
                }
                if deltas.windows(2).any(|p| !(p[1] > p[0])) {
                    return Err(Error::invalid("tabulated deltas must be strictly increasing"));
                }
                if deltas.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::invalid("tabulated loss entries must be finite"));
                }
            }
        }
        if let Some(a) = truncation {
            if !(a > 0.0) || a.is_nan() {
                return Err(Error::invalid(format!("truncation must be positive, got {a}")));
            }
        }
        // an infinite cap is the untruncated loss
        let truncation = truncation.filter(|a| a.is_finite());
        Ok(Self { kind, truncation })
    }

    pub fn linex(a: f64, b: f64) -> Result<Self> {
        Self::new(LossKind::Linex { a, b }, None)
    }

    pub fn check(c1: f64, c2: f64) -> Result<Self> {
        Self::new(LossKind::Check { c1, c2 }, None)
    }

    pub fn weighted_asym(lambda: f64, base: SymmetricBase, weight: f64) -> Result<Self> {
        Self::new(LossKind::WeightedAsym { lambda, base, weight }, None)
    }

    pub fn squared() -> Self {
        Self { kind: LossKind::Squared, truncation: None }
    }

    pub fn tabulated(deltas: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(LossKind::Tabulated { deltas, values }, None)
    }

    /// The same loss truncated at `a` (replacing any previous level).
    /// `a = ∞` removes the truncation.
    pub fn truncated(&self, a: f64) -> Result<Self> {
        Self::new(self.kind.clone(), Some(a))
    }

    pub fn untruncated(&self) -> Self {
        Self { kind: self.kind.clone(), truncation: None }
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    pub fn truncation(&self) -> Option<f64> {
        self.truncation
    }

    /// Untruncated `l(Δ)`.
    pub fn raw(&self, delta: f64) -> f64 {
        match &self.kind {
            LossKind::Linex { a, b } => {
                let x = a * delta;
                b * (x.exp_m1() - x)
            }
            LossKind::Check { c1, c2 } => {
                if delta >= 0.0 {
                    c1 * delta
                } else {
                    -c2 * delta
                }
            }
            LossKind::WeightedAsym { lambda, base, weight } => {
                let l = weight * base.eval(delta);
                if delta >= 0.0 {
                    lambda * l
                } else {
                    l
                }
            }
            LossKind::Squared => delta * delta,
            LossKind::Tabulated { deltas, values } => interpolate(deltas, values, delta),
        }
    }

    /// `l_a(Δ)`, the loss with truncation applied.
    pub fn eval(&self, delta: f64) -> f64 {
        let v = self.raw(delta);
        match self.truncation {
            Some(a) => v.min(a),
            None => v,
        }
    }

    /// `ln l_a(Δ)`, accurate where `l` itself would overflow.
    pub fn ln_eval(&self, delta: f64) -> f64 {
        if let (LossKind::Linex { a, b }, None) = (&self.kind, self.truncation) {
            let x = a * delta;
            if x > 30.0 {
                return b.ln() + x + (-(x + 1.0) * (-x).exp()).ln_1p();
            }
        }
        self.eval(delta).ln()
    }

    /// Exponential growth rate of the loss in `Δ` (non-zero only for an
    /// untruncated LINEX loss). Gaussian expectations use it to locate the
    /// tilted part of the integrand.
    pub fn growth_rate(&self) -> f64 {
        match (&self.kind, self.truncation) {
            (LossKind::Linex { a, .. }, None) => *a,
            _ => 0.0,
        }
    }

    /// Points where `l_a` is not smooth: kinks of the base loss and the
    /// crossings of the truncation level.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.kind {
            LossKind::Linex { .. } | LossKind::Squared => Vec::new(),
            LossKind::Check { .. } | LossKind::WeightedAsym { .. } => vec![0.0],
            LossKind::Tabulated { deltas, .. } => deltas.clone(),
        };
        if let Some(cap) = self.truncation {
            match &self.kind {
                LossKind::Check { c1, c2 } => out.extend([cap / c1, -cap / c2]),
                LossKind::Squared => out.extend([cap.sqrt(), -cap.sqrt()]),
                LossKind::WeightedAsym { lambda, base, weight } => out.extend([
                    base.inverse(cap / (lambda * weight)),
                    -base.inverse(cap / weight),
                ]),
                LossKind::Linex { .. } => {
                    out.extend([self.crossing(cap, 1.0), self.crossing(cap, -1.0)].into_iter().flatten())
                }
                LossKind::Tabulated { deltas, values } => {
                    for (d, v) in deltas.windows(2).zip(values.windows(2)) {
                        if (v[0] - cap) * (v[1] - cap) < 0.0 {
                            out.push(d[0] + (cap - v[0]) / (v[1] - v[0]) * (d[1] - d[0]));
                        }
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Smallest `|Δ|` on the given side with `l(Δ) = level`, for a loss
    /// that is monotone on that side.
    fn crossing(&self, level: f64, side: f64) -> Option<f64> {
        let mut hi = 1e-3;
        while self.raw(side * hi) < level {
            hi *= 2.0;
            if hi > 1e300 {
                return None;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.raw(side * mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(side * 0.5 * (lo + hi))
    }

    /// True when `l(Δ) = l(−Δ)` identically.
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            LossKind::Squared => true,
            LossKind::Check { c1, c2 } => c1 == c2,
            LossKind::WeightedAsym { lambda, .. } => *lambda == 1.0,
            LossKind::Linex { .. } | LossKind::Tabulated { .. } => false,
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

impl fmt::Display for LossSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LossKind::Linex { a, b } => write!(f, "linex:a={a},b={b}")?,
            LossKind::Check { c1, c2 } => write!(f, "check:c1={c1},c2={c2}")?,
            LossKind::WeightedAsym { lambda, base, weight } => {
                let base = match base {
                    SymmetricBase::Squared => "squared",
                    SymmetricBase::Absolute => "absolute",
                };
                write!(f, "wasym:lambda={lambda},weight={weight},base={base}")?
            }
            LossKind::Squared => write!(f, "squared")?,
            LossKind::Tabulated { deltas, .. } => write!(f, "tabulated[{}]", deltas.len())?,
        }
        if let Some(a) = self.truncation {
            let sep = if matches!(self.kind, LossKind::Squared) { ":" } else { "," };
            write!(f, "{sep}trunc={a}")?;
        }
        Ok(())
    }
}

/// Parses the inline form used on the command line, e.g. `linex:a=1,b=1`,
/// `check:c1=4,c2=1,trunc=50`, `squared`, `wasym:lambda=2,weight=1`.
impl FromStr for LossSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for item in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value in loss spec, got {item:?}")))?;
            params.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
        }
        let num = |key: &str| -> Result<f64> {
            params
                .get(key)
                .ok_or_else(|| Error::invalid(format!("loss {name:?} is missing parameter {key}")))?
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("parameter {key}: {e}")))
        };
        let kind = match name.trim().to_ascii_lowercase().as_str() {
            "linex" => LossKind::Linex { a: num("a")?, b: num("b")? },
            "check" => LossKind::Check { c1: num("c1")?, c2: num("c2")? },
            "squared" | "sq" => LossKind::Squared,
            "wasym" | "weighted_asym" => LossKind::WeightedAsym {
                lambda: num("lambda")?,
                weight: if params.contains_key("weight") { num("weight")? } else { 1.0 },
                base: match params.get("base").map(String::as_str) {
                    None | Some("squared") => SymmetricBase::Squared,
                    Some("absolute") => SymmetricBase::Absolute,
                    Some(other) => return Err(Error::invalid(format!("unknown base loss {other:?}"))),
                },
            },
            other => return Err(Error::invalid(format!("unknown loss kind {other:?}"))),
        };
        let known: &[&str] = match kind {
            LossKind::Linex { .. } => &["a", "b", "trunc"],
            LossKind::Check { .. } => &["c1", "c2", "trunc"],
            LossKind::WeightedAsym { .. } => &["lambda", "weight", "base", "trunc"],
            _ => &["trunc"],
        };
        if let Some(extra) = params.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Error::invalid(format!("unknown loss parameter {extra:?}")));
        }
        let truncation = if params.contains_key("trunc") { Some(num("trunc")?) } else { None };
        LossSpec::new(kind, truncation)
    }
}

/// Pass/fail of one shape assumption, with the first grid point that broke it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub pass: bool,
    pub witness: Option<f64>,
}

impl AssumptionCheck {
    fn from_witness(witness: Option<f64>) -> Self {
        Self { pass: witness.is_none(), witness }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// `l(Δ) ≥ 0`.
    pub nonnegative: AssumptionCheck,
    /// `l(0) = 0`.
    pub zero_at_origin: AssumptionCheck,
    /// Non-increasing for `Δ < 0`, non-decreasing for `Δ > 0`.
    pub monotone: AssumptionCheck,
}

impl AssumptionReport {
    pub fn pass(&self) -> bool {
        self.nonnegative.pass && self.zero_at_origin.pass && self.monotone.pass
    }
}

/// Checks non-negativity, `l(0) = 0` and one-sided monotonicity of the
/// (truncated) loss on `grid`. The origin is always examined, whether or not
/// the grid contains it.
pub fn check_assumptions_a1_a2(spec: &LossSpec, grid: &[f64]) -> AssumptionReport {
    let mut pts: Vec<f64> = grid.iter().copied().filter(|x| x.is_finite()).collect();
    pts.push(0.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let nonnegative = pts.iter().copied().find(|&d| spec.eval(d) < 0.0);
    let zero_at_origin = (spec.eval(0.0) != 0.0).then_some(0.0);

    let mut monotone = None;
    for pair in pts.windows(2) {
        let (x, y) = (pair[0], pair[1]);
        let (lx, ly) = (spec.eval(x), spec.eval(y));
        let broken = if y <= 0.0 { ly > lx } else if x >= 0.0 { ly < lx } else { false };
        if broken {
            monotone = Some(if y <= 0.0 { x } else { y });
            break;
        }
    }
    AssumptionReport {
        nonnegative: AssumptionCheck::from_witness(nonnegative),
        zero_at_origin: AssumptionCheck::from_witness(zero_at_origin),
        monotone: AssumptionCheck::from_witness(monotone),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linex_values() {
        let l = LossSpec::linex(1.0, 1.0).unwrap();
        assert_eq!(l.eval(0.0), 0.0);
        assert!((l.eval(1.0) - (std::f64::consts::E - 2.0)).abs() < 1e-15);
        let t = l.truncated(0.5).unwrap();
        assert_eq!(t.eval(1.0), 0.5);
    }

    #[test]
    fn check_values() {
        let l = LossSpec::check(2.0, 1.0).unwrap();
        assert_eq!(l.eval(-3.0), 3.0);
        assert_eq!(l.eval(3.0), 6.0);
    }

    #[test]
    fn weighted_asym_penalises_over_estimation() {
        let l = LossSpec::weighted_asym(1.5, SymmetricBase::Squared, 2.0).unwrap();
        assert_eq!(l.eval(1.0), 3.0);
        assert_eq!(l.eval(-1.0), 2.0);
        assert!(!l.is_symmetric());
    }

    #[test]
    fn invalid_parameters_rejected_at_construction() {
        assert!(LossSpec::linex(0.0, 1.0).is_err());
        assert!(LossSpec::linex(1.0, 0.0).is_err());
        assert!(LossSpec::linex(1.0, -1.0).is_err());
        assert!(LossSpec::check(0.0, 1.0).is_err());
        assert!(LossSpec::check(1.0, -2.0).is_err());
        assert!(LossSpec::weighted_asym(0.0, SymmetricBase::Squared, 1.0).is_err());
        assert!(LossSpec::squared().truncated(0.0).is_err());
        assert!(LossSpec::tabulated(vec![0.0, 0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn assumption_report_on_catalogue() {
        let l = LossSpec::linex(1.0, 1.0).unwrap();
        assert!(check_assumptions_a1_a2(&l, &[-2.0, -1.0, 0.0, 1.0, 2.0]).pass());
        let c = LossSpec::check(2.0, 1.0).unwrap();
        assert!(check_assumptions_a1_a2(&c, &[-1.0, 0.0, 1.0]).pass());
    }

    #[test]
    fn non_monotone_tabulated_loss_fails_with_witness() {
        let bumpy = LossSpec::tabulated(vec![-2.0, -1.0, 0.0, 1.0, 2.0], vec![1.0, 2.0, 0.0, 3.0, 1.0]).unwrap();
        let report = check_assumptions_a1_a2(&bumpy, &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!(!report.pass());
        assert!(report.nonnegative.pass);
        assert_eq!(report.monotone.witness, Some(-2.0));

        let shifted = LossSpec::tabulated(vec![-1.0, 0.0, 1.0], vec![1.0, 0.5, 1.0]).unwrap();
        let report = check_assumptions_a1_a2(&shifted, &[-1.0, 1.0]);
        assert_eq!(report.zero_at_origin.witness, Some(0.0));
    }

    #[test]
    fn truncation_breakpoints_are_level_crossings() {
        let l = LossSpec::linex(1.0, 1.0).unwrap().truncated(10.0).unwrap();
        let bp = l.breakpoints();
        assert_eq!(bp.len(), 2);
        for d in bp {
            assert!((l.raw(d) - 10.0).abs() < 1e-9, "{d}");
        }
        let c = LossSpec::check(4.0, 1.0).unwrap().truncated(50.0).unwrap();
        assert_eq!(c.breakpoints(), vec![-50.0, 0.0, 12.5]);
    }

    #[test]
    fn ln_eval_survives_overflow() {
        let l = LossSpec::linex(1.0, 2.0).unwrap();
        let v = l.ln_eval(1000.0);
        assert!((v - (2f64.ln() + 1000.0)).abs() < 1e-9);
        assert!((l.ln_eval(1.0) - l.eval(1.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn inline_and_json_forms() {
        let l: LossSpec = "check:c1=4,c2=1,trunc=50".parse().unwrap();
        assert_eq!(l, LossSpec::check(4.0, 1.0).unwrap().truncated(50.0).unwrap());
        assert_eq!(l.to_string().parse::<LossSpec>().unwrap(), l);
        assert!("linex:a=1".parse::<LossSpec>().is_err());
        assert!("linex:a=0,b=1".parse::<LossSpec>().is_err());
        assert!("huber:k=1".parse::<LossSpec>().is_err());

        let json = serde_json::to_string(&l).unwrap();
        assert_eq!(json, r#"{"kind":"check","c1":4.0,"c2":1.0,"truncation":50.0}"#);
        let back: LossSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l);
        assert!(serde_json::from_str::<LossSpec>(r#"{"kind":"linex","a":0.0,"b":1.0}"#).is_err());
    }

    fn catalogue() -> impl Strategy<Value = LossSpec> {
        prop_oneof![
            (-3.0f64..3.0, 0.1f64..5.0)
                .prop_filter("a != 0", |(a, _)| a.abs() > 1e-3)
                .prop_map(|(a, b)| LossSpec::linex(a, b).unwrap()),
            (0.1f64..5.0, 0.1f64..5.0).prop_map(|(c1, c2)| LossSpec::check(c1, c2).unwrap()),
            (0.1f64..5.0, 0.1f64..5.0)
                .prop_map(|(l, w)| LossSpec::weighted_asym(l, SymmetricBase::Squared, w).unwrap()),
            Just(LossSpec::squared()),
        ]
    }

    proptest! {
        #[test]
        fn shape_invariants(loss in catalogue(), x in 0.0f64..20.0, dx in 0.0f64..5.0, cap in 0.01f64..100.0) {
            for l in [loss.clone(), loss.truncated(cap).unwrap()] {
                prop_assert_eq!(l.eval(0.0), 0.0);
                prop_assert!(l.eval(x) >= 0.0 && l.eval(-x) >= 0.0);
                prop_assert!(l.eval(x + dx) >= l.eval(x));
                prop_assert!(l.eval(-x - dx) >= l.eval(-x));
            }
            let t = loss.truncated(cap).unwrap();
            prop_assert!(t.eval(x) <= cap && t.eval(-x) <= cap);
            if loss.eval(x) <= cap {
                prop_assert_eq!(t.eval(x), loss.eval(x));
            }
        }

        #[test]
        fn squared_is_symmetric(x in -1e3f64..1e3) {
            prop_assert_eq!(LossSpec::squared().eval(x), LossSpec::squared().eval(-x));
        }

        #[test]
        fn linex_is_asymmetric(a in 0.05f64..3.0, b in 0.1f64..5.0) {
            let l = LossSpec::linex(a, b).unwrap();
            let witness = [0.5, 1.0, 2.0, 4.0].into_iter().find(|&d| l.eval(d) != l.eval(-d));
            prop_assert!(witness.is_some());
        }
    }
}
