//! Quadrature rules: Gauss–Legendre panels and adaptive Gauss–Kronrod (7, 15).

use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the three-term Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub(crate) const PANEL_ORDER: usize = 16;

pub(crate) fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Fixed-order Gauss–Legendre over `[a, b]` split into panels no wider than
/// `max_width`, with additional splits at `breaks` (points outside are ignored).
pub fn panel_integrate<F>(f: F, a: f64, b: f64, breaks: &[f64], max_width: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(b > a) {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    cuts.push(a);
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let (nodes, weights) = panel_rule();
    let mut sum = 0.0;
    for seg in cuts.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        let width = (hi - lo) / pieces as f64;
        for p in 0..pieces {
            let left = lo + width * p as f64;
            let half = 0.5 * width;
            let mid = left + half;
            let mut acc = 0.0;
            for (x, w) in nodes.iter().zip(weights) {
                let node = mid + half * x;
                let v = f(node);
                if !v.is_finite() {
                    return Err(Error::NonFinite { node, value: v });
                }
                acc += w * v;
            }
            sum += half * acc;
        }
    }
    Ok(sum)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite { node: x, value: v })
        }
    };
    let fc = eval(mid)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = eval(mid - dx)? + eval(mid + dx)?;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    Ok((value, err))
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Tolerances for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveTol {
    pub abs: f64,
    pub rel: f64,
    pub max_segments: usize,
}

impl Default for AdaptiveTol {
    fn default() -> Self {
        Self { abs: 1e-13, rel: 1e-11, max_segments: 200 }
    }
}

/// Globally adaptive Gauss–Kronrod (7, 15) quadrature over `[a, b]`.
///
/// The segment with the largest error estimate is bisected until the total
/// error estimate falls under `max(abs, rel·|I|)` or the segment budget is
/// exhausted; the best available estimate is returned in either case.
pub fn integrate_adaptive<F>(mut f: F, a: f64, b: f64, tol: AdaptiveTol) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = gk15(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err });
    let (mut total, mut total_err) = (value, err);
    while total_err > tol.abs.max(tol.rel * total.abs()) && heap.len() < tol.max_segments {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        let (lv, le) = gk15(&mut f, seg.a, mid)?;
        let (rv, re) = gk15(&mut f, mid, seg.b)?;
        total += lv + rv - seg.value;
        total_err += le + re - seg.err;
        heap.push(Segment { a: seg.a, b: mid, value: lv, err: le });
        heap.push(Segment { a: mid, b: seg.b, value: rv, err: re });
    }
    // re-sum to shed the drift of the running update
    Ok(heap.iter().map(|s| s.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        // degree 31 is the exactness limit
        let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((approx - 2.0 / 31.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_low_orders() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(1);
        assert!(x[0].abs() < 1e-15);
        assert!((w[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn panels_handle_kinks() {
        // |x| on [-1, 2] = 0.5 + 2
        let v = panel_integrate(|x: f64| x.abs(), -1.0, 2.0, &[0.0], 1.0).unwrap();
        assert!((v - 2.5).abs() < 1e-14);
    }

    #[test]
    fn adaptive_gaussian_mass() {
        let v = integrate_adaptive(
            |x: f64| (-0.5 * x * x).exp(),
            -20.0,
            20.0,
            AdaptiveTol::default(),
        )
        .unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_non_finite() {
        let r = integrate_adaptive(|x: f64| 1.0 / x, -1.0, 1.0, AdaptiveTol::default());
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }
}
