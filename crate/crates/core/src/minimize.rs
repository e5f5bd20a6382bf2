//! One-dimensional derivative-free minimisation.
//!
//! Golden-section search brackets the minimiser of a unimodal function; a few
//! central-difference parabolic steps then polish it past the `sqrt(eps)`
//! resolution that pure function comparisons can deliver.

const INV_PHI: f64 = 0.618_033_988_749_894_9; // 1/φ

/// Outcome of [`golden_section`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
    /// `false` when the minimiser sits on the bracket boundary.
    pub interior: bool,
}

/// Minimise `f` over `[lo, hi]`.
///
/// `tol` is the absolute tolerance on the minimiser; `max_iter` bounds the
/// number of golden-section contractions. Non-finite values compare as `+∞`.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    let mut iterations = 0;
    // contraction stalls near sqrt(eps) relative width; the polish below does the rest
    let coarse = |x: f64| 1e-7 * (1.0 + x.abs());
    while iterations < max_iter && (b - a) > coarse(0.5 * (a + b)).max(tol) {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    let (mut x, mut fx) = if fc <= fd { (c, fc) } else { (d, fd) };

    let edge = 2.0 * coarse(x).max(tol);
    let interior = (x - lo) > edge && (hi - x) > edge;
    if interior && fx.is_finite() {
        let scale = x.abs().max(1.0);
        for spacing in [1e-4, 1e-5, 1e-5, 1e-6] {
            if iterations >= max_iter {
                break;
            }
            iterations += 1;
            let h = spacing * scale;
            let (fm, fp) = (eval(x - h), eval(x + h));
            let curvature = fp - 2.0 * fx + fm;
            if !(curvature > 0.0) || !fm.is_finite() || !fp.is_finite() {
                continue;
            }
            let step = -0.5 * h * (fp - fm) / curvature;
            if !step.is_finite() || step.abs() > 4.0 * h.max(b - a) {
                continue;
            }
            let candidate = (x + step).clamp(a, b);
            let fcand = eval(candidate);
            // below the noise floor the difference quotient is the better judge
            let noise = 64.0 * f64::EPSILON * fx.abs().max(f64::MIN_POSITIVE);
            if fcand.is_finite() && fcand <= fx + noise {
                x = candidate;
                fx = fcand;
            }
        }
    }
    Minimum { x, value: fx, iterations, interior }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum_to_high_precision() {
        let m = golden_section(|x| (x - 0.123_456_789).powi(2) + 3.0, -50.0, 50.0, 1e-10, 200);
        assert!(m.interior);
        assert!((m.x - 0.123_456_789).abs() < 1e-9, "{}", m.x);
        assert!((m.value - 3.0).abs() < 1e-15);
    }

    #[test]
    fn exponential_objective() {
        // e^x - 2x has its minimum at ln 2
        let m = golden_section(|x: f64| x.exp() - 2.0 * x, -50.0, 50.0, 1e-10, 200);
        assert!((m.x - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn non_smooth_objective() {
        let m = golden_section(|x: f64| (x - 1.5).abs(), -10.0, 10.0, 1e-10, 200);
        assert!((m.x - 1.5).abs() < 1e-6);
    }

    #[test]
    fn boundary_minimum_is_flagged() {
        let m = golden_section(|x| x, -1.0, 1.0, 1e-10, 200);
        assert!(!m.interior);
        assert!((m.x + 1.0).abs() < 1e-6);
    }

    #[test]
    fn infinite_values_are_avoided() {
        let m = golden_section(
            |x: f64| if x > 3.0 { f64::INFINITY } else { (x - 1.0).powi(2) },
            -50.0,
            50.0,
            1e-10,
            200,
        );
        assert!((m.x - 1.0).abs() < 1e-9);
    }
}
