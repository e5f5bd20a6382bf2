"""Independent oracle values frozen into the Rust test-suite.

Everything here is computed with scipy/numpy from closed forms or nested
adaptive quadrature, without touching the Rust code paths.  Run:

    python3 pilot/oracles.py > pilot/oracles.out
"""
import math

import numpy as np
from scipy import integrate, optimize, stats

PHI = stats.norm


def check_h(c, s, c1, c2):
    """E[l(c - Y)] for the check loss, Y ~ N(0, s^2), via partial expectations."""
    u = c / s
    pos = c * PHI.cdf(u) + s * PHI.pdf(u)          # E[(c - Y)^+]
    neg = -c * PHI.sf(u) + s * PHI.pdf(u)          # E[(Y - c)^+]
    return c1 * pos + c2 * neg


def brute_force_check_beta0(c1, c2, w, points=100_000, half=5.0):
    s = 1.0 / math.sqrt(w)
    betas = np.linspace(-half, half, points)
    vals = check_h(betas / math.sqrt(w), s, c1, c2)
    return betas[np.argmin(vals)], betas[1] - betas[0]


def truncated_check_h(c, s, c1, c2, cap):
    """E[min(l(D), cap)] with D = c - Y ~ N(c, s^2), in closed form."""
    def mass(p, q):
        return PHI.cdf((q - c) / s) - PHI.cdf((p - c) / s)

    def first(p, q):  # E[D 1{p <= D <= q}]
        a, b = (p - c) / s, (q - c) / s
        return c * (PHI.cdf(b) - PHI.cdf(a)) + s * (PHI.pdf(a) - PHI.pdf(b))

    hi, lo = cap / c1, -cap / c2
    return (c1 * first(0.0, hi) - c2 * first(lo, 0.0)
            + cap * (PHI.sf((hi - c) / s) + PHI.cdf((lo - c) / s)))


def truncated_check_min(w, c1, c2, cap):
    """Grid search over the shift c followed by a bounded Brent refinement."""
    s = 1.0 / math.sqrt(w)
    half = 6.0 * s + cap
    grid = np.linspace(-half, half, 4001)
    vals = truncated_check_h(grid, s, c1, c2, cap)
    i = int(np.argmin(vals))
    step = grid[1] - grid[0]
    res = optimize.minimize_scalar(lambda c: truncated_check_h(c, s, c1, c2, cap),
                                   bounds=(grid[i] - 2 * step, grid[i] + 2 * step),
                                   method="bounded", options={"xatol": 1e-12})
    return min(res.fun, vals[i])


def exp_mixed(f):
    """int_0^inf f(w) e^{-w} dw, split at 1 with a log substitution below."""
    lower = integrate.quad(lambda u: f(math.exp(u)) * math.exp(-math.exp(u)) * math.exp(u),
                           -45.0, 0.0, epsabs=1e-12, epsrel=1e-11, limit=400)[0]
    upper = integrate.quad(lambda w: f(w) * math.exp(-w), 1.0, np.inf,
                           epsabs=1e-12, epsrel=1e-11, limit=400)[0]
    return lower + upper


def main():
    print("# LINEX closed forms")
    print("linex h(0,1) a=b=1:", math.exp(0.5) - 1.0)
    print("linex l(1) a=b=1:", math.e - 2.0)

    print("# chi2_1 density at 1:", stats.chi2(1).pdf(1.0))
    print("# sqrt(pi):", math.sqrt(math.pi))

    print("# check-loss beta0: Phi^-1(C2/(C1+C2)) vs brute force grid (1e5 points)")
    for c1, c2 in [(2, 1), (4, 1), (1, 3)]:
        q = PHI.ppf(c2 / (c1 + c2))
        for w in [0.25, 1.0, 4.0]:
            b, step = brute_force_check_beta0(c1, c2, w)
            print(f"  C=({c1},{c2}) w={w}: quantile={q:.12f} grid={b:.6f} step={step:.2e} "
                  f"agree={abs(b - q) <= step}")

    print("# minimax bound, Check(4,1), Exp(1), untruncated")
    tau = 1.0 / 5.0
    closed = 5.0 * PHI.pdf(PHI.ppf(tau)) * math.sqrt(math.pi)
    dq = exp_mixed(lambda w: check_h(PHI.ppf(tau) / math.sqrt(w), 1 / math.sqrt(w), 4, 1))
    print(f"  closed={closed:.12f} double-quadrature={dq:.12f}")

    print("# minimax bound, Check(4,1) truncated at 50, Exp(1)")
    val = exp_mixed(lambda w: truncated_check_min(w, 4, 1, 50.0))
    print(f"  bound_truncated={val:.10f}")
    for cap in [1.0, 10.0, 100.0, 1e4]:
        v = exp_mixed(lambda w: truncated_check_min(w, 4, 1, cap))
        print(f"  cap={cap}: {v:.10f}")

    print("# squared error, truncated at 50: E_W E[min(X^2/W, 50)], W ~ Exp(1)")
    def sq_trunc(w):
        # X^2/w <= 50  <=>  |X| <= sqrt(50 w)
        k = math.sqrt(50.0 * w)
        inner = integrate.quad(lambda x: x * x / w * PHI.pdf(x), -k, k, epsabs=1e-13)[0]
        return inner + 50.0 * 2.0 * PHI.sf(k)
    print(f"  risk={exp_mixed(sq_trunc):.10f}")

    print("# check-loss risk of the uncorrected pivot, Check(4,1) truncated at 50, Exp(1)")
    val = exp_mixed(lambda w: truncated_check_h(0.0, 1 / math.sqrt(w), 4, 1, 50.0))
    print(f"  cross-check quad h(c=0.3,s=2)={truncated_check_h(0.3, 2.0, 4, 1, 5.0):.12f} vs "
          f"{integrate.quad(lambda y: min(4*(0.3-y) if y<0.3 else (y-0.3), 5.0)*PHI.pdf(y, scale=2.0), -80, 80, points=[0.3-1.25, 0.3, 5.3], limit=200)[0]:.12f}")
    print(f"  mle_risk={val:.10f}")


if __name__ == "__main__":
    main()
