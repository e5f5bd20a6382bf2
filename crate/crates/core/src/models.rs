//! The explosive AR(1) and super-critical Galton–Watson examples.
//!
//! Both families are parametrised by a scalar `θ`. Statistics are evaluated
//! at a reference value `θ₀`, which need not be the value the path was
//! simulated under.
//!
//! Local parameters `θ_n = θ₀ + δ_n h` sit extremely close to `θ₀`, so the
//! log-likelihood ratio is formed from the increment `δ_n h` directly and
//! never from the difference `θ_n − θ₀`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixing::MixingDensity;

/// Largest generation size simulated exactly.
pub const GW_POPULATION_CAP: u64 = 1 << 53;

/// Below this parent count offspring are drawn one by one.
const GW_DIRECT_LIMIT: u64 = 32;

/// `X_j = θ X_{j−1} + ε_j`, `X_0 = 0`, `ε_j ~ N(0, 1)`, `|θ| > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Model {
    pub theta0: f64,
}

/// Galton–Watson process with `X_0 = 1` and geometric offspring
/// `P(ξ = j) = θ^{-1}(1 − θ^{-1})^{j−1}`, `j ≥ 1`, `θ > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwModel {
    pub theta0: f64,
}

impl Ar1Model {
    pub fn new(theta0: f64) -> Result<Self> {
        if theta0.is_finite() && theta0.abs() > 1.0 {
            Ok(Self { theta0 })
        } else {
            Err(Error::ParameterRegion { theta: theta0, region: "|θ| > 1" })
        }
    }
}

impl GwModel {
    pub fn new(theta0: f64) -> Result<Self> {
        if theta0.is_finite() && theta0 > 1.0 {
            Ok(Self { theta0 })
        } else {
            Err(Error::ParameterRegion { theta: theta0, region: "θ > 1" })
        }
    }
}

/// One of the two example families, as read from configuration
/// (`{"model": "ar1", "theta0": 2.0}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel", into = "RawModel")]
pub enum Model {
    Ar1(Ar1Model),
    Gw(GwModel),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Ar1,
    Gw,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    model: Family,
    theta0: f64,
}

impl TryFrom<RawModel> for Model {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        match raw.model {
            Family::Ar1 => Model::ar1(raw.theta0),
            Family::Gw => Model::gw(raw.theta0),
        }
    }
}

impl From<Model> for RawModel {
    fn from(m: Model) -> Self {
        let model = match m {
            Model::Ar1(_) => Family::Ar1,
            Model::Gw(_) => Family::Gw,
        };
        RawModel { model, theta0: m.theta0() }
    }
}

/// A simulated path `X_0, …, X_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "observations", rename_all = "lowercase")]
pub enum Trajectory {
    Ar1(Vec<f64>),
    Gw(Vec<u64>),
}

impl Trajectory {
    /// Number of transitions `n`.
    pub fn n(&self) -> usize {
        match self {
            Trajectory::Ar1(x) => x.len().saturating_sub(1),
            Trajectory::Gw(x) => x.len().saturating_sub(1),
        }
    }

    /// Observations as reals.
    pub fn values(&self) -> Vec<f64> {
        match self {
            Trajectory::Ar1(x) => x.clone(),
            Trajectory::Gw(x) => x.iter().map(|&v| v as f64).collect(),
        }
    }
}

/// Statistics of a path at the reference value `θ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalStats {
    pub delta_n: f64,
    #[serde(rename = "W_n")]
    pub w_n: f64,
    #[serde(rename = "Z_n")]
    pub z_n: f64,
    #[serde(rename = "G_n")]
    pub g_n: f64,
    pub mle: f64,
    /// `δ_n^{-1}(mle − θ₀)`, computed without forming the difference.
    pub scaled_mle_error: f64,
}

impl Model {
    pub fn ar1(theta0: f64) -> Result<Self> {
        Ar1Model::new(theta0).map(Model::Ar1)
    }

    pub fn gw(theta0: f64) -> Result<Self> {
        GwModel::new(theta0).map(Model::Gw)
    }

    pub fn theta0(&self) -> f64 {
        match self {
            Model::Ar1(m) => m.theta0,
            Model::Gw(m) => m.theta0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Model::Ar1(_) => "ar1",
            Model::Gw(_) => "gw",
        }
    }

    /// The same family at another parameter value.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        match self {
            Model::Ar1(_) => Model::ar1(theta),
            Model::Gw(_) => Model::gw(theta),
        }
    }

    /// Limit law of `W_n`: χ²₁ for AR(1), unit exponential for GW.
    pub fn mixing(&self) -> MixingDensity {
        match self {
            Model::Ar1(_) => MixingDensity::chi_squared_1(),
            Model::Gw(_) => MixingDensity::exp_unit(),
        }
    }

    /// `δ_n` at the model's `θ₀`.
    pub fn norming_constant(&self, n: usize) -> Result<f64> {
        norming_constant(self, self.theta0(), n)
    }

    /// `θ₀ + δ_n h`, checked against the parameter region.
    pub fn local_parameter(&self, n: usize, h: f64) -> Result<f64> {
        let theta = self.theta0() + self.norming_constant(n)? * h;
        self.with_theta(theta).map(|m| m.theta0())
    }

    /// Path of length `n` under the model's `θ₀`.
    pub fn simulate<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Trajectory> {
        match self {
            Model::Ar1(m) => Ok(simulate_ar1(m.theta0, n, rng)),
            Model::Gw(m) => simulate_gw(m.theta0, n, rng),
        }
    }

    pub fn local_stats(&self, traj: &Trajectory) -> Result<LocalStats> {
        local_stats(self, traj, self.theta0())
    }

    pub fn log_likelihood_ratio(&self, traj: &Trajectory, h: f64) -> Result<f64> {
        log_likelihood_ratio(self, traj, self.theta0(), h)
    }

    pub fn lamn_remainder(&self, traj: &Trajectory, h: f64) -> Result<f64> {
        lamn_remainder(self, traj, self.theta0(), h)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("n must be at least 1"))
    } else {
        Ok(())
    }
}

/// `δ_n` for the family of `model` at `theta0`: `(θ₀² − 1)/|θ₀|^n` for AR(1),
/// `√(θ₀(θ₀ − 1))/θ₀^{n/2}` for GW.
pub fn norming_constant(model: &Model, theta0: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    let model = model.with_theta(theta0)?;
    let ln = match model {
        Model::Ar1(_) => (theta0 * theta0 - 1.0).ln() - n as f64 * theta0.abs().ln(),
        Model::Gw(_) => 0.5 * (theta0 * (theta0 - 1.0)).ln() - 0.5 * n as f64 * theta0.ln(),
    };
    let delta = ln.exp();
    if delta >= f64::MIN_POSITIVE {
        Ok(delta)
    } else {
        Err(Error::NormingUnderflow { n })
    }
}

fn simulate_ar1<R: Rng + ?Sized>(theta: f64, n: usize, rng: &mut R) -> Trajectory {
    let mut x = Vec::with_capacity(n + 1);
    x.push(0.0);
    for j in 1..=n {
        let eps: f64 = StandardNormal.sample(rng);
        x.push(theta.mul_add(x[j - 1], eps));
    }
    Trajectory::Ar1(x)
}

fn simulate_gw<R: Rng + ?Sized>(theta: f64, n: usize, rng: &mut R) -> Result<Trajectory> {
    let p_fail = 1.0 - 1.0 / theta;
    let ln_fail = p_fail.ln();
    let mut x = Vec::with_capacity(n + 1);
    x.push(1u64);
    for generation in 1..=n {
        let parents = x[generation - 1];
        let next = if parents <= GW_DIRECT_LIMIT {
            let mut total = 0u64;
            for _ in 0..parents {
                // inverse CDF of the geometric law on {1, 2, ...}
                let u: f64 = 1.0 - rng.random::<f64>();
                total += (u.ln() / ln_fail).floor() as u64 + 1;
            }
            total
        } else {
            // a sum of m geometric counts is m plus a negative binomial
            // number of failures, drawn as a gamma-mixed Poisson
            let m = parents as f64;
            let gamma = Gamma::new(m, theta - 1.0).map_err(|e| Error::invalid(e.to_string()))?;
            let lambda: f64 = gamma.sample(rng);
            let extra: f64 = if lambda > 0.0 {
                Poisson::new(lambda).map_err(|e| Error::invalid(e.to_string()))?.sample(rng)
            } else {
                0.0
            };
            if !(extra < GW_POPULATION_CAP as f64) {
                return Err(Error::PopulationOverflow { generation, size: u64::MAX });
            }
            parents + extra as u64
        };
        if next > GW_POPULATION_CAP {
            return Err(Error::PopulationOverflow { generation, size: next });
        }
        x.push(next);
    }
    Ok(Trajectory::Gw(x))
}

fn family_matches(model: &Model, traj: &Trajectory) -> Result<()> {
    match (model, traj) {
        (Model::Ar1(_), Trajectory::Ar1(_)) | (Model::Gw(_), Trajectory::Gw(_)) => Ok(()),
        _ => Err(Error::invalid(format!("{} trajectory does not match model {}", traj_name(traj), model.name()))),
    }
}

fn traj_name(traj: &Trajectory) -> &'static str {
    match traj {
        Trajectory::Ar1(_) => "ar1",
        Trajectory::Gw(_) => "gw",
    }
}

/// Sums of a GW path: `Σ X_{j−1}`, `X_n − X_0`, and `Σ (X_j − θ₀ X_{j−1})`.
struct GwSums {
    prev: u128,
    growth: u128,
    centred: f64,
}

fn gw_sums(x: &[u64], theta0: f64) -> GwSums {
    let n = x.len() - 1;
    let prev: u128 = x[..n].iter().map(|&v| v as u128).sum();
    let next: u128 = x[1..].iter().map(|&v| v as u128).sum();
    GwSums { prev, growth: (x[n] - x[0]) as u128, centred: exact_affine(next, prev, theta0) }
}

/// `a − θ b` for large integers `a ≈ θ b`, with the products and integer
/// conversions carried to double-double accuracy.
fn exact_affine(a: u128, b: u128, theta: f64) -> f64 {
    let split = |v: u128| {
        let hi = v as f64;
        let lo = (v as i128 - hi as i128) as f64;
        (hi, lo)
    };
    let (a_hi, a_lo) = split(a);
    let (b_hi, b_lo) = split(b);
    let p = theta * b_hi;
    let p_err = theta.mul_add(b_hi, -p);
    ((a_hi - p) - p_err) + (a_lo - theta * b_lo)
}

/// `W_n`, `Z_n`, `G_n` and the MLE at `theta0`.
///
/// AR(1): `W_n = δ_n² Σ X_{j−1}²`, `Z_n = δ_n Σ X_{j−1} ε_j` with
/// `ε_j = X_j − θ₀ X_{j−1}`, MLE `Σ X_{j−1}X_j / Σ X_{j−1}²`.
///
/// GW: `W_n = (θ₀ − 1) θ₀^{-n} Σ X_{j−1}`,
/// `G_n = [θ₀(θ₀ − 1) Σ X_{j−1}]^{-1/2} Σ (X_j − θ₀ X_{j−1})`,
/// `Z_n = W_n^{1/2} G_n`, MLE `Σ X_j / Σ X_{j−1}`.
pub fn local_stats(model: &Model, traj: &Trajectory, theta0: f64) -> Result<LocalStats> {
    family_matches(model, traj)?;
    let n = traj.n();
    let delta_n = norming_constant(model, theta0, n)?;
    match traj {
        Trajectory::Ar1(x) => {
            let (sxx, sxe) = ar1_sums(x, theta0);
            if !(sxx > 0.0) {
                return Err(Error::DegeneratePath("Σ X_{j-1}² = 0".into()));
            }
            let w_n = delta_n * delta_n * sxx;
            let z_n = delta_n * sxe;
            let offset = sxe / sxx;
            Ok(LocalStats {
                delta_n,
                w_n,
                z_n,
                g_n: z_n / w_n.sqrt(),
                mle: theta0 + offset,
                scaled_mle_error: z_n / w_n,
            })
        }
        Trajectory::Gw(x) => {
            let sums = gw_sums(x, theta0);
            let prev = sums.prev as f64;
            let ln_scale = (theta0 - 1.0).ln() - n as f64 * theta0.ln();
            let w_n = (ln_scale + prev.ln()).exp();
            let g_n = sums.centred / (theta0 * (theta0 - 1.0) * prev).sqrt();
            let z_n = w_n.sqrt() * g_n;
            let offset = sums.centred / prev;
            Ok(LocalStats {
                delta_n,
                w_n,
                z_n,
                g_n,
                mle: theta0 + offset,
                scaled_mle_error: offset / delta_n,
            })
        }
    }
}

fn ar1_sums(x: &[f64], theta0: f64) -> (f64, f64) {
    let (mut sxx, mut sxe) = (0.0, 0.0);
    for j in 1..x.len() {
        let eps = (-theta0).mul_add(x[j - 1], x[j]);
        sxx += x[j - 1] * x[j - 1];
        sxe += x[j - 1] * eps;
    }
    (sxx, sxe)
}

/// Exact `Λ_n = Σ_j [ln f_j(θ_n) − ln f_j(θ₀)]` with `θ_n = θ₀ + δ_n h`.
pub fn log_likelihood_ratio(model: &Model, traj: &Trajectory, theta0: f64, h: f64) -> Result<f64> {
    family_matches(model, traj)?;
    let n = traj.n();
    let delta_n = norming_constant(model, theta0, n)?;
    if h == 0.0 {
        return Ok(0.0);
    }
    let step = delta_n * h;
    let theta_n = theta0 + step;
    match traj {
        Trajectory::Ar1(x) => {
            if !theta_n.is_finite() {
                return Err(Error::ParameterRegion { theta: theta_n, region: "finite θ" });
            }
            // −½(ε_j − s_j)² + ½ε_j² = s_j(ε_j − s_j/2) with s_j = h δ_n X_{j−1}
            let mut total = 0.0;
            let mut comp = 0.0;
            for j in 1..x.len() {
                let eps = (-theta0).mul_add(x[j - 1], x[j]);
                let shift = h * (delta_n * x[j - 1]);
                let term = shift * (eps - 0.5 * shift);
                let t = total + term;
                comp += if total.abs() >= term.abs() { (total - t) + term } else { (term - t) + total };
                total = t;
            }
            Ok(total + comp)
        }
        Trajectory::Gw(x) => {
            if !(theta_n > 1.0) {
                return Err(Error::ParameterRegion { theta: theta_n, region: "θ > 1" });
            }
            let sums = gw_sums(x, theta0);
            let ln_ratio_theta = (step / theta0).ln_1p();
            let ln_ratio_fail = (step / (theta0 - 1.0)).ln_1p() - ln_ratio_theta;
            Ok(sums.growth as f64 * ln_ratio_fail - sums.prev as f64 * ln_ratio_theta)
        }
    }
}

/// `Λ_n − (h Z_n − h² W_n / 2)`.
pub fn lamn_remainder(model: &Model, traj: &Trajectory, theta0: f64, h: f64) -> Result<f64> {
    let lambda = log_likelihood_ratio(model, traj, theta0, h)?;
    let s = local_stats(model, traj, theta0)?;
    Ok(lambda - (h * s.z_n - 0.5 * h * h * s.w_n))
}

/// Path simulated under `model.theta0()`.
pub fn simulate<R: Rng + ?Sized>(model: &Model, n: usize, rng: &mut R) -> Result<Trajectory> {
    check_n(n)?;
    model.simulate(n, rng)
}
