//! Seedable scenario generators. Every generator is a pure function of its
//! parameters and seed and returns a [`PairedSeries`] with tracks `A` and `B`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::GaussianPairParams;
use crate::series::PairedSeries;

pub const TRACK_A: &str = "A";
pub const TRACK_B: &str = "B";

const AR1_BURN_IN: usize = 1000;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn check_sigma(name: &'static str, value: f64) -> Result<()> {
    if value < 0.0 || !value.is_finite() {
        return Err(Error::NegativeSigma { name, value });
    }
    Ok(())
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "sample size must be at least 1".into(),
        });
    }
    Ok(())
}

fn pair(y: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<PairedSeries> {
    PairedSeries::new(y)?.with_track(TRACK_A, a)?.with_track(TRACK_B, b)
}

/// Mean-zero distribution for independent components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ComponentDistribution {
    Normal { sigma: f64 },
    /// Uniform on `[-half_width, half_width]`.
    Uniform { half_width: f64 },
    /// `high` with probability `p_high`, otherwise `low`.
    TwoPoint { low: f64, high: f64, p_high: f64 },
}

impl ComponentDistribution {
    fn validate(&self) -> Result<()> {
        match *self {
            ComponentDistribution::Normal { sigma } => check_sigma("sigma", sigma),
            ComponentDistribution::Uniform { half_width } => {
                if half_width < 0.0 || !half_width.is_finite() {
                    return Err(Error::UnsupportedDistribution(format!(
                        "uniform half width must be a finite nonnegative number, got {half_width}"
                    )));
                }
                Ok(())
            }
            ComponentDistribution::TwoPoint { low, high, p_high } => {
                if !(0.0..=1.0).contains(&p_high) || !low.is_finite() || !high.is_finite() {
                    return Err(Error::UnsupportedDistribution(format!(
                        "two-point law needs finite atoms and p_high in [0, 1], got ({low}, {high}, {p_high})"
                    )));
                }
                let mean = low * (1.0 - p_high) + high * p_high;
                if mean.abs() > 1e-12 * low.abs().max(high.abs()).max(1.0) {
                    return Err(Error::UnsupportedDistribution(format!(
                        "two-point law has mean {mean}, components must be centered"
                    )));
                }
                Ok(())
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            ComponentDistribution::Normal { sigma } => sigma * std_normal(rng),
            ComponentDistribution::Uniform { half_width } => half_width * (2.0 * rng.gen::<f64>() - 1.0),
            ComponentDistribution::TwoPoint { low, high, p_high } => {
                if rng.gen::<f64>() < p_high {
                    high
                } else {
                    low
                }
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ComponentDistribution::Normal { sigma } => sigma * sigma,
            ComponentDistribution::Uniform { half_width } => half_width * half_width / 3.0,
            ComponentDistribution::TwoPoint { low, high, p_high } => {
                low * low * (1.0 - p_high) + high * high * p_high
            }
        }
    }
}

/// `Y = Z₁ + Z₂ + Z₃ + Z₄` with `A = Z₁ + Z₂` and `B = Z₃`. Both forecasts
/// are auto-calibrated and A is larger in convex order.
pub fn gen_sum_components(dist: ComponentDistribution, n: usize, seed: u64) -> Result<PairedSeries> {
    dist.validate()?;
    check_n(n)?;
    let mut rng = rng(seed);
    let (mut y, mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let z: [f64; 4] = std::array::from_fn(|_| dist.sample(&mut rng));
        a.push(z[0] + z[1]);
        b.push(z[2]);
        y.push(z[0] + z[1] + z[2] + z[3]);
    }
    pair(y, a, b)
}

/// `A ~ N(0,1)`, `Y = A + ε`, `B = A + ζ` with `ζ ~ N(0, σ_ζ²)`.
pub fn gen_noisy_calibrated(sigma_zeta: f64, n: usize, seed: u64) -> Result<PairedSeries> {
    check_sigma("sigma_zeta", sigma_zeta)?;
    check_n(n)?;
    let mut rng = rng(seed);
    let (mut y, mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let x = std_normal(&mut rng);
        let eps = std_normal(&mut rng);
        let zeta = sigma_zeta * std_normal(&mut rng);
        a.push(x);
        b.push(x + zeta);
        y.push(x + eps);
    }
    pair(y, a, b)
}

/// Stationary AR(1) `Y_t = a Y_{t−1} + σ ε_t` with the one-step forecast
/// `A_t = a Y_{t−1}` and the `h`-step forecast `B_t = a^h Y_{t−h}`.
pub fn gen_ar1_horizons(a: f64, sigma: f64, h: usize, n: usize, seed: u64) -> Result<PairedSeries> {
    if !(a.abs() < 1.0) {
        return Err(Error::NonStationary(a));
    }
    check_sigma("sigma", sigma)?;
    check_n(n)?;
    if h < 2 {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("horizon must be at least 2, got {h}"),
        });
    }
    let mut rng = rng(seed);
    let mut level = sigma / (1.0 - a * a).sqrt() * std_normal(&mut rng);
    for _ in 0..AR1_BURN_IN {
        level = a * level + sigma * std_normal(&mut rng);
    }
    // path[k] holds Y_{k−h}; rows start at k = h
    let mut path = Vec::with_capacity(n + h);
    path.push(level);
    for _ in 1..n + h {
        level = a * level + sigma * std_normal(&mut rng);
        path.push(level);
    }
    let ah = a.powi(h as i32);
    let y = path[h..].to_vec();
    let xa = (0..n).map(|t| a * path[t + h - 1]).collect();
    let xb = (0..n).map(|t| ah * path[t]).collect();
    pair(y, xa, xb)
}

/// `Y = W + ε`, `X_j = W + η_j` with Gaussian noises independent of `W`.
pub fn gen_common_info_noise(
    w_dist: ComponentDistribution,
    eps_sigma: f64,
    eta_a_sigma: f64,
    eta_b_sigma: f64,
    n: usize,
    seed: u64,
) -> Result<PairedSeries> {
    w_dist.validate()?;
    check_sigma("eps_sigma", eps_sigma)?;
    check_sigma("eta_a_sigma", eta_a_sigma)?;
    check_sigma("eta_b_sigma", eta_b_sigma)?;
    check_n(n)?;
    let mut rng = rng(seed);
    let (mut y, mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let w = w_dist.sample(&mut rng);
        let eps = std_normal(&mut rng);
        let ea = std_normal(&mut rng);
        let eb = std_normal(&mut rng);
        y.push(w + eps_sigma * eps);
        a.push(if eta_a_sigma == 0.0 { w } else { w + eta_a_sigma * ea });
        b.push(if eta_b_sigma == 0.0 { w } else { w + eta_b_sigma * eb });
    }
    pair(y, a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Estimator {
    Ols,
    Ridge { lambda: f64 },
}

/// A coefficient estimator together with the scale applied to the shared
/// training noise it sees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearForecaster {
    pub estimator: Estimator,
    #[serde(default = "unit_scale")]
    pub noise_scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl LinearForecaster {
    pub fn ols() -> Self {
        Self {
            estimator: Estimator::Ols,
            noise_scale: 1.0,
        }
    }

    pub fn ridge(lambda: f64) -> Self {
        Self {
            estimator: Estimator::Ridge { lambda },
            noise_scale: 1.0,
        }
    }

    pub fn with_noise_scale(mut self, noise_scale: f64) -> Self {
        self.noise_scale = noise_scale;
        self
    }

    fn fit(&self, design: &DMatrix<f64>, target: &DVector<f64>) -> Result<DVector<f64>> {
        let p = design.ncols();
        let mut gram = design.transpose() * design;
        match self.estimator {
            Estimator::Ols => {
                if design.nrows() < p {
                    return Err(Error::SingularDesign);
                }
            }
            Estimator::Ridge { lambda } => {
                if !(lambda >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name: "lambda",
                        reason: format!("ridge penalty must be nonnegative, got {lambda}"),
                    });
                }
                for k in 0..p {
                    gram[(k, k)] += lambda;
                }
            }
        }
        let chol = gram.cholesky().ok_or(Error::SingularDesign)?;
        Ok(chol.solve(&(design.transpose() * target)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModelConfig {
    pub p: usize,
    pub n_train: usize,
    pub sigma_eps: f64,
    pub forecaster_a: LinearForecaster,
    pub forecaster_b: LinearForecaster,
}

/// Evaluation sample plus the coefficients behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModelDraw {
    pub series: PairedSeries,
    pub beta: Vec<f64>,
    pub beta_hat_a: Vec<f64>,
    pub beta_hat_b: Vec<f64>,
}

/// `Y = Z'β + ε` with standard normal regressors and coefficients. Both
/// forecasters are trained on the same design; forecaster `j` sees the
/// shared training noise multiplied by its `noise_scale`. Forecasts on
/// fresh rows are `Z₀'β̂_j`.
pub fn draw_linear_model(config: &LinearModelConfig, n_eval: usize, seed: u64) -> Result<LinearModelDraw> {
    let LinearModelConfig {
        p,
        n_train,
        sigma_eps,
        forecaster_a,
        forecaster_b,
    } = *config;
    check_sigma("sigma_eps", sigma_eps)?;
    check_sigma("noise_scale", forecaster_a.noise_scale)?;
    check_sigma("noise_scale", forecaster_b.noise_scale)?;
    check_n(n_eval)?;
    if p == 0 {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: "dimension must be at least 1".into(),
        });
    }
    let mut rng = rng(seed);
    let beta = DVector::from_fn(p, |_, _| std_normal(&mut rng));
    let design = DMatrix::from_fn(n_train, p, |_, _| std_normal(&mut rng));
    let noise = DVector::from_fn(n_train, |_, _| sigma_eps * std_normal(&mut rng));
    let signal = &design * &beta;
    let beta_hat_a = forecaster_a.fit(&design, &(&signal + &noise * forecaster_a.noise_scale))?;
    let beta_hat_b = forecaster_b.fit(&design, &(&signal + &noise * forecaster_b.noise_scale))?;

    let eval = DMatrix::from_fn(n_eval, p, |_, _| std_normal(&mut rng));
    let eval_noise = DVector::from_fn(n_eval, |_, _| sigma_eps * std_normal(&mut rng));
    let y = &eval * &beta + eval_noise;
    let xa = &eval * &beta_hat_a;
    let xb = &eval * &beta_hat_b;
    Ok(LinearModelDraw {
        series: pair(y.as_slice().to_vec(), xa.as_slice().to_vec(), xb.as_slice().to_vec())?,
        beta: beta.as_slice().to_vec(),
        beta_hat_a: beta_hat_a.as_slice().to_vec(),
        beta_hat_b: beta_hat_b.as_slice().to_vec(),
    })
}

pub fn gen_linear_model(config: &LinearModelConfig, n_eval: usize, seed: u64) -> Result<PairedSeries> {
    draw_linear_model(config, n_eval, seed).map(|d| d.series)
}

/// Lower-triangular `L` with `L Lᵀ = m` for a positive semi-definite `m`.
/// Zero pivots are allowed as long as the remaining column is zero too.
pub fn semidefinite_cholesky(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = m.nrows();
    let scale = (0..k).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    let mut l = DMatrix::zeros(k, k);
    for j in 0..k {
        let d = m[(j, j)] - (0..j).map(|c| l[(j, c)] * l[(j, c)]).sum::<f64>();
        if d < -tol {
            return Err(Error::NotPositiveDefinite);
        }
        if d <= tol {
            for i in j + 1..k {
                let r = m[(i, j)] - (0..j).map(|c| l[(i, c)] * l[(j, c)]).sum::<f64>();
                if r.abs() > 1e-9 * scale {
                    return Err(Error::NotPositiveDefinite);
                }
            }
            continue;
        }
        let piv = d.sqrt();
        l[(j, j)] = piv;
        for i in j + 1..k {
            let r = m[(i, j)] - (0..j).map(|c| l[(i, c)] * l[(j, c)]).sum::<f64>();
            // keep duplicated rows bit-identical
            l[(i, j)] = if r == d { piv } else { r / piv };
        }
    }
    Ok(l)
}

/// Covariance of `(Y, X_A, X_B)` implied by two forecast blocks and the
/// forecast cross-correlation.
pub fn trivariate_covariance(
    params_a: &GaussianPairParams,
    params_b: &GaussianPairParams,
    cross_corr: f64,
) -> Result<DMatrix<f64>> {
    if (params_a.sigma_y() - params_b.sigma_y()).abs() > 1e-12 * params_a.sigma_y().max(params_b.sigma_y()) {
        return Err(Error::InvalidParameter {
            name: "sigma_y",
            reason: "both blocks must describe the same realization".into(),
        });
    }
    if (params_a.mu_y() - params_b.mu_y()).abs() > 1e-12 {
        return Err(Error::InvalidParameter {
            name: "mu_y",
            reason: "both blocks must describe the same realization".into(),
        });
    }
    if !(cross_corr.abs() <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "cross_corr",
            reason: format!("correlation {cross_corr} outside [-1, 1]"),
        });
    }
    let (sy, sa, sb) = (params_a.sigma_y(), params_a.sigma_j(), params_b.sigma_j());
    let cya = params_a.rho_yj() * sy * sa;
    let cyb = params_b.rho_yj() * sy * sb;
    let cab = cross_corr * sa * sb;
    Ok(DMatrix::from_row_slice(
        3,
        3,
        &[sy * sy, cya, cyb, cya, sa * sa, cab, cyb, cab, sb * sb],
    ))
}

/// Trivariate normal draws matching both forecast blocks. Requests whose
/// covariance is not positive semi-definite are rejected, never repaired.
pub fn gen_gaussian_pair(
    params_a: &GaussianPairParams,
    params_b: &GaussianPairParams,
    cross_corr: f64,
    n: usize,
    seed: u64,
) -> Result<PairedSeries> {
    check_n(n)?;
    let cov = trivariate_covariance(params_a, params_b, cross_corr)?;
    let l = semidefinite_cholesky(&cov)?;
    let means = [params_a.mu_y(), params_a.mu_j(), params_b.mu_j()];
    let mut rng = rng(seed);
    let mut cols: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(n));
    for _ in 0..n {
        let z: [f64; 3] = std::array::from_fn(|_| std_normal(&mut rng));
        for (r, col) in cols.iter_mut().enumerate() {
            col.push(means[r] + (0..=r).map(|c| l[(r, c)] * z[c]).sum::<f64>());
        }
    }
    let [y, a, b] = cols;
    pair(y, a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters")]
pub enum Scenario {
    SumComponents {
        component: ComponentDistribution,
    },
    NoisyCalibrated {
        sigma_zeta: f64,
    },
    #[serde(rename = "AR1Horizons")]
    Ar1Horizons {
        a: f64,
        sigma: f64,
        h: usize,
    },
    GaussianPair {
        a: GaussianPairParams,
        b: GaussianPairParams,
        cross_corr: f64,
    },
    CommonInfoNoise {
        w: ComponentDistribution,
        eps_sigma: f64,
        eta_a_sigma: f64,
        eta_b_sigma: f64,
    },
    LinearModelEstimation(LinearModelConfig),
}

/// A scenario with sample size and seed, as read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(flatten)]
    pub scenario: Scenario,
    pub n: usize,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn generate(&self) -> Result<PairedSeries> {
        let (n, seed) = (self.n, self.seed);
        match &self.scenario {
            Scenario::SumComponents { component } => gen_sum_components(*component, n, seed),
            Scenario::NoisyCalibrated { sigma_zeta } => gen_noisy_calibrated(*sigma_zeta, n, seed),
            Scenario::Ar1Horizons { a, sigma, h } => gen_ar1_horizons(*a, *sigma, *h, n, seed),
            Scenario::GaussianPair { a, b, cross_corr } => {
                // deserialized values skip the constructor checks
                let revalidate = |p: &GaussianPairParams| {
                    GaussianPairParams::new(p.mu_y(), p.mu_j(), p.sigma_j(), p.sigma_y(), p.rho_yj())
                };
                gen_gaussian_pair(&revalidate(a)?, &revalidate(b)?, *cross_corr, n, seed)
            }
            Scenario::CommonInfoNoise {
                w,
                eps_sigma,
                eta_a_sigma,
                eta_b_sigma,
            } => gen_common_info_noise(*w, *eps_sigma, *eta_a_sigma, *eta_b_sigma, n, seed),
            Scenario::LinearModelEstimation(config) => gen_linear_model(config, n, seed),
        }
    }
}
