//! Calibration diagnostics: Mincer–Zarnowitz regressions with HAC standard
//! errors, second and fourth moment summaries, the moment implications of
//! nested-information dominance, and a Gaussianity test that is robust to
//! serial correlation.

use std::fmt::Write as _;

use nalgebra::{Matrix2, Vector2};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{HorizonStats, TrackStats};
use crate::series::PairedSeries;

/// Survival function of the chi-squared distribution with two degrees of freedom.
pub fn chi2_2_sf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    (-0.5 * x.max(0.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MZFit {
    pub alpha: f64,
    pub beta: f64,
    pub r_squared: f64,
    pub se_alpha: f64,
    pub se_beta: f64,
    pub wald_stat: f64,
    pub wald_pvalue: f64,
    pub n: usize,
    pub bandwidth: usize,
}

impl MZFit {
    /// One-line report in the usual "estimate [se]" style.
    pub fn summary(&self) -> String {
        format!(
            "alpha = {:.6} [{:.6}], beta = {:.6} [{:.6}], R^2 = {:.6}, Wald = {:.6} (p = {:.6}), n = {}, lags = {}",
            self.alpha,
            self.se_alpha,
            self.beta,
            self.se_beta,
            self.r_squared,
            self.wald_stat,
            self.wald_pvalue,
            self.n,
            self.bandwidth
        )
    }
}

struct Ols {
    alpha: f64,
    beta: f64,
    r_squared: f64,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn ols(x: &[f64], y: &[f64], name: &str) -> Result<Ols> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(Error::DegenerateRegressor(name.to_string()));
    }
    let beta = sxy / sxx;
    let r_squared = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(Ols {
        alpha: my - beta * mx,
        beta,
        r_squared,
    })
}

/// Automatic Bartlett lag count from the Newey–West (1994) plug-in rule,
/// applied to the slope score `x_t u_t`.
pub fn newey_west_bandwidth(x: &[f64], resid: &[f64]) -> usize {
    let t = x.len();
    if t < 2 {
        return 0;
    }
    let h: Vec<f64> = x.iter().zip(resid).map(|(a, u)| a * u).collect();
    let pre = ((4.0 * (t as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize).min(t - 1);
    let autocov = |j: usize| h[j..].iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() / t as f64;
    let mut s0 = autocov(0);
    let mut s1 = 0.0;
    for j in 1..=pre {
        let c = autocov(j);
        s0 += 2.0 * c;
        s1 += 2.0 * j as f64 * c;
    }
    if !(s0.abs() > 0.0) || !s1.is_finite() {
        return 0;
    }
    let gamma = 1.1447 * ((s1 / s0).powi(2)).powf(1.0 / 3.0);
    let lags = (gamma * (t as f64).powf(1.0 / 3.0)).floor();
    if !lags.is_finite() {
        return 0;
    }
    (lags as usize).min(t - 1)
}

/// Bartlett-weighted long-run covariance of the OLS scores, sandwiched
/// between the inverse design cross-products. No small-sample correction.
fn hac_covariance(x: &[f64], resid: &[f64], lags: usize) -> Option<Matrix2<f64>> {
    let n = x.len();
    let scores: Vec<Vector2<f64>> = x
        .iter()
        .zip(resid)
        .map(|(a, u)| Vector2::new(*u, a * u))
        .collect();
    let mut meat = Matrix2::zeros();
    for g in &scores {
        meat += g * g.transpose();
    }
    for l in 1..=lags.min(n.saturating_sub(1)) {
        let w = 1.0 - l as f64 / (lags + 1) as f64;
        let mut acc = Matrix2::zeros();
        for t in l..n {
            acc += scores[t] * scores[t - l].transpose();
        }
        meat += (acc + acc.transpose()) * w;
    }
    let sx: f64 = x.iter().sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let bread = Matrix2::new(n as f64, sx, sx, sxx).try_inverse()?;
    Some(bread * meat * bread)
}

/// OLS of the realization on a constant and the forecast, with a HAC Wald
/// test of `(α, β) = (0, 1)`. `bandwidth = None` selects the lag count
/// automatically; `Some(0)` gives White's estimator.
pub fn mz_regression(series: &PairedSeries, track: &str, bandwidth: Option<usize>) -> Result<MZFit> {
    let x = series.track(track)?;
    let y = series.y();
    let n = y.len();
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    let fit = ols(x, y, track)?;
    let resid: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - fit.alpha - fit.beta * a).collect();
    let lags = bandwidth.unwrap_or_else(|| newey_west_bandwidth(x, &resid));
    let cov = hac_covariance(x, &resid, lags).ok_or_else(|| Error::DegenerateRegressor(track.to_string()))?;
    let r = Vector2::new(fit.alpha, fit.beta - 1.0);
    let wald_stat = if r == Vector2::zeros() {
        0.0
    } else {
        match cov.try_inverse() {
            Some(inv) if cov.determinant() > 0.0 => {
                let w = (r.transpose() * inv * r)[(0, 0)];
                if w.is_finite() && w >= 0.0 {
                    w
                } else {
                    f64::INFINITY
                }
            }
            _ => f64::INFINITY,
        }
    };
    Ok(MZFit {
        alpha: fit.alpha,
        beta: fit.beta,
        r_squared: fit.r_squared,
        se_alpha: cov[(0, 0)].max(0.0).sqrt(),
        se_beta: cov[(1, 1)].max(0.0).sqrt(),
        wald_stat,
        wald_pvalue: chi2_2_sf(wald_stat),
        n,
        bandwidth: lags,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackMoments {
    pub name: String,
    pub mse: f64,
    pub mean: f64,
    pub sigma: f64,
    pub second_moment: f64,
    pub fourth_moment: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub n: usize,
    pub centered: bool,
    pub mean_y: f64,
    pub sigma_y: f64,
    pub tracks: Vec<TrackMoments>,
}

fn sample_sd(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Per-track summary statistics. With `centered`, y and every forecast are
/// demeaned first.
pub fn moment_table(series: &PairedSeries, centered: bool) -> Result<MomentTable> {
    if series.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: series.len(),
        });
    }
    let owned;
    let s = if centered {
        owned = series.centered();
        &owned
    } else {
        series
    };
    let y = s.y();
    let n = y.len() as f64;
    let mut tracks = Vec::with_capacity(s.tracks().len());
    for t in s.tracks() {
        let x = &t.values;
        tracks.push(TrackMoments {
            name: t.name.clone(),
            mse: x.iter().zip(y).map(|(a, b)| (b - a) * (b - a)).sum::<f64>() / n,
            mean: mean(x),
            sigma: sample_sd(x),
            second_moment: x.iter().map(|a| a * a).sum::<f64>() / n,
            fourth_moment: x.iter().map(|a| a.powi(4)).sum::<f64>() / n,
            beta: ols(x, y, &t.name)?.beta,
        });
    }
    Ok(MomentTable {
        n: y.len(),
        centered,
        mean_y: mean(y),
        sigma_y: sample_sd(y),
        tracks,
    })
}

impl MomentTable {
    pub fn track(&self, name: &str) -> Result<&TrackMoments> {
        self.tracks
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::UnknownTrack(name.to_string()))
    }

    /// Inputs for the closed-form Gaussian classifier, with the common mean
    /// taken from the realizations.
    pub fn horizon_stats(&self, label: impl Into<String>) -> HorizonStats {
        HorizonStats {
            label: label.into(),
            mu: self.mean_y,
            sigma_y: self.sigma_y,
            tracks: self
                .tracks
                .iter()
                .map(|t| TrackStats {
                    name: t.name.clone(),
                    sigma: t.sigma,
                    beta: t.beta,
                })
                .collect(),
        }
    }

    /// Aligned text table, six decimals.
    pub fn to_text(&self) -> String {
        let width = self.tracks.iter().map(|t| t.name.len()).max().unwrap_or(0).max(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$} {:>12} {:>12} {:>12} {:>12}",
            "track", "MSE", "sigma", "beta", "E[X^4]"
        );
        for t in &self.tracks {
            let _ = writeln!(
                out,
                "{:<width$} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
                t.name, t.mse, t.sigma, t.beta, t.fourth_moment
            );
        }
        let _ = writeln!(out, "sigma_y = {:.6}, n = {}", self.sigma_y, self.n);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicationCheck {
    pub name: String,
    pub passed: bool,
    /// Quantities that were compared, in the order the check names them.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicationReport {
    pub track_a: String,
    pub track_b: String,
    pub checks: Vec<ImplicationCheck>,
}

impl ImplicationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Checks what "A dominates B" implies for two forecasts built from nested
/// information with symmetric noise: equal means (within two standard
/// errors), slopes at most one, and larger even moments for B.
pub fn dominance_implications(table: &MomentTable, track_a: &str, track_b: &str) -> Result<ImplicationReport> {
    let a = table.track(track_a)?;
    let b = table.track(track_b)?;
    let n = table.n as f64;
    let mean_check = |name: &str, m1: f64, s1: f64, m2: f64, s2: f64| {
        let se = ((s1 * s1 + s2 * s2) / n).sqrt();
        ImplicationCheck {
            name: name.to_string(),
            passed: (m1 - m2).abs() <= 2.0 * se,
            values: vec![m1, m2, se],
        }
    };
    let checks = vec![
        mean_check("mean_a_equals_mean_b", a.mean, a.sigma, b.mean, b.sigma),
        mean_check("mean_a_equals_mean_y", a.mean, a.sigma, table.mean_y, table.sigma_y),
        mean_check("mean_b_equals_mean_y", b.mean, b.sigma, table.mean_y, table.sigma_y),
        ImplicationCheck {
            name: "slope_a_at_most_one".into(),
            passed: a.beta <= 1.0,
            values: vec![a.beta],
        },
        ImplicationCheck {
            name: "slope_b_at_most_one".into(),
            passed: b.beta <= 1.0,
            values: vec![b.beta],
        },
        ImplicationCheck {
            name: "second_moment_b_at_least_a".into(),
            passed: b.second_moment >= a.second_moment,
            values: vec![b.second_moment, a.second_moment],
        },
        ImplicationCheck {
            name: "fourth_moment_b_at_least_a".into(),
            passed: b.fourth_moment >= a.fourth_moment,
            values: vec![b.fourth_moment, a.fourth_moment],
        },
    ];
    Ok(ImplicationReport {
        track_a: track_a.to_string(),
        track_b: track_b.to_string(),
        checks,
    })
}

/// Outcome of a hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

impl TestReport {
    pub fn rejects(&self, level: f64) -> bool {
        self.p_value < level
    }
}

/// Biased sample autocovariances `γ̂(0..n)` via zero-padded FFT.
pub fn autocovariances(centered: &[f64]) -> Vec<f64> {
    let n = centered.len();
    let len = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut buf: Vec<Complex<f64>> = centered
        .iter()
        .map(|&v| Complex::new(v, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    fwd.process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    inv.process(&mut buf);
    let scale = 1.0 / (len as f64 * n as f64);
    buf[..n].iter().map(|c| c.re * scale).collect()
}

/// Skewness–kurtosis test of unconditional Gaussianity for a stationary
/// series (Lobato and Velasco, 2004). The normalizers use all sample
/// autocovariances, so there is nothing to tune.
pub fn lobato_velasco(sample: &[f64]) -> Result<TestReport> {
    let n = sample.len();
    if n < 30 {
        return Err(Error::TooFewObservations { needed: 30, got: n });
    }
    if let Some(row) = sample.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            column: "sample".into(),
            row,
        });
    }
    let m = mean(sample);
    let c: Vec<f64> = sample.iter().map(|v| v - m).collect();
    let nf = n as f64;
    let mu2 = c.iter().map(|v| v * v).sum::<f64>() / nf;
    let mu3 = c.iter().map(|v| v * v * v).sum::<f64>() / nf;
    let mu4 = c.iter().map(|v| v.powi(4)).sum::<f64>() / nf;
    if !(mu2 > 0.0) {
        return Err(Error::TooFewEffectiveObservations);
    }
    let gamma = autocovariances(&c);
    let g = |k: usize| if k >= n { 0.0 } else { gamma[k] };
    let f_hat = |power: i32| {
        let mut acc = g(0) * (g(0) + g(n)).powi(power - 1);
        for t in 1..n {
            // lags t and −t contribute equally
            acc += 2.0 * g(t) * (g(t) + g(n - t)).powi(power - 1);
        }
        acc
    };
    let (f3, f4) = (f_hat(3), f_hat(4));
    let excess = mu4 - 3.0 * mu2 * mu2;
    let statistic = nf * mu3 * mu3 / (6.0 * f3) + nf * excess * excess / (24.0 * f4);
    Ok(TestReport {
        test: "lobato_velasco".into(),
        statistic,
        p_value: chi2_2_sf(statistic),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn series(y: &[f64], x: &[f64]) -> PairedSeries {
        PairedSeries::new(y.to_vec()).unwrap().with_track("x", x.to_vec()).unwrap()
    }

    #[test]
    fn perfect_calibration() {
        let v: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let fit = mz_regression(&series(&v, &v), "x", None).unwrap();
        assert_abs_diff_eq!(fit.alpha, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.beta, 1.0, epsilon = 1e-14);
        assert_eq!(fit.r_squared, 1.0);
        assert_eq!(fit.wald_stat, 0.0);
        assert_eq!(fit.wald_pvalue, 1.0);
    }

    #[test]
    fn exact_line_through_origin() {
        let fit = mz_regression(&series(&[0.0, 2.0, 4.0], &[0.0, 1.0, 2.0]), "x", Some(0)).unwrap();
        assert_abs_diff_eq!(fit.alpha, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(fit.beta, 2.0, epsilon = 1e-15);
        // zero residuals, nonzero restriction: singular covariance
        assert_eq!(fit.wald_stat, f64::INFINITY);
        assert_eq!(fit.wald_pvalue, 0.0);
    }

    #[test]
    fn degenerate_and_short_inputs() {
        assert!(matches!(
            mz_regression(&series(&[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]), "x", None),
            Err(Error::DegenerateRegressor(_))
        ));
        assert!(matches!(
            mz_regression(&series(&[1.0, 2.0], &[1.0, 3.0]), "x", None),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn zero_bandwidth_is_white_estimator() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.71).cos() * (1.0 + i as f64 / 20.0)).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, a)| 0.3 + 0.8 * a + ((i * 7 % 11) as f64 - 5.0) / 7.0).collect();
        let fit = mz_regression(&series(&y, &x), "x", Some(0)).unwrap();
        // direct White sandwich
        let n = x.len() as f64;
        let (sx, sxx): (f64, f64) = (x.iter().sum(), x.iter().map(|a| a * a).sum());
        let u: Vec<f64> = x.iter().zip(&y).map(|(a, b)| b - fit.alpha - fit.beta * a).collect();
        let (m00, m01, m11) = u.iter().zip(&x).fold((0.0, 0.0, 0.0), |acc, (e, a)| {
            (acc.0 + e * e, acc.1 + e * e * a, acc.2 + e * e * a * a)
        });
        let det = n * sxx - sx * sx;
        let b = [[sxx / det, -sx / det], [-sx / det, n / det]];
        let m = [[m00, m01], [m01, m11]];
        let mut v = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        v[i][j] += b[i][k] * m[k][l] * b[l][j];
                    }
                }
            }
        }
        assert_abs_diff_eq!(fit.se_alpha, v[0][0].sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(fit.se_beta, v[1][1].sqrt(), epsilon = 1e-12);
        assert_eq!(fit.bandwidth, 0);
    }

    #[test]
    fn moment_table_basics() {
        let t = moment_table(&series(&[-1.0, 1.0], &[-1.0, 1.0]), false).unwrap();
        let x = t.track("x").unwrap();
        assert_eq!(x.mse, 0.0);
        assert_eq!(x.sigma, t.sigma_y);
        assert_abs_diff_eq!(x.beta, 1.0, epsilon = 1e-15);
        assert!(matches!(t.track("z"), Err(Error::UnknownTrack(_))));
        assert!(matches!(
            moment_table(&series(&[1.0], &[1.0]), false),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn centered_table_has_zero_means() {
        let t = moment_table(&series(&[1.0, 2.0, 6.0], &[3.0, 3.5, 8.0]), true).unwrap();
        assert!(t.mean_y.abs() < 1e-15);
        assert!(t.track("x").unwrap().mean.abs() < 1e-15);
        assert!(t.to_text().contains("sigma_y"));
    }

    #[test]
    fn table_two_implications_for_rm_over_rw() {
        let table = MomentTable {
            n: 200,
            centered: true,
            mean_y: 0.0,
            sigma_y: 1.160,
            tracks: vec![
                TrackMoments {
                    name: "RW".into(),
                    mse: 1.412,
                    mean: 0.0,
                    sigma: 1.156,
                    second_moment: 1.156 * 1.156,
                    fourth_moment: 5.393,
                    beta: 0.471,
                },
                TrackMoments {
                    name: "RM".into(),
                    mse: 0.886,
                    mean: 0.0,
                    sigma: 0.924,
                    second_moment: 0.924 * 0.924,
                    fourth_moment: 1.895,
                    beta: 0.766,
                },
            ],
        };
        let r = dominance_implications(&table, "RM", "RW").unwrap();
        assert!(r.all_passed(), "{:?}", r.failing());
        let r = dominance_implications(&table, "RW", "RM").unwrap();
        assert_eq!(
            r.failing(),
            vec!["second_moment_b_at_least_a", "fourth_moment_b_at_least_a"]
        );
    }

    #[test]
    fn autocovariances_match_direct_sums() {
        let c: Vec<f64> = (0..37).map(|i| ((i * 13 % 7) as f64 - 3.0) * 0.5).collect();
        let g = autocovariances(&c);
        for k in [0, 1, 5, 36] {
            let direct = c[k..].iter().zip(&c).map(|(a, b)| a * b).sum::<f64>() / c.len() as f64;
            assert_abs_diff_eq!(g[k], direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn lobato_velasco_edge_cases() {
        assert!(matches!(
            lobato_velasco(&[1.0; 29]),
            Err(Error::TooFewObservations { .. })
        ));
        assert!(matches!(
            lobato_velasco(&[2.5; 40]),
            Err(Error::TooFewEffectiveObservations)
        ));
        // symmetric two-point data: no skewness, strongly platykurtic
        let v: Vec<f64> = (0..400).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let r = lobato_velasco(&v).unwrap();
        assert!(r.statistic > 0.0 && r.p_value <= 1.0);
    }

    #[test]
    fn chi2_tail() {
        assert_eq!(chi2_2_sf(0.0), 1.0);
        assert_abs_diff_eq!(chi2_2_sf(5.991_464_547_107_979), 0.05, epsilon = 1e-12);
        assert_eq!(chi2_2_sf(f64::INFINITY), 0.0);
    }
}
