//! Consistent scoring functions for the mean and for expectiles.
//!
//! Scores are negatively oriented: smaller is better. The Bregman family
//! members follow the usual table of log-likelihood type losses; the forms
//! for Bernoulli, QLIKE and Poisson drop the `φ(y)` term so they stay finite
//! on the boundary of the realization range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    SquaredError,
    BernoulliLogLoss,
    Qlike,
    Poisson,
    ElementaryMean,
    ElementaryExpectile,
}

impl ScoreKind {
    pub const BREGMAN: [ScoreKind; 4] = [
        ScoreKind::SquaredError,
        ScoreKind::BernoulliLogLoss,
        ScoreKind::Qlike,
        ScoreKind::Poisson,
    ];

    pub fn is_elementary(self) -> bool {
        matches!(self, ScoreKind::ElementaryMean | ScoreKind::ElementaryExpectile)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::SquaredError => "squared error",
            ScoreKind::BernoulliLogLoss => "Bernoulli log loss",
            ScoreKind::Qlike => "QLIKE",
            ScoreKind::Poisson => "Poisson deviance",
            ScoreKind::ElementaryMean => "elementary mean score",
            ScoreKind::ElementaryExpectile => "elementary expectile score",
        }
    }

    /// Whether `x` is an admissible forecast for this score.
    pub fn forecast_admissible(self, x: f64) -> bool {
        x.is_finite()
            && match self {
                ScoreKind::BernoulliLogLoss => x > 0.0 && x < 1.0,
                ScoreKind::Qlike | ScoreKind::Poisson => x > 0.0,
                _ => true,
            }
    }

    /// Whether `y` is an admissible realization for this score.
    pub fn realization_admissible(self, y: f64) -> bool {
        y.is_finite()
            && match self {
                ScoreKind::BernoulliLogLoss => (0.0..=1.0).contains(&y),
                ScoreKind::Qlike | ScoreKind::Poisson => y >= 0.0,
                _ => true,
            }
    }
}

/// A fully parameterized scoring function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSpec {
    kind: ScoreKind,
    theta: Option<f64>,
    tau: Option<f64>,
}

impl ScoreSpec {
    pub fn bregman(kind: ScoreKind) -> Result<Self> {
        if kind.is_elementary() {
            return Err(Error::MissingParameter("theta"));
        }
        Ok(Self {
            kind,
            theta: None,
            tau: None,
        })
    }

    pub fn elementary_mean(theta: f64) -> Result<Self> {
        check_theta(theta)?;
        Ok(Self {
            kind: ScoreKind::ElementaryMean,
            theta: Some(theta),
            tau: Some(0.5),
        })
    }

    pub fn elementary_expectile(theta: f64, tau: f64) -> Result<Self> {
        check_theta(theta)?;
        check_tau(tau)?;
        Ok(Self {
            kind: ScoreKind::ElementaryExpectile,
            theta: Some(theta),
            tau: Some(tau),
        })
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn tau(&self) -> Option<f64> {
        self.tau
    }

    /// Dispatches to [`bregman_score`] or [`elementary_score`].
    pub fn score(&self, x: f64, y: f64) -> Result<ScoreValue> {
        if self.kind.is_elementary() {
            elementary_score(self, x, y)
        } else {
            bregman_score(self, x, y)
        }
    }
}

/// Negatively oriented penalty.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ScoreValue(pub f64);

impl ScoreValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

pub fn bregman_score(spec: &ScoreSpec, x: f64, y: f64) -> Result<ScoreValue> {
    let kind = spec.kind;
    if kind.is_elementary() {
        return Err(Error::InvalidParameter {
            name: "kind",
            reason: format!("{} is not a Bregman score", kind.name()),
        });
    }
    if !kind.forecast_admissible(x) || !kind.realization_admissible(y) {
        return Err(Error::DomainViolation {
            score: kind.name(),
            x,
            y,
        });
    }
    let v = match kind {
        ScoreKind::SquaredError => (y - x) * (y - x),
        ScoreKind::BernoulliLogLoss => -xlogy(y, x) - xlogy(1.0 - y, 1.0 - x),
        ScoreKind::Qlike => x.ln() + y / x - 1.0,
        ScoreKind::Poisson => -xlogy(y, x) + x,
        ScoreKind::ElementaryMean | ScoreKind::ElementaryExpectile => unreachable!(),
    };
    Ok(ScoreValue(v))
}

/// `|1{y < θ} − τ| (θ − y) 1{x > θ}`. Ties `x == θ` score zero.
pub fn elementary_score(spec: &ScoreSpec, x: f64, y: f64) -> Result<ScoreValue> {
    if !spec.kind.is_elementary() {
        return Err(Error::MissingParameter("theta"));
    }
    let theta = spec.theta.ok_or(Error::MissingParameter("theta"))?;
    let tau = spec.tau.ok_or(Error::MissingParameter("tau"))?;
    Ok(ScoreValue(elementary(x, y, theta, tau)))
}

#[inline]
pub(crate) fn elementary(x: f64, y: f64, theta: f64, tau: f64) -> f64 {
    if x > theta {
        let w = if y < theta { 1.0 - tau } else { tau };
        w * (theta - y)
    } else {
        0.0
    }
}

/// Squared-error member of the consistent class for the `tau`-expectile,
/// `|1{y < x} − τ| (y − x)²`.
pub fn expectile_squared_error(x: f64, y: f64, tau: f64) -> f64 {
    let w = if y < x { 1.0 - tau } else { tau };
    w * (y - x) * (y - x)
}

pub fn mean_functional(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(sample.iter().sum::<f64>() / sample.len() as f64)
}

/// Empirical `tau`-expectile: the root of
/// `(1 − τ) Σ_{y ≤ t} (t − y) = τ Σ_{y ≥ t} (y − t)`.
pub fn expectile(sample: &[f64], tau: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    check_tau(tau)?;
    let identity = |t: f64| {
        let mut below = 0.0;
        let mut above = 0.0;
        for &y in sample {
            if y <= t {
                below += t - y;
            } else {
                above += y - t;
            }
        }
        (1.0 - tau) * below - tau * above
    };
    let slope = |t: f64| {
        let below = sample.iter().filter(|&&y| y <= t).count() as f64;
        (1.0 - tau) * below + tau * (sample.len() as f64 - below)
    };

    let mut lo = sample.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(lo);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if identity(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // the identity is piecewise linear, so one Newton step lands on the root
    // whenever the bracket sits inside a single linear piece
    let t = 0.5 * (lo + hi);
    let polished = t - identity(t) / slope(t);
    if (lo - 1e-10..=hi + 1e-10).contains(&polished) && identity(polished).abs() <= identity(t).abs() {
        Ok(polished)
    } else {
        Ok(t)
    }
}

fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::BadTau(tau))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "theta",
            reason: "must be finite".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn score(kind: ScoreKind, x: f64, y: f64) -> f64 {
        bregman_score(&ScoreSpec::bregman(kind).unwrap(), x, y)
            .unwrap()
            .value()
    }

    #[test]
    fn table_values() {
        assert_eq!(score(ScoreKind::SquaredError, 1.0, 3.0), 4.0);
        assert_eq!(score(ScoreKind::Qlike, 1.0, 1.0), 0.0);
        assert_abs_diff_eq!(
            score(ScoreKind::Qlike, 2.0, 1.0),
            2f64.ln() + 0.5 - 1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(score(ScoreKind::Qlike, 2.0, 1.0), 0.193147, epsilon = 1e-6);
        assert_eq!(score(ScoreKind::Poisson, 1.0, 0.0), 1.0);
    }

    #[test]
    fn boundary_realizations_are_legal() {
        assert!(score(ScoreKind::BernoulliLogLoss, 0.3, 0.0).is_finite());
        assert!(score(ScoreKind::BernoulliLogLoss, 0.3, 1.0).is_finite());
        assert!(score(ScoreKind::Qlike, 0.3, 0.0).is_finite());
        assert!(score(ScoreKind::Poisson, 0.3, 0.0).is_finite());
    }

    #[test]
    fn domain_violations() {
        let q = ScoreSpec::bregman(ScoreKind::Qlike).unwrap();
        assert!(matches!(
            bregman_score(&q, 0.0, 1.0),
            Err(Error::DomainViolation { .. })
        ));
        assert!(matches!(
            bregman_score(&q, 1.0, -0.1),
            Err(Error::DomainViolation { .. })
        ));
        let b = ScoreSpec::bregman(ScoreKind::BernoulliLogLoss).unwrap();
        assert!(bregman_score(&b, 1.0, 1.0).is_err());
        assert!(bregman_score(&b, 0.5, 1.5).is_err());
        let p = ScoreSpec::bregman(ScoreKind::Poisson).unwrap();
        assert!(bregman_score(&p, -1.0, 1.0).is_err());
        let e = ScoreSpec::elementary_mean(0.0).unwrap();
        assert!(bregman_score(&e, 1.0, 1.0).is_err());
    }

    #[test]
    fn elementary_values() {
        let m = ScoreSpec::elementary_mean(0.0).unwrap();
        assert_eq!(elementary_score(&m, 1.0, 2.0).unwrap().value(), -1.0);
        assert_eq!(elementary_score(&m, -1.0, 2.0).unwrap().value(), 0.0);
        // tie scores zero
        assert_eq!(elementary_score(&m, 0.0, 2.0).unwrap().value(), 0.0);
        let e = ScoreSpec::elementary_expectile(0.0, 0.9).unwrap();
        assert_abs_diff_eq!(
            elementary_score(&e, 1.0, -1.0).unwrap().value(),
            0.1,
            epsilon = 1e-15
        );
    }

    #[test]
    fn elementary_requires_parameters() {
        assert!(ScoreSpec::bregman(ScoreKind::ElementaryMean).is_err());
        assert!(matches!(
            ScoreSpec::elementary_expectile(0.0, 1.0),
            Err(Error::BadTau(_))
        ));
        assert!(ScoreSpec::elementary_mean(f64::NAN).is_err());
        let sq = ScoreSpec::bregman(ScoreKind::SquaredError).unwrap();
        assert!(elementary_score(&sq, 1.0, 1.0).is_err());
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean_functional(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(mean_functional(&[5.0]).unwrap(), 5.0);
        assert_eq!(mean_functional(&[-1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(mean_functional(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn expectile_examples() {
        assert_abs_diff_eq!(expectile(&[1.0, 2.0, 3.0], 0.5).unwrap(), 2.0, epsilon = 1e-10);
        let t = expectile(&[0.0, 1.0], 0.75).unwrap();
        // direct substitution into the balance identity
        assert_abs_diff_eq!(0.25 * (t - 0.0), 0.75 * (1.0 - t), epsilon = 1e-10);
        assert_abs_diff_eq!(t, 0.75, epsilon = 1e-10);
        assert_eq!(expectile(&[4.2], 0.1).unwrap(), 4.2);
        assert!(matches!(expectile(&[], 0.5), Err(Error::EmptySample)));
        assert!(matches!(expectile(&[1.0], 0.0), Err(Error::BadTau(_))));
    }

    proptest::proptest! {
        #[test]
        fn half_level_elementary_is_mean_score(x in -50.0..50.0f64, y in -50.0..50.0f64, theta in -50.0..50.0f64) {
            let e = ScoreSpec::elementary_expectile(theta, 0.5).unwrap();
            let expected = if x > theta { 0.5 * (theta - y) } else { 0.0 };
            proptest::prop_assert_eq!(elementary_score(&e, x, y).unwrap().value(), expected);
        }

        #[test]
        fn expectile_minimizes_expected_squared_expectile_score(
            sample in proptest::collection::vec(-10.0..10.0f64, 1..30),
            tau in 0.05..0.95f64,
        ) {
            let e = expectile(&sample, tau).unwrap();
            let expected = |x: f64| sample.iter().map(|&y| expectile_squared_error(x, y, tau)).sum::<f64>() / sample.len() as f64;
            let at_e = expected(e);
            let lo = sample.iter().copied().fold(f64::INFINITY, f64::min) - 1.0;
            let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
            for k in 0..200 {
                let x = lo + (hi - lo) * k as f64 / 199.0;
                proptest::prop_assert!(expected(x) >= at_e - 1e-12);
            }
        }
    }
}
