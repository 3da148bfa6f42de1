//! Closed-form dominance analysis when each forecast is jointly normal with
//! the realization and all three share a common mean.
//!
//! With `z = (θ − μ)/σ_j`, the ψ-function of forecast `j` is
//! `2ψ_j(θ) = ρ_j σ_Y φ(z) − (θ − μ)(1 − Φ(z))`, and the expected
//! elementary-score advantage of A over B is `ψ_A(θ) − ψ_B(θ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MEAN_TOL: f64 = 1e-12;
const WEAK_SLACK: f64 = 1e-12;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal CDF through the complementary error function, which
/// keeps full relative accuracy in both tails.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Upper tail `1 − Φ(z)` without cancellation.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// Parameters of one bivariate normal (forecast, realization) block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPairParams {
    mu_y: f64,
    mu_j: f64,
    sigma_j: f64,
    sigma_y: f64,
    rho_yj: f64,
}

impl GaussianPairParams {
    pub fn new(mu_y: f64, mu_j: f64, sigma_j: f64, sigma_y: f64, rho_yj: f64) -> Result<Self> {
        let finite = [mu_y, mu_j, sigma_j, sigma_y, rho_yj].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter {
                name: "gaussian_params",
                reason: "all parameters must be finite".into(),
            });
        }
        if sigma_j <= 0.0 || sigma_y <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("standard deviations must be positive, got {sigma_j} and {sigma_y}"),
            });
        }
        if rho_yj.abs() > 1.0 {
            return Err(Error::InvalidParameter {
                name: "rho_yj",
                reason: format!("correlation {rho_yj} outside [-1, 1]"),
            });
        }
        Ok(Self {
            mu_y,
            mu_j,
            sigma_j,
            sigma_y,
            rho_yj,
        })
    }

    /// Common-mean parameters from an MZ slope: `ρ = β σ_j / σ_Y`.
    pub fn from_slope(mu: f64, sigma_y: f64, sigma_j: f64, beta: f64) -> Result<Self> {
        Self::new(mu, mu, sigma_j, sigma_y, beta * sigma_j / sigma_y)
    }

    pub fn mu_y(&self) -> f64 {
        self.mu_y
    }
    pub fn mu_j(&self) -> f64 {
        self.mu_j
    }
    pub fn sigma_j(&self) -> f64 {
        self.sigma_j
    }
    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }
    pub fn rho_yj(&self) -> f64 {
        self.rho_yj
    }

    /// Population MZ slope `ρ σ_Y / σ_j`.
    pub fn beta(&self) -> f64 {
        self.rho_yj * self.sigma_y / self.sigma_j
    }

    fn check_common_mean(&self) -> Result<()> {
        if (self.mu_j - self.mu_y).abs() > MEAN_TOL {
            return Err(Error::CommonMeanViolation {
                mu_a: self.mu_j,
                mu_b: self.mu_y,
            });
        }
        Ok(())
    }
}

fn check_pair(a: &GaussianPairParams, b: &GaussianPairParams) -> Result<()> {
    a.check_common_mean()?;
    b.check_common_mean()?;
    if (a.mu_y - b.mu_y).abs() > MEAN_TOL {
        return Err(Error::CommonMeanViolation {
            mu_a: a.mu_y,
            mu_b: b.mu_y,
        });
    }
    if (a.sigma_y - b.sigma_y).abs() > 1e-12 * a.sigma_y.max(b.sigma_y) {
        return Err(Error::InvalidParameter {
            name: "sigma_y",
            reason: format!("blocks disagree on the realization scale: {} vs {}", a.sigma_y, b.sigma_y),
        });
    }
    Ok(())
}

/// `E S_θ(X_B, Y) − E S_θ(X_A, Y)`; positive values favour A.
pub fn score_difference(a: &GaussianPairParams, b: &GaussianPairParams, theta: f64) -> Result<f64> {
    check_pair(a, b)?;
    let d = theta - a.mu_y;
    let (za, zb) = (d / a.sigma_j, d / b.sigma_j);
    Ok(0.5 * a.sigma_y * (a.rho_yj * normal_pdf(za) - b.rho_yj * normal_pdf(zb))
        + 0.5 * d * (normal_cdf(za) - normal_cdf(zb)))
}

/// `ψ_j(θ)`, the negated expected elementary score.
pub fn psi_closed_form(params: &GaussianPairParams, theta: f64) -> Result<f64> {
    params.check_common_mean()?;
    let d = theta - params.mu_y;
    let z = d / params.sigma_j;
    Ok(0.5 * (params.rho_yj * params.sigma_y * normal_pdf(z) - d * normal_sf(z)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    ADominates,
    BDominates,
    NoDominancePossible,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    Case1,
    Case2a,
    Case2b,
    Case3,
    Case4,
    NecessaryFail,
    NecessaryOnly,
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseLabel::Case1 => "Case 1",
            CaseLabel::Case2a => "Case 2a",
            CaseLabel::Case2b => "Case 2b",
            CaseLabel::Case3 => "Case 3",
            CaseLabel::Case4 => "Case 4",
            CaseLabel::NecessaryFail => "necessary condition fails",
            CaseLabel::NecessaryOnly => "necessary condition only",
        };
        f.write_str(s)
    }
}

/// Result of scanning the closed-form difference on a θ grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericalCheck {
    pub min_difference: f64,
    pub argmin_theta: f64,
    pub nonnegative: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseVerdict {
    pub verdict: Verdict,
    pub case_label: CaseLabel,
    /// Advisory numerical scan, only filled for indeterminate pairs when requested.
    pub numerical_check: Option<NumericalCheck>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Relative tolerance for the equality conditions of Cases 3 and 4.
    pub equality_tol: f64,
    pub numerical_check: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            equality_tol: 1e-9,
            numerical_check: false,
        }
    }
}

/// Outcome for the directed question "does A dominate B?".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirectedOutcome {
    Sufficient(CaseLabel),
    NecessaryFail,
    NecessaryOnly,
}

fn approx_eq(u: f64, v: f64, tol: f64) -> bool {
    (u - v).abs() <= tol * u.abs().max(v.abs())
}

/// Weak `u ≤ v` that absorbs rounding in derived slopes.
fn le(u: f64, v: f64) -> bool {
    u <= v + WEAK_SLACK * u.abs().max(v.abs()).max(1.0)
}

fn sufficient_case(a: &GaussianPairParams, b: &GaussianPairParams, tol: f64) -> Option<CaseLabel> {
    let (sa, sb) = (a.sigma_j, b.sigma_j);
    let (ba, bb) = (a.beta(), b.beta());
    if le(sb, sa) && le(bb, 1.0) && le(1.0, ba) {
        return Some(CaseLabel::Case1);
    }
    if le(sa, sb) {
        let unit = |v: f64| le(0.0, v) && le(v, 1.0);
        if unit(ba) && unit(bb) && le(bb * sb * sb, ba * sa * sa) {
            return Some(CaseLabel::Case2a);
        }
        if le(bb, 0.0) && le(0.0, ba) {
            return Some(CaseLabel::Case2b);
        }
    }
    // only valid for positive slopes; with a shared negative β σ the
    // ordering reverses
    let same_side = (ba > 1.0 && bb > 1.0) || (ba > 0.0 && ba < 1.0 && bb > 0.0 && bb < 1.0);
    if approx_eq(ba * sa, bb * sb, tol) && same_side && le((ba - 1.0).abs(), (bb - 1.0).abs()) {
        return Some(CaseLabel::Case3);
    }
    if approx_eq(sa, sb, tol) && le(bb, ba) {
        return Some(CaseLabel::Case4);
    }
    None
}

pub fn classify_directed(
    a: &GaussianPairParams,
    b: &GaussianPairParams,
    options: &ClassifyOptions,
) -> Result<DirectedOutcome> {
    check_pair(a, b)?;
    if a.rho_yj < b.rho_yj {
        return Ok(DirectedOutcome::NecessaryFail);
    }
    Ok(match sufficient_case(a, b, options.equality_tol) {
        Some(case) => DirectedOutcome::Sufficient(case),
        None => DirectedOutcome::NecessaryOnly,
    })
}

/// Classifies the pair. Sufficient cases are tried for A over B, then for
/// B over A; failing both, the verdict reports whether A can dominate B at
/// all.
pub fn classify(
    a: &GaussianPairParams,
    b: &GaussianPairParams,
    options: &ClassifyOptions,
) -> Result<CaseVerdict> {
    let ab = classify_directed(a, b, options)?;
    let ba = classify_directed(b, a, options)?;
    let (verdict, case_label) = match (ab, ba) {
        (DirectedOutcome::Sufficient(c), _) => (Verdict::ADominates, c),
        (_, DirectedOutcome::Sufficient(c)) => (Verdict::BDominates, c),
        (DirectedOutcome::NecessaryFail, _) => (Verdict::NoDominancePossible, CaseLabel::NecessaryFail),
        _ => (Verdict::Indeterminate, CaseLabel::NecessaryOnly),
    };
    let numerical_check = if verdict == Verdict::Indeterminate && options.numerical_check {
        Some(numerical_check(a, b)?)
    } else {
        None
    };
    Ok(CaseVerdict {
        verdict,
        case_label,
        numerical_check,
    })
}

/// 401-point θ grid spanning `μ ± 8 max(σ_A, σ_B)`.
pub fn sweep_grid(a: &GaussianPairParams, b: &GaussianPairParams) -> Vec<f64> {
    let half = 8.0 * a.sigma_j.max(b.sigma_j);
    (0..401)
        .map(|k| a.mu_y - half + 2.0 * half * k as f64 / 400.0)
        .collect()
}

pub fn numerical_check(a: &GaussianPairParams, b: &GaussianPairParams) -> Result<NumericalCheck> {
    let mut best = (f64::INFINITY, f64::NAN);
    for t in sweep_grid(a, b) {
        let d = score_difference(a, b, t)?;
        if d < best.0 {
            best = (d, t);
        }
    }
    Ok(NumericalCheck {
        min_difference: best.0,
        argmin_theta: best.1,
        nonnegative: best.0 >= -1e-12,
    })
}

/// Second-moment summary of one forecast at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackStats {
    pub name: String,
    pub sigma: f64,
    pub beta: f64,
}

/// Everything the classifier needs at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonStats {
    pub label: String,
    pub mu: f64,
    pub sigma_y: f64,
    pub tracks: Vec<TrackStats>,
}

impl HorizonStats {
    pub fn params(&self, track: &str) -> Result<GaussianPairParams> {
        let t = self
            .tracks
            .iter()
            .find(|t| t.name == track)
            .ok_or_else(|| Error::UnknownTrack(track.to_string()))?;
        GaussianPairParams::from_slope(self.mu, self.sigma_y, t.sigma, t.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellSymbol {
    #[serde(rename = "✓")]
    Check,
    #[serde(rename = "X")]
    Cross,
    #[serde(rename = "?")]
    Question,
}

impl std::fmt::Display for CellSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CellSymbol::Check => "✓",
            CellSymbol::Cross => "X",
            CellSymbol::Question => "?",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCell {
    pub symbol: CellSymbol,
    pub case: Option<CaseLabel>,
}

impl From<DirectedOutcome> for VerdictCell {
    fn from(o: DirectedOutcome) -> Self {
        match o {
            DirectedOutcome::Sufficient(c) => VerdictCell {
                symbol: CellSymbol::Check,
                case: Some(c),
            },
            DirectedOutcome::NecessaryFail => VerdictCell {
                symbol: CellSymbol::Cross,
                case: None,
            },
            DirectedOutcome::NecessaryOnly => VerdictCell {
                symbol: CellSymbol::Question,
                case: None,
            },
        }
    }
}

impl std::fmt::Display for VerdictCell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.case {
            Some(c) => write!(f, "{}({c})", self.symbol),
            None => write!(f, "{}", self.symbol),
        }
    }
}

/// Rows are directed pairs `(A, B)` read as "A dominates B?", columns are horizons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictMatrix {
    pub horizons: Vec<String>,
    pub pairs: Vec<(String, String)>,
    pub cells: Vec<Vec<VerdictCell>>,
}

impl VerdictMatrix {
    pub fn symbols(&self) -> Vec<String> {
        self.cells
            .iter()
            .map(|row| row.iter().map(|c| c.symbol.to_string()).collect())
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["pair".to_string()];
        header.extend(self.horizons.iter().cloned());
        wtr.write_record(&header)?;
        for ((a, b), row) in self.pairs.iter().zip(&self.cells) {
            let mut rec = vec![format!("{a}>{b}")];
            rec.extend(row.iter().map(|c| c.to_string()));
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn classify_table(
    stats: &[HorizonStats],
    pairs: &[(String, String)],
    options: &ClassifyOptions,
) -> Result<VerdictMatrix> {
    let mut cells = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        let mut row = Vec::with_capacity(stats.len());
        for h in stats {
            let outcome = classify_directed(&h.params(a)?, &h.params(b)?, options)?;
            row.push(VerdictCell::from(outcome));
        }
        cells.push(row);
    }
    Ok(VerdictMatrix {
        horizons: stats.iter().map(|h| h.label.clone()).collect(),
        pairs: pairs.to_vec(),
        cells,
    })
}

/// Every ordered pair of distinct track names, in the order
/// `(t0,t1), (t1,t0), (t0,t2), (t2,t0), …`.
pub fn all_directed_pairs(names: &[&str]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            out.push((names[i].to_string(), names[j].to_string()));
            out.push((names[j].to_string(), names[i].to_string()));
        }
    }
    out
}
