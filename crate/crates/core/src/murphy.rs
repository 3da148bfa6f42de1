//! Empirical ψ-functions and Murphy diagrams.
//!
//! For a forecast track `x` and realizations `y`, the empirical ψ-function
//! at threshold θ is minus the mean elementary score,
//! `ψ̂(θ) = −(1/n) Σ |1{yᵢ < θ} − τ| (θ − yᵢ) 1{xᵢ > θ}`.
//! Forecast A empirically dominates B on a sample when the mean
//! elementary-score difference `d̂(θ) = S̄_θ(A) − S̄_θ(B)` is non-positive
//! at every θ.
//!
//! Curves are evaluated on the knot grid (all forecast and realization
//! values plus one guard knot on each side). Between knots every curve is
//! linear, so the knots carry all the information; the only discontinuities
//! sit at forecast values, where the indicator switches off.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::check_tau;
use crate::series::PairedSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MurphyCurve {
    /// Track name, or `"A-B"` for a difference curve.
    pub label: String,
    pub tau: f64,
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
}

impl MurphyCurve {
    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["theta", "value", "track"])?;
        for (t, v) in self.thetas.iter().zip(&self.values) {
            wtr.write_record([
                crate::series::format_full(*t),
                crate::series::format_full(*v),
                self.label.clone(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceSummary {
    pub dominates: bool,
    pub max_violation: f64,
    pub violating_thetas: Vec<f64>,
}

pub fn dominance_summary(curve: &MurphyCurve) -> DominanceSummary {
    let violating_thetas: Vec<f64> = curve
        .thetas
        .iter()
        .zip(&curve.values)
        .filter(|(_, v)| **v > 0.0)
        .map(|(t, _)| *t)
        .collect();
    let max_violation = curve.values.iter().copied().fold(0.0, f64::max);
    DominanceSummary {
        dominates: violating_thetas.is_empty(),
        max_violation,
        violating_thetas,
    }
}

/// Sorted, deduplicated union of `y` and the named tracks, padded by one
/// knot on each side. The padding is the sample standard deviation of `y`,
/// or 1 when that is zero or undefined.
pub fn knot_grid(series: &PairedSeries, tracks: &[&str]) -> Result<Vec<f64>> {
    let mut knots: Vec<f64> = series.y().to_vec();
    for name in tracks {
        knots.extend_from_slice(series.track(name)?);
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();

    let y = series.y();
    let n = y.len();
    let offset = if n > 1 {
        let m = y.iter().sum::<f64>() / n as f64;
        let sd = (y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64).sqrt();
        if sd > 0.0 {
            sd
        } else {
            1.0
        }
    } else {
        1.0
    };
    let lo = knots[0] - offset;
    let hi = knots[knots.len() - 1] + offset;
    let mut grid = Vec::with_capacity(knots.len() + 2);
    grid.push(lo);
    grid.extend(knots);
    grid.push(hi);
    Ok(grid)
}

pub fn empirical_psi(
    series: &PairedSeries,
    track: &str,
    thetas: &[f64],
    tau: f64,
) -> Result<MurphyCurve> {
    check_tau(tau)?;
    check_grid(thetas)?;
    let x = series.track(track)?;
    let n = series.len() as f64;
    let sums = ElementarySweep::new(thetas, tau, x, series.y(), Limit::AtKnot).sums(None, 1);
    Ok(MurphyCurve {
        label: track.to_string(),
        tau,
        thetas: thetas.to_vec(),
        values: sums.iter().map(|s| -s / n).collect(),
    })
}

/// `d̂(θ)` for `track_a − track_b` on their joint knot grid.
pub fn murphy_difference(
    series: &PairedSeries,
    track_a: &str,
    track_b: &str,
    tau: f64,
) -> Result<MurphyCurve> {
    let grid = knot_grid(series, &[track_a, track_b])?;
    murphy_difference_on(series, track_a, track_b, &grid, tau)
}

pub fn murphy_difference_on(
    series: &PairedSeries,
    track_a: &str,
    track_b: &str,
    thetas: &[f64],
    tau: f64,
) -> Result<MurphyCurve> {
    check_tau(tau)?;
    check_grid(thetas)?;
    let xa = series.track(track_a)?;
    let xb = series.track(track_b)?;
    let n = series.len() as f64;
    let sa = ElementarySweep::new(thetas, tau, xa, series.y(), Limit::AtKnot).sums(None, 1);
    let sb = ElementarySweep::new(thetas, tau, xb, series.y(), Limit::AtKnot).sums(None, 1);
    Ok(MurphyCurve {
        label: format!("{track_a}-{track_b}"),
        tau,
        thetas: thetas.to_vec(),
        values: sa.iter().zip(&sb).map(|(a, b)| (a - b) / n).collect(),
    })
}

/// Standard error of `d̂(θ)` at each grid point, from the per-θ sample
/// variance of the row-wise score differences (iid approximation).
pub fn difference_standard_errors(
    series: &PairedSeries,
    track_a: &str,
    track_b: &str,
    thetas: &[f64],
    tau: f64,
) -> Result<Vec<f64>> {
    check_tau(tau)?;
    check_grid(thetas)?;
    let xa = series.track(track_a)?;
    let xb = series.track(track_b)?;
    let y = series.y();
    let n = y.len();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let lower: Vec<f64> = xa.iter().zip(xb).map(|(a, b)| a.min(*b)).collect();
    let sweep_a = ElementarySweep::new(thetas, tau, xa, y, Limit::AtKnot);
    let sweep_b = ElementarySweep::new(thetas, tau, xb, y, Limit::AtKnot);
    let sweep_ab = ElementarySweep::new(thetas, tau, &lower, y, Limit::AtKnot);
    let (s1a, s1b) = (sweep_a.sums(None, 1), sweep_b.sums(None, 1));
    let (s2a, s2b, s2ab) = (sweep_a.sums(None, 2), sweep_b.sums(None, 2), sweep_ab.sums(None, 2));
    let nf = n as f64;
    Ok((0..thetas.len())
        .map(|g| {
            let mean = (s1a[g] - s1b[g]) / nf;
            let sq = s2a[g] - 2.0 * s2ab[g] + s2b[g];
            let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
            (var / nf).sqrt()
        })
        .collect())
}

/// Standard error of `ψ̂(θ)` for a single track.
pub fn psi_standard_errors(
    series: &PairedSeries,
    track: &str,
    thetas: &[f64],
    tau: f64,
) -> Result<Vec<f64>> {
    check_tau(tau)?;
    check_grid(thetas)?;
    let x = series.track(track)?;
    let n = series.len();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let sweep = ElementarySweep::new(thetas, tau, x, series.y(), Limit::AtKnot);
    let (s1, s2) = (sweep.sums(None, 1), sweep.sums(None, 2));
    let nf = n as f64;
    Ok(s1
        .iter()
        .zip(&s2)
        .map(|(a, b)| {
            let mean = a / nf;
            (((b - nf * mean * mean) / (nf - 1.0)).max(0.0) / nf).sqrt()
        })
        .collect())
}

/// Exact `∫ d̂(θ) dθ` over the real line.
///
/// `d̂` vanishes outside the knot range and is linear between knots, with
/// jumps at forecast values; each segment is integrated using the value at
/// its left knot and the left limit at its right knot.
pub fn integrate_difference(
    series: &PairedSeries,
    track_a: &str,
    track_b: &str,
    tau: f64,
) -> Result<f64> {
    check_tau(tau)?;
    let grid = knot_grid(series, &[track_a, track_b])?;
    let xa = series.track(track_a)?;
    let xb = series.track(track_b)?;
    let y = series.y();
    let at = |x: &[f64], limit| ElementarySweep::new(&grid, tau, x, y, limit).sums(None, 1);
    let (a, b) = (at(xa, Limit::AtKnot), at(xb, Limit::AtKnot));
    let (al, bl) = (at(xa, Limit::FromBelow), at(xb, Limit::FromBelow));
    let n = series.len() as f64;
    let mut total = 0.0;
    for g in 0..grid.len() - 1 {
        let left = (a[g] - b[g]) / n;
        let right = (al[g + 1] - bl[g + 1]) / n;
        total += 0.5 * (grid[g + 1] - grid[g]) * (left + right);
    }
    Ok(total)
}

pub(crate) fn check_grid(thetas: &[f64]) -> Result<()> {
    if thetas.is_empty() {
        return Err(Error::InvalidParameter {
            name: "theta_grid",
            reason: "grid is empty".into(),
        });
    }
    if thetas.iter().any(|t| !t.is_finite()) || thetas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "theta_grid",
            reason: "grid must be finite and strictly increasing".into(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Limit {
    /// Indicator `1{x > θ}` as in the elementary score.
    AtKnot,
    /// Left limit in θ, i.e. `1{x ≥ θ}`.
    FromBelow,
}

/// Evaluates `Σᵢ mᵢ · S_θ(kᵢ, yᵢ)^p` on a whole θ grid in `O(n + G)` after
/// an `O(n log G)` setup.
///
/// Row `i` contributes with weight `(1 − τ)` for `θ ∈ (yᵢ, kᵢ)` and with
/// weight `τ` for `θ ≤ yᵢ, θ < kᵢ`. Both sets are index ranges on the grid;
/// contributions are scattered to their upper boundaries and accumulated
/// from the top, so grid points past every key evaluate to exactly zero.
pub(crate) struct ElementarySweep<'a> {
    thetas: &'a [f64],
    tau: f64,
    rows: Vec<RowRange>,
}

#[derive(Debug, Clone, Copy)]
struct RowRange {
    /// first grid index with θ > y
    lo: u32,
    /// first grid index where the forecast indicator is off
    hi: u32,
    y: f64,
}

impl<'a> ElementarySweep<'a> {
    pub(crate) fn new(thetas: &'a [f64], tau: f64, keys: &[f64], y: &[f64], limit: Limit) -> Self {
        let rows = keys
            .iter()
            .zip(y)
            .map(|(&k, &yi)| {
                let lo = thetas.partition_point(|&t| t <= yi) as u32;
                let hi = match limit {
                    Limit::AtKnot => thetas.partition_point(|&t| t < k),
                    Limit::FromBelow => thetas.partition_point(|&t| t <= k),
                } as u32;
                RowRange { lo, hi, y: yi }
            })
            .collect();
        Self { thetas, tau, rows }
    }

    /// `weights`: optional row multiplicities (bootstrap resamples).
    /// `power`: 1 for scores, 2 for squared scores.
    pub(crate) fn sums(&self, weights: Option<&[f64]>, power: u8) -> Vec<f64> {
        let g_len = self.thetas.len();
        let moments = if power == 2 { 3 } else { 2 };
        // [region1 upper, region1 lower, region2 upper] × moments
        let mut buckets = vec![0.0f64; 3 * moments * (g_len + 1)];
        let stride = g_len + 1;
        let slot = |set: usize, m: usize| (set * moments + m) * stride;

        for (i, r) in self.rows.iter().enumerate() {
            let w = match weights {
                Some(ws) => {
                    let w = ws[i];
                    if w == 0.0 {
                        continue;
                    }
                    w
                }
                None => 1.0,
            };
            let (lo, hi) = (r.lo as usize, r.hi as usize);
            let vals = [w, w * r.y, w * r.y * r.y];
            if lo < hi {
                for m in 0..moments {
                    buckets[slot(0, m) + hi] += vals[m];
                    buckets[slot(1, m) + lo] += vals[m];
                }
            }
            let top = lo.min(hi);
            if top > 0 {
                for m in 0..moments {
                    buckets[slot(2, m) + top] += vals[m];
                }
            }
        }

        let (w1, w2) = if power == 2 {
            ((1.0 - self.tau).powi(2), self.tau * self.tau)
        } else {
            (1.0 - self.tau, self.tau)
        };
        let mut out = vec![0.0; g_len];
        let mut acc = [[0.0f64; 3]; 3];
        for g in (0..g_len).rev() {
            for (set, a) in acc.iter_mut().enumerate() {
                for (m, am) in a.iter_mut().enumerate().take(moments) {
                    *am += buckets[slot(set, m) + g + 1];
                }
            }
            let t = self.thetas[g];
            let eval = |c: f64, s: f64, ss: f64| {
                if power == 2 {
                    t * t * c - 2.0 * t * s + ss
                } else {
                    t * c - s
                }
            };
            let region1 = eval(acc[0][0], acc[0][1], acc[0][2]) - eval(acc[1][0], acc[1][1], acc[1][2]);
            let region2 = eval(acc[2][0], acc[2][1], acc[2][2]);
            out[g] = w1 * region1 + w2 * region2;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::elementary;

    fn series(y: &[f64], tracks: &[(&str, &[f64])]) -> PairedSeries {
        let mut s = PairedSeries::new(y.to_vec()).unwrap();
        for (n, v) in tracks {
            s.insert_track(*n, v.to_vec()).unwrap();
        }
        s
    }

    fn brute_mean_score(x: &[f64], y: &[f64], theta: f64, tau: f64) -> f64 {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| elementary(xi, yi, theta, tau))
            .sum::<f64>()
            / x.len() as f64
    }

    #[test]
    fn knot_grid_examples() {
        let s = series(&[1.0], &[("a", &[2.0])]);
        assert_eq!(knot_grid(&s, &["a"]).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);

        let s = series(&[0.0, 0.0], &[("a", &[0.0, 0.0])]);
        assert_eq!(knot_grid(&s, &["a"]).unwrap(), vec![-1.0, 0.0, 1.0]);

        let s = series(&[1.0, 4.0, 2.0], &[("a", &[3.0, 5.0, 1.0]), ("b", &[3.0, 5.0, 1.0])]);
        assert_eq!(knot_grid(&s, &["a"]).unwrap(), knot_grid(&s, &["a", "b"]).unwrap());

        assert!(matches!(knot_grid(&s, &["zzz"]), Err(Error::UnknownTrack(_))));
    }

    #[test]
    fn psi_examples() {
        let s = series(&[2.0], &[("a", &[1.0])]);
        let c = empirical_psi(&s, "a", &[0.0], 0.5).unwrap();
        assert_eq!(c.values, vec![1.0]);

        let s = series(&[0.0, 4.0], &[("a", &[1.0, 1.0])]);
        let c = empirical_psi(&s, "a", &[0.0, 1.0, 2.0], 0.5).unwrap();
        // hand summation: (1/(2n)) Σ (yᵢ − θ) 1{xᵢ > θ}
        assert_eq!(c.values[0], 0.25 * ((0.0 - 0.0) + (4.0 - 0.0)));
        assert_eq!(c.values[1], 0.0);
        assert_eq!(c.values[2], 0.0);

        assert!(matches!(
            empirical_psi(&s, "a", &[0.0], 1.0),
            Err(Error::BadTau(_))
        ));
        assert!(matches!(
            empirical_psi(&s, "b", &[0.0], 0.5),
            Err(Error::UnknownTrack(_))
        ));
        assert!(empirical_psi(&s, "a", &[1.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn difference_examples() {
        let s = series(&[0.3, -1.0, 2.0], &[("a", &[0.1, -0.5, 1.0]), ("b", &[0.0, 0.4, 0.2])]);
        let same = murphy_difference(&s, "a", "a", 0.5).unwrap();
        assert!(same.values.iter().all(|v| *v == 0.0));

        let d = murphy_difference(&s, "a", "b", 0.5).unwrap();
        let pa = empirical_psi(&s, "a", &d.thetas, 0.5).unwrap();
        let pb = empirical_psi(&s, "b", &d.thetas, 0.5).unwrap();
        for g in 0..d.len() {
            let expected = -(pa.values[g] - pb.values[g]);
            assert!((d.values[g] - expected).abs() < 1e-15);
        }
        assert!(matches!(
            murphy_difference(&s, "a", "c", 0.5),
            Err(Error::UnknownTrack(_))
        ));
    }

    #[test]
    fn summary_examples() {
        let curve = |values: Vec<f64>| MurphyCurve {
            label: "x".into(),
            tau: 0.5,
            thetas: (0..values.len()).map(|i| i as f64).collect(),
            values,
        };
        let s = dominance_summary(&curve(vec![-1.0, -0.5, -2.0]));
        assert!(s.dominates);
        let s = dominance_summary(&curve(vec![0.0, 0.0]));
        assert!(s.dominates);
        assert_eq!(s.max_violation, 0.0);
        let s = dominance_summary(&curve(vec![-1.0, 0.1, -0.2]));
        assert!(!s.dominates);
        assert_eq!(s.max_violation, 0.1);
        assert_eq!(s.violating_thetas, vec![1.0]);
    }

    #[test]
    fn single_point_integral() {
        // x_A = 1, x_B = 0, y = 0: squared-error gap 1, ∫ d̂ = ∫₀¹ θ/2 dθ = 1/4
        let s = series(&[0.0], &[("a", &[1.0]), ("b", &[0.0])]);
        assert!((integrate_difference(&s, "a", "b", 0.5).unwrap() - 0.25).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn sweep_matches_brute_force(
            rows in proptest::collection::vec((-5i32..5, -5i32..5, -5i32..5), 2..40),
            tau in 0.05..0.95f64,
        ) {
            // integer-valued data to exercise ties between x, y and θ
            let y: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
            let xa: Vec<f64> = rows.iter().map(|r| r.1 as f64 * 0.5).collect();
            let xb: Vec<f64> = rows.iter().map(|r| r.2 as f64).collect();
            let s = series(&y, &[("a", &xa), ("b", &xb)]);
            let grid = knot_grid(&s, &["a", "b"]).unwrap();
            let d = murphy_difference(&s, "a", "b", tau).unwrap();
            let se = difference_standard_errors(&s, "a", "b", &grid, tau).unwrap();
            for (g, &t) in grid.iter().enumerate() {
                let expect = brute_mean_score(&xa, &y, t, tau) - brute_mean_score(&xb, &y, t, tau);
                proptest::prop_assert!((d.values[g] - expect).abs() < 1e-12);
                let diffs: Vec<f64> = xa.iter().zip(&xb).zip(&y)
                    .map(|((a, b), yi)| elementary(*a, *yi, t, tau) - elementary(*b, *yi, t, tau))
                    .collect();
                let n = diffs.len() as f64;
                if n > 1.0 {
                    let m = diffs.iter().sum::<f64>() / n;
                    let v = diffs.iter().map(|z| (z - m) * (z - m)).sum::<f64>() / (n - 1.0);
                    proptest::prop_assert!((se[g] - (v / n).sqrt()).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn difference_is_antisymmetric(
            rows in proptest::collection::vec((-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64), 1..50),
        ) {
            let y: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let xa: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let xb: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let s = series(&y, &[("a", &xa), ("b", &xb)]);
            let ab = murphy_difference(&s, "a", "b", 0.5).unwrap();
            let ba = murphy_difference(&s, "b", "a", 0.5).unwrap();
            for (u, v) in ab.values.iter().zip(&ba.values) {
                proptest::prop_assert_eq!(*u, -*v);
            }
        }

        #[test]
        fn refinement_leaves_integral_unchanged(
            rows in proptest::collection::vec((-10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64), 1..50),
        ) {
            // d̂ is linear strictly between knots: its values at midpoints are
            // the averages of the one-sided limits at the neighbouring knots,
            // so a refined midpoint rule reproduces the knot integral.
            let y: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let xa: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let xb: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let s = series(&y, &[("a", &xa), ("b", &xb)]);
            let exact = integrate_difference(&s, "a", "b", 0.5).unwrap();
            let grid = knot_grid(&s, &["a", "b"]).unwrap();
            let mids: Vec<f64> = grid.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
            let at_mid = murphy_difference_on(&s, "a", "b", &mids, 0.5).unwrap();
            let refined: f64 = grid.windows(2).zip(&at_mid.values).map(|(w, v)| (w[1] - w[0]) * v).sum();
            proptest::prop_assert!((exact - refined).abs() < 1e-12);
        }
    }
}
