//! Convex-order diagnostics based on integrated empirical CDFs
//! `I(x) = ∫_{−∞}^x F̂(z) dz = mean((x − X_i)_+)`, and a subsampling test
//! for the hypothesis that one forecast is smaller in convex order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{format_full, PairedSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratedCdfCurve {
    pub xs: Vec<f64>,
    pub d_a: Vec<f64>,
    pub d_b: Vec<f64>,
    /// `d_a − d_b`; nonnegative everywhere when A is larger in convex order.
    pub diff: Vec<f64>,
}

impl IntegratedCdfCurve {
    pub fn min_diff(&self) -> f64 {
        self.diff.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["x", "integrated_cdf_a", "integrated_cdf_b", "diff"])?;
        for i in 0..self.xs.len() {
            wtr.write_record([
                format_full(self.xs[i]),
                format_full(self.d_a[i]),
                format_full(self.d_b[i]),
                format_full(self.diff[i]),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Integrated empirical CDF of a sorted sample at increasing points.
fn integrated_cdf(sorted_sample: &[f64], xs: &[f64]) -> Vec<f64> {
    let n = sorted_sample.len() as f64;
    let mut out = Vec::with_capacity(xs.len());
    let (mut k, mut cnt, mut sum) = (0usize, 0.0, 0.0);
    for &x in xs {
        while k < sorted_sample.len() && sorted_sample[k] <= x {
            cnt += 1.0;
            sum += sorted_sample[k];
            k += 1;
        }
        out.push((cnt * x - sum) / n);
    }
    out
}

/// Both integrated CDFs on the pooled sample values. The functions are
/// piecewise linear with kinks at those values, so the knots carry all
/// the information.
pub fn integrated_cdf_diff(series: &PairedSeries, track_a: &str, track_b: &str) -> Result<IntegratedCdfCurve> {
    let a = sorted(series.track(track_a)?);
    let b = sorted(series.track(track_b)?);
    let mut xs: Vec<f64> = a.iter().chain(&b).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let d_a = integrated_cdf(&a, &xs);
    let d_b = integrated_cdf(&b, &xs);
    let diff = d_a.iter().zip(&d_b).map(|(p, q)| p - q).collect();
    Ok(IntegratedCdfCurve { xs, d_a, d_b, diff })
}

/// Which convex-order hypothesis the subsampling test examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrderHypothesis {
    /// A is smaller than B in convex order.
    ASmaller,
    /// B is smaller than A in convex order.
    BSmaller,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsampleCurve {
    pub hypothesis: OrderHypothesis,
    pub b_grid: Vec<usize>,
    pub p_values: Vec<f64>,
    pub statistic_full: f64,
    pub n: usize,
}

impl SubsampleCurve {
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["b", "p_value"])?;
        for (b, p) in self.b_grid.iter().zip(&self.p_values) {
            wtr.write_record([b.to_string(), format_full(*p)])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// `max_x (I_lo(x) − I_hi(x))` over the pooled knots of two sorted samples
/// of equal size.
fn max_gap(lo: &[f64], hi: &[f64]) -> f64 {
    let m = lo.len();
    let (mut i, mut j) = (0, 0);
    let (mut cnt_lo, mut sum_lo, mut cnt_hi, mut sum_hi) = (0.0, 0.0, 0.0, 0.0);
    let mut best = f64::NEG_INFINITY;
    while i < m || j < m {
        let v = match (lo.get(i), hi.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < m && lo[i] <= v {
            cnt_lo += 1.0;
            sum_lo += lo[i];
            i += 1;
        }
        while j < m && hi[j] <= v {
            cnt_hi += 1.0;
            sum_hi += hi[j];
            j += 1;
        }
        let gap = (cnt_lo * v - sum_lo) - (cnt_hi * v - sum_hi);
        best = best.max(gap);
    }
    best / m as f64
}

fn statistic(smaller: &[f64], larger: &[f64]) -> f64 {
    (smaller.len() as f64).sqrt() * max_gap(smaller, larger).max(0.0)
}

/// Twenty log-spaced sizes between `n/10` and `n/2`, deduplicated.
pub fn default_b_grid(n: usize) -> Vec<usize> {
    let lo = (n as f64 / 10.0).max(2.0);
    let hi = (n as f64 / 2.0).max(lo);
    let mut grid: Vec<usize> = (0..20)
        .map(|k| {
            let b = (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / 19.0).exp().round() as usize;
            b.clamp(2, n.saturating_sub(1).max(2))
        })
        .collect();
    grid.dedup();
    grid
}

fn remove_sorted(v: &mut Vec<f64>, x: f64) {
    let pos = v.partition_point(|p| p.total_cmp(&x).is_lt());
    v.remove(pos);
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    let pos = v.partition_point(|p| p.total_cmp(&x).is_lt());
    v.insert(pos, x);
}

/// Subsampling test over all contiguous windows of each size `b`. The
/// statistic is `√n · max(0, sup_x (I_small(x) − I_large(x)))` and `p(b)`
/// is the share of windows whose statistic reaches the full-sample value.
pub fn subsampling_order_test(
    series: &PairedSeries,
    track_a: &str,
    track_b: &str,
    hypothesis: OrderHypothesis,
    b_grid: &[usize],
) -> Result<SubsampleCurve> {
    let xa = series.track(track_a)?;
    let xb = series.track(track_b)?;
    let (small, large) = match hypothesis {
        OrderHypothesis::ASmaller => (xa, xb),
        OrderHypothesis::BSmaller => (xb, xa),
    };
    let n = series.len();
    if b_grid.is_empty() {
        return Err(Error::BadSubsampleSize { b: 0, n });
    }
    if let Some(&b) = b_grid.iter().find(|&&b| b < 2 || b + 1 > n) {
        return Err(Error::BadSubsampleSize { b, n });
    }
    let full = statistic(&sorted(small), &sorted(large));
    let mut p_values = Vec::with_capacity(b_grid.len());
    for &b in b_grid {
        let mut s = sorted(&small[..b]);
        let mut l = sorted(&large[..b]);
        let mut hits = 0usize;
        for start in 0..=n - b {
            if start > 0 {
                remove_sorted(&mut s, small[start - 1]);
                insert_sorted(&mut s, small[start + b - 1]);
                remove_sorted(&mut l, large[start - 1]);
                insert_sorted(&mut l, large[start + b - 1]);
            }
            if statistic(&s, &l) >= full {
                hits += 1;
            }
        }
        p_values.push(hits as f64 / (n - b + 1) as f64);
    }
    Ok(SubsampleCurve {
        hypothesis,
        b_grid: b_grid.to_vec(),
        p_values,
        statistic_full: full,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(a: &[f64], b: &[f64]) -> PairedSeries {
        PairedSeries::new(vec![0.0; a.len()])
            .unwrap()
            .with_track("a", a.to_vec())
            .unwrap()
            .with_track("b", b.to_vec())
            .unwrap()
    }

    #[test]
    fn two_atoms_against_a_point_mass() {
        let s = series(&[-1.0, 1.0], &[0.0, 0.0]);
        let c = integrated_cdf_diff(&s, "a", "b").unwrap();
        assert_eq!(c.xs, vec![-1.0, 0.0, 1.0]);
        assert_eq!(c.diff, vec![0.0, 0.5, 0.0]);
    }

    #[test]
    fn identical_tracks() {
        let v = [0.3, -1.2, 2.2, 0.3, 5.0];
        let s = series(&v, &v);
        let c = integrated_cdf_diff(&s, "a", "b").unwrap();
        assert!(c.diff.iter().all(|d| *d == 0.0));
        let curve = subsampling_order_test(&s, "a", "b", OrderHypothesis::ASmaller, &[2, 3, 4]).unwrap();
        assert_eq!(curve.statistic_full, 0.0);
        assert!(curve.p_values.iter().all(|p| *p == 1.0));
    }

    #[test]
    fn constant_tracks() {
        let s = series(&[1.5; 10], &[1.5; 10]);
        let curve = subsampling_order_test(&s, "a", "b", OrderHypothesis::BSmaller, &[3, 9]).unwrap();
        assert_eq!(curve.p_values, vec![1.0, 1.0]);
    }

    #[test]
    fn tail_value_is_distance_to_mean() {
        let a = [0.1, 3.7, -2.0, 1.1];
        let b = [0.5, -0.25, 0.8, 6.0];
        let c = integrated_cdf_diff(&series(&a, &b), "a", "b").unwrap();
        let top = *c.xs.last().unwrap();
        assert!((c.d_a.last().unwrap() - (top - a.iter().sum::<f64>() / 4.0)).abs() < 1e-12);
        assert!((c.d_b.last().unwrap() - (top - b.iter().sum::<f64>() / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn bad_subsample_sizes() {
        let s = series(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]);
        for grid in [&[][..], &[1][..], &[3][..]] {
            assert!(matches!(
                subsampling_order_test(&s, "a", "b", OrderHypothesis::ASmaller, grid),
                Err(Error::BadSubsampleSize { .. })
            ));
        }
    }

    #[test]
    fn default_grid_is_increasing_and_in_range() {
        let g = default_b_grid(5000);
        assert_eq!(g.len(), 20);
        assert_eq!((g[0], g[19]), (500, 2500));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let small = default_b_grid(12);
        assert!(small.iter().all(|b| (2..=11).contains(b)));
    }

    #[test]
    fn sliding_windows_match_fresh_sorts() {
        let a: Vec<f64> = (0..60).map(|i| ((i * 37 % 23) as f64 - 11.0) / 3.0).collect();
        let b: Vec<f64> = (0..60).map(|i| ((i * 17 % 13) as f64 - 6.0) / 2.0).collect();
        let s = series(&a, &b);
        let curve = subsampling_order_test(&s, "a", "b", OrderHypothesis::ASmaller, &[7, 30]).unwrap();
        for (k, &bsz) in [7usize, 30].iter().enumerate() {
            let hits = (0..=60 - bsz)
                .filter(|&st| {
                    statistic(&sorted(&a[st..st + bsz]), &sorted(&b[st..st + bsz])) >= curve.statistic_full
                })
                .count();
            assert_eq!(curve.p_values[k], hits as f64 / (61 - bsz) as f64);
        }
    }

    proptest::proptest! {
        #[test]
        fn swap_is_exact_negation(
            a in proptest::collection::vec(-10.0..10.0f64, 1..30),
            shift in -3.0..3.0f64,
        ) {
            let b: Vec<f64> = a.iter().rev().map(|v| v * 0.5 + shift).collect();
            let s = series(&a, &b);
            let ab = integrated_cdf_diff(&s, "a", "b").unwrap();
            let ba = integrated_cdf_diff(&s, "b", "a").unwrap();
            for (p, q) in ab.diff.iter().zip(&ba.diff) {
                proptest::prop_assert_eq!(*p, -*q);
            }
        }

        #[test]
        fn mean_preserving_contraction_is_smaller(
            a in proptest::collection::vec(-10.0..10.0f64, 2..40),
            c in 0.01..0.99f64,
        ) {
            let m = a.iter().sum::<f64>() / a.len() as f64;
            let b: Vec<f64> = a.iter().map(|v| c * v + (1.0 - c) * m).collect();
            let curve = integrated_cdf_diff(&series(&a, &b), "a", "b").unwrap();
            let scale = a.iter().map(|v| v.abs()).fold(1.0, f64::max);
            proptest::prop_assert!(curve.min_diff() >= -1e-12 * scale);
        }

        #[test]
        fn common_shift_leaves_subsample_statistics_unchanged(
            a in proptest::collection::vec(-5.0..5.0f64, 12..30),
            shift in -4.0..4.0f64,
        ) {
            let b: Vec<f64> = a.iter().map(|v| 0.7 * v).collect();
            let s = series(&a, &b);
            let sa: Vec<f64> = a.iter().map(|v| v + shift).collect();
            let sb: Vec<f64> = b.iter().map(|v| v + shift).collect();
            let t = series(&sa, &sb);
            for h in [OrderHypothesis::ASmaller, OrderHypothesis::BSmaller] {
                let p = subsampling_order_test(&s, "a", "b", h, &[4, 9]).unwrap();
                let q = subsampling_order_test(&t, "a", "b", h, &[4, 9]).unwrap();
                proptest::prop_assert!((p.statistic_full - q.statistic_full).abs() < 1e-9);
            }
        }
    }
}
