//! Stationary bootstrap and a bootstrap test of forecast dominance.
//!
//! The null hypothesis "A dominates B" says the expected elementary score
//! difference `d(θ) = E[S_θ(X_A, Y) − S_θ(X_B, Y)]` is non-positive for all
//! θ. The statistic is `T = max_θ √n d̂(θ)` over the knot grid, and the
//! bootstrap distribution is that of the recentered `max_θ √n (d̂*(θ) − d̂(θ))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::murphy::{check_grid, knot_grid, ElementarySweep, Limit, MurphyCurve};
use crate::scoring::check_tau;
use crate::series::PairedSeries;

pub const DEFAULT_REPLICATIONS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0x5EED_2017;

/// `n^{1/3} / 1.36`, i.e. a geometric block-length law with success
/// probability `1.36 n^{-1/3}`.
pub fn default_mean_block_length(n: usize) -> f64 {
    (n as f64).cbrt() / 1.36
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryBootstrapConfig {
    mean_block_length: f64,
    replications: usize,
    seed: u64,
}

impl StationaryBootstrapConfig {
    pub fn new(mean_block_length: f64, replications: usize, seed: u64) -> Result<Self> {
        if !(mean_block_length >= 1.0) || !mean_block_length.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean_block_length",
                reason: format!("must be a finite number ≥ 1, got {mean_block_length}"),
            });
        }
        if replications == 0 {
            return Err(Error::InvalidParameter {
                name: "replications",
                reason: "must be positive".into(),
            });
        }
        Ok(Self {
            mean_block_length,
            replications,
            seed,
        })
    }

    /// Default block length for a sample of size `n`, 10,000 replications,
    /// fixed seed.
    pub fn for_sample_size(n: usize) -> Self {
        Self {
            mean_block_length: default_mean_block_length(n).max(1.0),
            replications: DEFAULT_REPLICATIONS,
            seed: DEFAULT_SEED,
        }
    }

    pub fn with_replications(self, replications: usize) -> Result<Self> {
        Self::new(self.mean_block_length, replications, self.seed)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn mean_block_length(&self) -> f64 {
        self.mean_block_length
    }
    pub fn replications(&self) -> usize {
        self.replications
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn rng(&self, replication: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(replication);
        rng
    }
}

/// `(start, length)` blocks covering `n` positions; the last block is cut
/// short if it would overshoot. Starts are uniform, lengths are
/// `1 + Geometric(1 / mean_block_length)`.
pub fn stationary_bootstrap_blocks(
    n: usize,
    config: &StationaryBootstrapConfig,
    replication: u64,
) -> Vec<(usize, usize)> {
    let mut rng = config.rng(replication);
    let geom = Geometric::new(1.0 / config.mean_block_length).expect("probability in (0, 1]");
    let mut blocks = Vec::new();
    let mut filled = 0usize;
    while filled < n {
        let start = rng.gen_range(0..n);
        let extra = geom.sample(&mut rng);
        let len = (extra.saturating_add(1)).min((n - filled) as u64) as usize;
        blocks.push((start, len));
        filled += len;
    }
    blocks
}

/// Resampled row indices, wrapping around the end of the sample.
pub fn stationary_bootstrap_indices(
    n: usize,
    config: &StationaryBootstrapConfig,
    replication: u64,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    for (start, len) in stationary_bootstrap_blocks(n, config, replication) {
        out.extend((0..len).map(|k| (start + k) % n));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceTestResult {
    /// Track hypothesised to dominate.
    pub dominant: String,
    pub dominated: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    /// `d̂(θ)` for `dominant − dominated` on the test grid.
    pub per_theta_diffs: MurphyCurve,
    pub config: StationaryBootstrapConfig,
}

#[derive(Serialize)]
struct Summary<'a> {
    dominant: &'a str,
    dominated: &'a str,
    statistic: f64,
    p_value: f64,
    n: usize,
    replications: usize,
    mean_block_length: f64,
    seed: u64,
}

impl DominanceTestResult {
    pub fn theta_grid(&self) -> &[f64] {
        &self.per_theta_diffs.thetas
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Summary {
            dominant: &self.dominant,
            dominated: &self.dominated,
            statistic: self.statistic,
            p_value: self.p_value,
            n: self.n,
            replications: self.config.replications,
            mean_block_length: self.config.mean_block_length,
            seed: self.config.seed,
        })?)
    }
}

/// Tests "A dominates B".
pub fn dominance_test(
    series: &PairedSeries,
    track_a: &str,
    track_b: &str,
    tau: f64,
    config: &StationaryBootstrapConfig,
) -> Result<DominanceTestResult> {
    dominance_tests(series, track_a, track_b, tau, None, config).map(|(ab, _)| ab)
}

/// Tests "A dominates B" and "B dominates A" from the same bootstrap
/// draws. `thetas` defaults to the knot grid of the two tracks.
pub fn dominance_tests(
    series: &PairedSeries,
    track_a: &str,
    track_b: &str,
    tau: f64,
    thetas: Option<&[f64]>,
    config: &StationaryBootstrapConfig,
) -> Result<(DominanceTestResult, DominanceTestResult)> {
    check_tau(tau)?;
    let xa = series.track(track_a)?;
    let xb = series.track(track_b)?;
    let n = series.len();
    if n < 30 {
        return Err(Error::TooFewObservations { needed: 30, got: n });
    }
    let grid = match thetas {
        Some(t) => {
            check_grid(t)?;
            t.to_vec()
        }
        None => knot_grid(series, &[track_a, track_b])?,
    };
    let y = series.y();
    let sweep_a = ElementarySweep::new(&grid, tau, xa, y, Limit::AtKnot);
    let sweep_b = ElementarySweep::new(&grid, tau, xb, y, Limit::AtKnot);
    let nf = n as f64;
    let diff_of = |w: Option<&[f64]>| -> Vec<f64> {
        let (sa, sb) = (sweep_a.sums(w, 1), sweep_b.sums(w, 1));
        sa.iter().zip(&sb).map(|(a, b)| (a - b) / nf).collect()
    };
    let d_hat = diff_of(None);
    let root_n = nf.sqrt();
    let t_ab = root_n * d_hat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t_ba = root_n * d_hat.iter().map(|d| -d).fold(f64::NEG_INFINITY, f64::max);

    let (mut hits_ab, mut hits_ba) = (0usize, 0usize);
    let mut weights = vec![0.0f64; n];
    for rep in 0..config.replications {
        weights.iter_mut().for_each(|w| *w = 0.0);
        for (start, len) in stationary_bootstrap_blocks(n, config, rep as u64) {
            for k in 0..len {
                weights[(start + k) % n] += 1.0;
            }
        }
        let d_star = diff_of(Some(&weights));
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for (s, d) in d_star.iter().zip(&d_hat) {
            let c = s - d;
            hi = hi.max(c);
            lo = lo.min(c);
        }
        if root_n * hi >= t_ab {
            hits_ab += 1;
        }
        if -root_n * lo >= t_ba {
            hits_ba += 1;
        }
    }
    let reps = config.replications as f64;
    let curve = |label: String, values: Vec<f64>| MurphyCurve {
        label,
        tau,
        thetas: grid.clone(),
        values,
    };
    let ab = DominanceTestResult {
        dominant: track_a.to_string(),
        dominated: track_b.to_string(),
        statistic: t_ab,
        p_value: hits_ab as f64 / reps,
        n,
        per_theta_diffs: curve(format!("{track_a}-{track_b}"), d_hat.clone()),
        config: *config,
    };
    let ba = DominanceTestResult {
        dominant: track_b.to_string(),
        dominated: track_a.to_string(),
        statistic: t_ba,
        p_value: hits_ba as f64 / reps,
        n,
        per_theta_diffs: curve(format!("{track_b}-{track_a}"), d_hat.iter().map(|d| -d).collect()),
        config: *config,
    };
    Ok((ab, ba))
}
