#![allow(dead_code)]

use forecast_dominance::gaussian::{HorizonStats, TrackStats};

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

pub fn corr(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}

pub const SIGMA_Y: f64 = 1.160;
pub const HORIZONS: [&str; 5] = ["h0", "h1", "h2", "h3", "h4"];

/// Published per-horizon standard deviations and MZ slopes of the three
/// inflation forecasts (survey, random walk, regression model).
pub fn inflation_stats() -> Vec<HorizonStats> {
    let sigma = [
        ("SPF", [0.916, 0.917, 0.967, 1.008, 1.012]),
        ("RW", [1.156, 1.161, 1.176, 1.213, 1.221]),
        ("RM", [0.924, 0.935, 0.950, 0.971, 0.987]),
    ];
    let beta = [
        [0.903, 0.834, 0.755, 0.706, 0.665],
        [0.471, 0.425, 0.441, 0.496, 0.432],
        [0.766, 0.741, 0.692, 0.624, 0.570],
    ];
    (0..5)
        .map(|h| HorizonStats {
            label: HORIZONS[h].to_string(),
            mu: 0.0,
            sigma_y: SIGMA_Y,
            tracks: (0..3)
                .map(|k| TrackStats {
                    name: sigma[k].0.to_string(),
                    sigma: sigma[k].1[h],
                    beta: beta[k][h],
                })
                .collect(),
        })
        .collect()
}

pub fn inflation_pairs() -> Vec<(String, String)> {
    [("SPF", "RW"), ("RW", "SPF"), ("SPF", "RM"), ("RM", "SPF"), ("RW", "RM"), ("RM", "RW")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

/// Expected symbols, rows in the order of [`inflation_pairs`].
pub const EXPECTED_SYMBOLS: [&str; 6] = ["✓✓✓?✓", "XXXXX", "✓✓???", "XXXXX", "XXXXX", "✓✓✓??"];
