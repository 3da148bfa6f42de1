//! Sufficient and necessary dominance conditions under joint normality,
//! applied to published per-horizon statistics of three inflation forecasts.

use forecast_dominance::gaussian::{
    all_directed_pairs, classify, classify_table, ClassifyOptions, GaussianPairParams, HorizonStats, TrackStats,
};

fn main() -> forecast_dominance::Result<()> {
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
    let stats: Vec<HorizonStats> = (0..5)
        .map(|h| HorizonStats {
            label: format!("h{h}"),
            mu: 0.0,
            sigma_y: 1.160,
            tracks: (0..3)
                .map(|k| TrackStats {
                    name: sigma[k].0.into(),
                    sigma: sigma[k].1[h],
                    beta: beta[k][h],
                })
                .collect(),
        })
        .collect();
    let pairs = all_directed_pairs(&["SPF", "RW", "RM"]);
    let matrix = classify_table(&stats, &pairs, &ClassifyOptions::default())?;
    for ((a, b), row) in matrix.pairs.iter().zip(&matrix.cells) {
        let cells: Vec<String> = row.iter().map(|c| format!("{:<12}", c.to_string())).collect();
        println!("{a:>3} > {b:<3}  {}", cells.join(""));
    }

    // a single pair, with the numerical scan over theta
    let a = GaussianPairParams::new(0.0, 0.0, 1.0, 1.0, 0.6)?;
    let b = GaussianPairParams::new(0.0, 0.0, 1.0, 1.0, -0.3)?;
    let opts = ClassifyOptions {
        numerical_check: true,
        ..ClassifyOptions::default()
    };
    println!("{:?}", classify(&a, &b, &opts)?);
    Ok(())
}
