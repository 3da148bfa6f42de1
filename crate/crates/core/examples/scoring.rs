//! Bregman and elementary scores, and the mean/expectile functionals.

use forecast_dominance::scoring::{expectile, ScoreKind, ScoreSpec};

fn main() -> forecast_dominance::Result<()> {
    let (x, y) = (0.4, 0.7);
    for kind in ScoreKind::BREGMAN {
        let s = ScoreSpec::bregman(kind)?.score(x, y)?;
        println!("{:<20} S({x}, {y}) = {:.6}", kind.name(), s.value());
    }

    let sample = [0.2, 1.5, -0.3, 2.8, 0.9];
    for tau in [0.1, 0.5, 0.9] {
        let e = expectile(&sample, tau)?;
        let spec = ScoreSpec::elementary_expectile(1.0, tau)?;
        let mean_score: f64 = sample.iter().map(|y| spec.score(e, *y).unwrap().value()).sum::<f64>() / 5.0;
        println!("tau = {tau}: expectile {e:.6}, mean elementary score at theta = 1: {mean_score:.6}");
    }
    Ok(())
}
