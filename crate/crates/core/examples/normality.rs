//! Lobato-Velasco test for a Gaussian and a skewed series.

use forecast_dominance::calibration::lobato_velasco;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

fn main() -> forecast_dominance::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gaussian: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let exp = Exp::new(1.0).unwrap();
    let skewed: Vec<f64> = (0..5000).map(|_| exp.sample(&mut rng)).collect();
    for (label, sample) in [("gaussian", &gaussian), ("exponential", &skewed)] {
        let r = lobato_velasco(sample)?;
        println!("{label:<12} statistic {:>10.4}  p = {:.4}", r.statistic, r.p_value);
    }
    Ok(())
}
