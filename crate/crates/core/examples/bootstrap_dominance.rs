//! Stationary-bootstrap tests of forecast dominance in both directions.

use forecast_dominance::bootstrap::{dominance_tests, StationaryBootstrapConfig};
use forecast_dominance::simulate::gen_ar1_horizons;

fn main() -> forecast_dominance::Result<()> {
    let series = gen_ar1_horizons(0.8, 1.0, 3, 1500, 21)?;
    let config = StationaryBootstrapConfig::for_sample_size(series.len()).with_replications(2000)?;
    let (ab, ba) = dominance_tests(&series, "A", "B", 0.5, None, &config)?;
    println!("{}", ab.summary_json()?);
    println!("{}", ba.summary_json()?);
    Ok(())
}
