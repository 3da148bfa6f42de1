//! Scenario generators, driven from JSON the same way the command line
//! does it.

use forecast_dominance::simulate::ScenarioSpec;

const SCENARIOS: [&str; 3] = [
    r#"{"kind": "NoisyCalibrated", "parameters": {"sigma_zeta": 1.0}, "n": 5, "seed": 1}"#,
    r#"{"kind": "AR1Horizons", "parameters": {"a": 0.9, "sigma": 1.0, "h": 2}, "n": 5, "seed": 2}"#,
    r#"{"kind": "LinearModelEstimation", "parameters": {"p": 3, "n_train": 50, "sigma_eps": 1.0,
        "forecaster_a": {"estimator": {"method": "ols"}},
        "forecaster_b": {"estimator": {"method": "ridge", "lambda": 5.0}, "noise_scale": 2.0}}, "n": 5, "seed": 3}"#,
];

fn main() -> forecast_dominance::Result<()> {
    for text in SCENARIOS {
        let spec = ScenarioSpec::from_json(text)?;
        let series = spec.generate()?;
        let mut out = Vec::new();
        series.write_csv(&mut out)?;
        println!("{}", String::from_utf8_lossy(&out));
    }
    Ok(())
}
