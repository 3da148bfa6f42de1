//! Mincer-Zarnowitz regressions with HAC standard errors, moment tables and
//! the moment implications of dominance under nested information.

use forecast_dominance::calibration::{dominance_implications, moment_table, mz_regression};
use forecast_dominance::simulate::{gen_common_info_noise, gen_noisy_calibrated, ComponentDistribution};

fn main() -> forecast_dominance::Result<()> {
    let noisy = gen_noisy_calibrated(1.0, 20_000, 3)?;
    for track in ["A", "B"] {
        println!("{track}: {}", mz_regression(&noisy, track, None)?.summary());
    }

    let nested = gen_common_info_noise(ComponentDistribution::Normal { sigma: 1.0 }, 1.0, 0.3, 1.0, 20_000, 4)?;
    let table = moment_table(&nested, true)?;
    print!("{}", table.to_text());
    let report = dominance_implications(&table, "A", "B")?;
    for c in &report.checks {
        println!("{:<28} {}", c.name, if c.passed { "pass" } else { "fail" });
    }
    Ok(())
}
