//! Empirical Murphy curves for two simulated forecasts, with pointwise
//! standard errors of their difference.

use forecast_dominance::murphy::{
    difference_standard_errors, dominance_summary, empirical_psi, integrate_difference, knot_grid, murphy_difference,
};
use forecast_dominance::simulate::{gen_sum_components, ComponentDistribution};

fn main() -> forecast_dominance::Result<()> {
    let series = gen_sum_components(ComponentDistribution::Normal { sigma: 1.0 }, 2000, 1)?;
    let grid = knot_grid(&series, &["A", "B"])?;
    let psi_a = empirical_psi(&series, "A", &grid, 0.5)?;
    let psi_b = empirical_psi(&series, "B", &grid, 0.5)?;
    let diff = murphy_difference(&series, "A", "B", 0.5)?;
    let se = difference_standard_errors(&series, "A", "B", &diff.thetas, 0.5)?;

    println!("{:>10} {:>10} {:>10} {:>10} {:>10}", "theta", "psi_A", "psi_B", "diff", "se");
    for g in (0..grid.len()).step_by(grid.len() / 12) {
        println!(
            "{:>10.4} {:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            grid[g], psi_a.values[g], psi_b.values[g], diff.values[g], se[g]
        );
    }
    println!("{:?}", dominance_summary(&diff));
    // four times the integral is the mean squared-error difference
    println!("4 * integral = {:.6}", 4.0 * integrate_difference(&series, "A", "B", 0.5)?);

    let mut out = Vec::new();
    diff.write_csv(&mut out)?;
    println!("{} bytes of plot-ready CSV", out.len());
    Ok(())
}
