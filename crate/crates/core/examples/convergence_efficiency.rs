//! Calibrate a stopping iteration from one run's η curve, then reuse it as an
//! early stop on other seeds and compare against running to completion.
//!
//! cargo run --release --example convergence_efficiency

use wavefront_ga::harness::{run_experiment, ExperimentConfig};
use wavefront_ga::metrics::{convergence_efficiency, optimal_stop};
use wavefront_ga::timing::HardwareProfile;

fn main() -> wavefront_ga::Result<()> {
    let cfg = ExperimentConfig { parallel: true, ..Default::default() };
    let calibration = run_experiment(&cfg)?;
    let eta = convergence_efficiency(&calibration.trace)?;
    let k_star = optimal_stop(&calibration.trace)?;
    println!("calibration run: η_max = {:.3} at k* = {k_star}", eta[k_star as usize - 1]);
    for k in [100usize, 250, 500, 1000, 1500, 2000] {
        println!("  η({k}) = {:+.3}", eta[k - 1]);
    }

    let v5 = HardwareProfile::virtex5();
    println!(
        "\nmodeled time on {}: {:.2} s to k*, {:.2} s to 2000",
        v5.name,
        v5.nominal_total_time(k_star).as_secs_f64(),
        v5.nominal_total_time(2000).as_secs_f64()
    );

    println!("\n{:>6}{:>14}{:>14}{:>10}", "seed", "ζ at k*", "ζ at 2000", "ratio");
    for seed in 2..6 {
        let full = run_experiment(&ExperimentConfig { seed, ..cfg.clone() })?;
        let early = run_experiment(&ExperimentConfig { seed, early_stop: Some(k_star), ..cfg.clone() })?;
        let (a, b) = (early.summary.final_enhancement, full.summary.final_enhancement);
        println!("{seed:>6}{a:>14.2}{b:>14.2}{:>10.3}", a / b);
    }
    Ok(())
}
