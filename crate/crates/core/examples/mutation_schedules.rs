//! Mutation rate and decay ratio of the exponential and linear schedules.
//!
//! cargo run --example mutation_schedules

use wavefront_ga::ga::MutationSchedule;
use wavefront_ga::metrics::decay_ratio;

fn main() -> wavefront_ga::Result<()> {
    let exps: Vec<(f64, MutationSchedule)> = [80.0, 400.0, 1000.0]
        .iter()
        .map(|&d| (d, MutationSchedule::default_exponential(d)))
        .collect();
    let linear = MutationSchedule::hardware_linear();

    print!("{:>6}", "k");
    for (d, _) in &exps {
        print!("{:>12}", format!("D={d}"));
    }
    println!("{:>12}{:>10}", "linear", "num/2^15");
    for k in [1u64, 50, 100, 134, 135, 200, 500, 1000, 2000] {
        print!("{k:>6}");
        for (_, s) in &exps {
            print!("{:>12.6}", s.rate_for_iteration(k));
        }
        println!(
            "{:>12.6}{:>10}",
            linear.rate_for_iteration(k),
            linear.rate_numerator_for_iteration(k)
        );
    }

    println!("\ndecay ratio at the first index:");
    for (d, s) in &exps {
        println!("  D={d:<5} {:.4e}", decay_ratio(s, s.first_index()));
    }
    println!("  linear  {:.4e}", decay_ratio(&linear, linear.first_index()));
    Ok(())
}
