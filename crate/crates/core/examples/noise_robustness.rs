//! Final enhancement against detector noise, on the same media at every level.
//!
//! cargo run --release --example noise_robustness -- [iterations]

use wavefront_ga::harness::{noise_study, ExperimentConfig};

fn main() -> wavefront_ga::Result<()> {
    let iterations = std::env::args().nth(1).unwrap_or_else(|| "1000".into());
    let mut cfg = ExperimentConfig { parallel: true, ..Default::default() };
    cfg.set("iterations", &iterations)?;
    cfg.noise_levels = vec![0.0, 0.1, 0.3, 1.0, 3.0];
    let seeds: Vec<u64> = (1..=4).collect();

    let points = noise_study(&cfg, &seeds)?;
    let clean = points[0].mean_final;
    println!("{:>10}{:>12}{:>10}", "σ/V_base", "mean ζ", "relative");
    for p in &points {
        println!("{:>10}{:>12.2}{:>10.3}", p.noise_relative, p.mean_final, p.mean_final / clean);
    }
    Ok(())
}
