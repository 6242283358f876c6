//! Repeated 500-iteration runs with the hardware preset, as when refocusing
//! through a medium that keeps changing.
//!
//! cargo run --release --example repetition -- [alpha] [noise_relative]

use wavefront_ga::harness::{repeat, ExperimentConfig, Preset};

fn main() -> wavefront_ga::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig::preset(Preset::Hardware);
    cfg.set("alpha", &args.next().unwrap_or_else(|| "0".into()))?;
    cfg.set("noise_relative", &args.next().unwrap_or_else(|| "0.1".into()))?;
    cfg.parallel = true;

    let r = repeat(&cfg)?;
    println!("{} repeats × {} iterations, alpha {}", r.records.len(), r.iterations, r.alpha);
    for rec in &r.records {
        println!("  repeat {:>2}: final enhancement {:>7.2}", rec.repeat, rec.final_enhancement);
    }
    println!("mean {:.2}, std {:.2}, CV {:.2}%", r.mean, r.std_dev, 100.0 * r.cv);
    Ok(())
}
