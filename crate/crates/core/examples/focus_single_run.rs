//! One focusing run with the simulation preset, written to a directory.
//!
//! cargo run --release --example focus_single_run -- [out_dir] [decay] [seed]

use wavefront_ga::harness::{run_to_dir, ExperimentConfig};

fn main() -> wavefront_ga::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig::default();
    cfg.out = args.next().unwrap_or_else(|| "out/single".into()).into();
    if let Some(d) = args.next() {
        cfg.set("decay", &d)?;
    }
    if let Some(s) = args.next() {
        cfg.set("seed", &s)?;
    }
    cfg.parallel = true;
    cfg.svg = true;
    cfg.profile = Some("virtex5".into());

    let o = run_to_dir(&cfg)?;
    for k in [1, 50, 200, 500, 1000, 2000] {
        if let Some(r) = o.trace.record(k) {
            println!("k={k:<5} enhancement {:>7.2}  rate {}/32768", r.enhancement, r.mutation_rate_num);
        }
    }
    let s = &o.summary;
    println!(
        "final {:.2}; η peaks at {:.3} on iteration {} (F = {:.3}), reached after {:.3} s of modeled hardware time",
        s.final_enhancement,
        s.max_eta,
        s.optimal_stop,
        s.convergence_at_optimal_stop,
        s.model_time_at_optimal_stop_us.unwrap_or(0.0) / 1e6
    );
    println!("wrote {}", cfg.out.display());
    Ok(())
}
