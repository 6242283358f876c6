//! Normalized convergence for three decay factors on one medium.
//!
//! cargo run --release --example decay_sweep -- [out_dir] [seed]

use wavefront_ga::harness::{sweep_to_dir, ExperimentConfig};

fn main() -> wavefront_ga::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = ExperimentConfig::default();
    cfg.out = args.next().unwrap_or_else(|| "out/sweep".into()).into();
    if let Some(s) = args.next() {
        cfg.set("seed", &s)?;
    }
    cfg.parallel = true;
    cfg.svg = true;

    let s = sweep_to_dir(&cfg)?;
    println!("sweep-wide maximum enhancement {:.2}", s.reference);
    print!("{:>8}", "k");
    for r in &s.runs {
        print!("{:>12}", format!("F D={}", r.decay));
    }
    println!();
    for k in [50usize, 200, 500, 700, 1000, 2000] {
        print!("{k:>8}");
        for r in &s.runs {
            print!("{:>12.3}", r.convergence[k - 1]);
        }
        println!();
    }
    for r in &s.runs {
        let (k, eta) = r
            .eta
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &e)| if e > acc.1 { (i + 1, e) } else { acc });
        println!("D={:<5} max η {eta:.3} at k={k}", r.decay);
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}
