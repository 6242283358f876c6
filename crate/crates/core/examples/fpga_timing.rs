//! Latency model of the hardware pipeline and cross-platform speedups.
//!
//! cargo run --example fpga_timing -- [iterations]

use wavefront_ga::harness::timing_report;
use wavefront_ga::timing::{speedup, HardwareProfile, BUILTIN_PROFILES};

fn main() -> wavefront_ga::Result<()> {
    let iterations: u64 = std::env::args().nth(1).map_or(2000, |s| s.parse().expect("iterations"));
    for name in BUILTIN_PROFILES {
        println!("{}", timing_report(name, iterations)?.table());
    }

    let v5 = HardwareProfile::virtex5();
    let derived = v5.derived();
    let us = HardwareProfile::ultrascale_plus();
    println!("virtex5 offspring: {:?} modeled, {:?} from chunk arithmetic", v5.offspring_time(), derived.offspring_time());
    println!(
        "mask generation: {:?} on virtex5, {:?} on ultrascale-plus ({}×)",
        derived.mask_generation_time(),
        us.mask_generation_time(),
        speedup(derived.mask_generation_time(), us.mask_generation_time())?
    );
    println!("500 iterations at 8 ms: {:?}", v5.nominal_total_time(500));
    println!("\nprofile file for virtex5:\n{}", v5.to_text());
    Ok(())
}
