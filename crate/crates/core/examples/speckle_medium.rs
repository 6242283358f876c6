//! A random transmission matrix, the speckle it produces and the detector
//! reading of the target channel.
//!
//! cargo run --example speckle_medium -- [side] [seed]
//! Prints the unshaped speckle as a side×side CSV matrix on stdout.

use wavefront_ga::medium::{
    baseline_intensity, generate_medium, unshaped_speckle_intensity, DetectorModel,
};
use wavefront_ga::rng::RandomSource;
use wavefront_ga::Mask;

fn main() -> wavefront_ga::Result<()> {
    let mut args = std::env::args().skip(1);
    let side: usize = args.next().map_or(16, |s| s.parse().expect("side"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));
    let n_modes = 1024;

    let tm = generate_medium(side * side, n_modes, 0, seed)?;
    let speckle = tm.propagate(&Mask::ones(n_modes))?;
    let unshaped = unshaped_speckle_intensity(&tm)?;
    let random = baseline_intensity(&tm, &mut RandomSource::from_seed(seed + 1), 1000)?;
    eprintln!("{} outputs × {n_modes} modes", tm.n_outputs());
    eprintln!("mean unshaped speckle intensity: {unshaped:.1}");
    eprintln!("target intensity averaged over random half-on masks: {random:.1}");

    let det = DetectorModel::calibrated(unshaped, 128.0)?;
    let reading = det.measure(speckle[0], 0, &mut RandomSource::from_seed(0))?;
    eprintln!(
        "target reads {} of {} (intensity {:.1})",
        reading.digitized,
        det.max_reading(),
        speckle[0]
    );

    for row in speckle.chunks(side) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
        println!("{}", line.join(","));
    }
    Ok(())
}
