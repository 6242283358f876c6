//! Baseline intensities against closed-form expectations.

use num_complex::Complex64;
use wavefront_ga::medium::{baseline_intensity, generate_medium, unshaped_speckle_intensity};
use wavefront_ga::rng::RandomSource;

/// E|Σ m_i t_i|² over fair random masks = ¼|Σt|² + ¼Σ|t|².
fn random_mask_expectation(row: &[Complex64]) -> f64 {
    let sum: Complex64 = row.iter().sum();
    0.25 * sum.norm_sqr() + 0.25 * row.iter().map(|t| t.norm_sqr()).sum::<f64>()
}

#[test]
fn random_mask_baseline_matches_expectation() {
    for seed in 1..=5 {
        let tm = generate_medium(1, 1024, 0, seed).unwrap();
        let got = baseline_intensity(&tm, &mut RandomSource::from_seed(seed + 100), 1000).unwrap();
        let expected = random_mask_expectation(tm.row(0));
        assert!((got / expected - 1.0).abs() < 0.1, "seed {seed}: {got} vs {expected}");
    }
}

#[test]
fn random_mask_baseline_averages_to_half_the_modes() {
    // over media, E[¼|Σt|² + ¼Σ|t|²] = N/2
    let tm = generate_medium(64, 1024, 0, 4).unwrap();
    let mean = (0..64).map(|c| random_mask_expectation(tm.row(c))).sum::<f64>() / 64.0;
    assert!((mean / 512.0 - 1.0).abs() < 0.2, "{mean}");
}

#[test]
fn unshaped_speckle_averages_to_the_mode_count() {
    let tm = generate_medium(512, 256, 0, 11).unwrap();
    let got = unshaped_speckle_intensity(&tm).unwrap() / 256.0;
    assert!((got - 1.0).abs() < 0.15, "{got}");
}
