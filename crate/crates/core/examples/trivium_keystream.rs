//! Keystream from the Trivium generator and the samplers layered on it.
//!
//! cargo run --example trivium_keystream -- [seed]

use wavefront_ga::rng::{seed_key_iv, trivium_init, RandomSource, RATE_DENOMINATOR};

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn main() -> wavefront_ga::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(1), |s| s.parse()).expect("seed must be an integer");

    let mut zero = trivium_init(&[0; 10], &[0; 10])?;
    println!("all-zero key/iv, first 16 bytes: {}", hex(&zero.keystream_bytes(16)));

    let (key, iv) = seed_key_iv(seed);
    let mut cipher = trivium_init(&key, &iv)?;
    println!("seed {seed}: key {} iv {}", hex(&key), hex(&iv));
    println!("  keystream: {}", hex(&cipher.keystream_bytes(32)));

    let mut rng = RandomSource::from_seed(seed);
    let mask = rng.random_mask(64)?;
    println!("  64-mode mask: {mask}");
    let rate = 983; // ≈ 0.03 of 2^15
    let sel = rng.bernoulli_select(4096, rate)?;
    println!(
        "  bernoulli {rate}/{RATE_DENOMINATOR} over 4096 modes selected {} (expected {:.1})",
        sel.count_ones(),
        4096.0 * rate as f64 / RATE_DENOMINATOR as f64
    );
    println!("  bits consumed so far: {}", rng.bits_consumed());
    Ok(())
}
