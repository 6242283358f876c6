//! Deterministic random bits: a Trivium keystream and samplers built on it.

mod source;
mod trivium;

pub use source::{seed_key_iv, RandomSource, RATE_BITS, RATE_DENOMINATOR};
pub use trivium::{trivium_init, TriviumState, IV_BYTES, KEY_BYTES, WARMUP_ROUNDS};
