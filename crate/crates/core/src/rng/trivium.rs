//! Trivium keystream generator, 64 bits per clock.
//!
//! Each shift register is stored top-aligned in a `u128`: register bit `i`
//! (1-based, as in the cipher description) sits at position `128 - i`. Every
//! tap index is at least 66, so 64 consecutive rounds only ever read bits
//! that were present before the batch started, which lets one word step
//! emit 64 keystream bits with plain shifts.

use crate::error::{Error, Result};

pub const KEY_BYTES: usize = 10;
pub const IV_BYTES: usize = 10;

/// Rounds applied before the first keystream bit is released.
pub const WARMUP_ROUNDS: usize = 4 * 288;

const LEN_A: u32 = 93;
const LEN_B: u32 = 84;
const LEN_C: u32 = 111;

#[inline]
fn top_mask(len: u32) -> u128 {
    !((1u128 << (128 - len)) - 1)
}

/// 64 successive values of register bit `tap`; bit `t` of the result is the
/// value seen at round `t` of the batch.
#[inline(always)]
fn tap(reg: u128, tap: u32) -> u64 {
    (reg >> (128 - tap)) as u64
}

#[derive(Clone, PartialEq, Eq)]
pub struct TriviumState {
    a: u128,
    b: u128,
    c: u128,
    warmed_up: bool,
}

impl std::fmt::Debug for TriviumState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TriviumState")
            .field("warmed_up", &self.warmed_up)
            .finish_non_exhaustive()
    }
}

impl TriviumState {
    /// Loads an 80-bit key and IV (bits read least-significant first within
    /// each byte) and runs the 1152 warm-up rounds.
    pub fn new(key: &[u8], iv: &[u8]) -> Result<Self> {
        if key.len() != KEY_BYTES {
            return Err(Error::invalid(format!(
                "trivium key must be 80 bits, got {}",
                key.len() * 8
            )));
        }
        if iv.len() != IV_BYTES {
            return Err(Error::invalid(format!(
                "trivium iv must be 80 bits, got {}",
                iv.len() * 8
            )));
        }
        let load = |bytes: &[u8]| {
            let mut reg = 0u128;
            for i in 0..80 {
                if (bytes[i / 8] >> (i % 8)) & 1 == 1 {
                    reg |= 1u128 << (127 - i);
                }
            }
            reg
        };
        let mut state = Self {
            a: load(key),
            b: load(iv),
            // c_109, c_110, c_111 set
            c: 0b111u128 << (128 - LEN_C),
            warmed_up: false,
        };
        for _ in 0..WARMUP_ROUNDS / 64 {
            state.clock64();
        }
        state.warmed_up = true;
        Ok(state)
    }

    #[inline]
    pub fn is_warmed_up(&self) -> bool {
        self.warmed_up
    }

    /// Advances 64 rounds and returns their keystream bits, first bit in the
    /// least significant position.
    #[inline]
    pub fn clock64(&mut self) -> u64 {
        let (a, b, c) = (self.a, self.b, self.c);
        let t1 = tap(a, 66) ^ tap(a, 93);
        let t2 = tap(b, 69) ^ tap(b, 84);
        let t3 = tap(c, 66) ^ tap(c, 111);
        let z = t1 ^ t2 ^ t3;
        let into_b = t1 ^ (tap(a, 91) & tap(a, 92)) ^ tap(b, 78);
        let into_c = t2 ^ (tap(b, 82) & tap(b, 83)) ^ tap(c, 87);
        let into_a = t3 ^ (tap(c, 109) & tap(c, 110)) ^ tap(a, 69);
        self.a = ((a >> 64) | ((into_a as u128) << 64)) & top_mask(LEN_A);
        self.b = ((b >> 64) | ((into_b as u128) << 64)) & top_mask(LEN_B);
        self.c = ((c >> 64) | ((into_c as u128) << 64)) & top_mask(LEN_C);
        z
    }

    /// Keystream bytes, bits packed least-significant first.
    pub fn keystream_bytes(&mut self, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n + 8);
        while out.len() < n {
            out.extend_from_slice(&self.clock64().to_le_bytes());
        }
        out.truncate(n);
        out
    }
}

/// Builds a warmed-up cipher state from an 80-bit key and IV.
pub fn trivium_init(key: &[u8], iv: &[u8]) -> Result<TriviumState> {
    TriviumState::new(key, iv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex(s: &str) -> Vec<u8> {
        (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
            .collect()
    }

    #[test]
    fn zero_key_matches_published_prefix() {
        let mut t = trivium_init(&[0; 10], &[0; 10]).unwrap();
        assert_eq!(t.keystream_bytes(8), hex("fbe0bf265859051b"));
    }

    #[test]
    fn determinism() {
        let mut a = trivium_init(&[0; 10], &[0; 10]).unwrap();
        let mut b = trivium_init(&[0; 10], &[0; 10]).unwrap();
        assert_eq!(a.keystream_bytes(64), b.keystream_bytes(64));
    }

    #[test]
    fn wrong_lengths_rejected() {
        assert!(matches!(
            trivium_init(&[0; 9], &[0; 10]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            trivium_init(&[0; 10], &[0; 11]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn warm_up_flag_set() {
        assert!(trivium_init(&[1; 10], &[2; 10]).unwrap().is_warmed_up());
    }
}
