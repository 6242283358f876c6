use rand_core::RngCore;

use super::trivium::TriviumState;
use crate::bits::{BitVec, Mask};
use crate::error::{Error, Result};

/// Width of the fixed-point rate comparison.
pub const RATE_BITS: u32 = 15;
/// Fixed-point denominator for rates (2^15).
pub const RATE_DENOMINATOR: u32 = 1 << RATE_BITS;

/// Maps a 64-bit seed to an 80-bit (key, iv) pair: key = seed ∥ 0x0000,
/// iv = !seed ∥ 0x0000, both little-endian.
pub fn seed_key_iv(seed: u64) -> ([u8; 10], [u8; 10]) {
    let mut key = [0u8; 10];
    let mut iv = [0u8; 10];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    iv[..8].copy_from_slice(&(!seed).to_le_bytes());
    (key, iv)
}

/// Single-owner bit supply over a Trivium keystream.
///
/// Bits are handed out strictly in keystream order; multi-bit draws take the
/// first bit as their least significant bit.
#[derive(Clone, Debug)]
pub struct RandomSource {
    cipher: TriviumState,
    buf: u64,
    avail: u32,
    bits_consumed: u64,
}

impl RandomSource {
    pub fn new(cipher: TriviumState) -> Self {
        Self {
            cipher,
            buf: 0,
            avail: 0,
            bits_consumed: 0,
        }
    }

    pub fn from_key_iv(key: &[u8], iv: &[u8]) -> Result<Self> {
        Ok(Self::new(TriviumState::new(key, iv)?))
    }

    pub fn from_seed(seed: u64) -> Self {
        let (key, iv) = seed_key_iv(seed);
        Self::new(TriviumState::new(&key, &iv).expect("fixed-size key and iv"))
    }

    #[inline]
    pub fn bits_consumed(&self) -> u64 {
        self.bits_consumed
    }

    /// Next `n <= 64` keystream bits as an integer.
    #[inline]
    pub fn take_bits(&mut self, n: u32) -> u64 {
        debug_assert!(n <= 64);
        if n == 0 {
            return 0;
        }
        self.bits_consumed += u64::from(n);
        if self.avail >= n {
            let v = if n == 64 { self.buf } else { self.buf & ((1 << n) - 1) };
            self.buf = if n == 64 { 0 } else { self.buf >> n };
            self.avail -= n;
            return v;
        }
        let have = self.avail;
        let need = n - have;
        let word = self.cipher.clock64();
        let low = if have == 0 { 0 } else { self.buf };
        let high = if need == 64 { word } else { word & ((1 << need) - 1) };
        let v = low | if have == 0 { high } else { high << have };
        self.buf = if need == 64 { 0 } else { word >> need };
        self.avail = 64 - need;
        v
    }

    #[inline]
    pub fn next_bit(&mut self) -> bool {
        self.take_bits(1) == 1
    }

    /// The next `n` keystream bits.
    pub fn next_bits(&mut self, n: usize) -> BitVec {
        let mut out = BitVec::default();
        let mut left = n;
        while left > 0 {
            let k = left.min(64);
            out.push_word(self.take_bits(k as u32), k);
            left -= k;
        }
        out
    }

    /// A mask of `n_modes` independent fair coins.
    pub fn random_mask(&mut self, n_modes: usize) -> Result<Mask> {
        if n_modes == 0 {
            return Err(Error::invalid("random mask needs at least one mode"));
        }
        Ok(self.next_bits(n_modes))
    }

    /// Position `i` is set iff a fresh 15-bit draw is below `rate_num`.
    pub fn bernoulli_select(&mut self, n: usize, rate_num: u32) -> Result<BitVec> {
        if rate_num > RATE_DENOMINATOR {
            return Err(Error::invalid(format!(
                "rate numerator {rate_num} exceeds {RATE_DENOMINATOR}"
            )));
        }
        let mut out = BitVec::default();
        let mut left = n;
        while left > 0 {
            let k = left.min(64);
            let mut word = 0u64;
            for j in 0..k {
                if (self.take_bits(RATE_BITS) as u32) < rate_num {
                    word |= 1 << j;
                }
            }
            out.push_word(word, k);
            left -= k;
        }
        Ok(out)
    }

    /// Uniform integer in `[0, range)`. Draws from the smallest power-of-two
    /// window covering `range` and rejects values outside it.
    pub fn uniform_below(&mut self, range: u64) -> Result<u64> {
        if range == 0 {
            return Err(Error::invalid("uniform range must be positive"));
        }
        let bits = 64 - (range - 1).leading_zeros();
        loop {
            let v = self.take_bits(bits);
            if v < range {
                return Ok(v);
            }
        }
    }

    /// Uniform real in `[0, 1)` with 53 bits of resolution.
    pub fn unit_f64(&mut self) -> f64 {
        self.take_bits(53) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.take_bits(32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.take_bits(64)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for b in dst {
            *b = self.take_bits(8) as u8;
        }
    }
}
