//! Latency model of the hardware GA pipeline.
//!
//! All durations are integer nanoseconds (`std::time::Duration`), so sums
//! and products of profile fields are exact.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Latency parameters of one target platform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardwareProfile {
    pub name: String,
    pub core_clock: Duration,
    /// Width of one mask chunk written to the modulator buffer.
    pub chunk_bits: u64,
    /// Time to produce one offspring chunk.
    pub chunk_gen: Duration,
    pub mask_pixels: u64,
    /// Measured time to build a full offspring mask; replaces the
    /// chunk-count estimate when set.
    pub offspring_mask_override: Option<Duration>,
    /// Rounded whole-offspring figure quoted for the platform, if any.
    pub nominal_offspring: Option<Duration>,
    pub adc_accumulate: Duration,
    pub ranking_delay: Duration,
    pub init: Duration,
    pub population: u32,
    /// Flat per-iteration time for platforms modeled as a black box.
    pub iteration_override: Option<Duration>,
}

pub const BUILTIN_PROFILES: [&str; 3] = ["virtex5", "ultrascale-plus", "pc-matlab"];

const fn us(v: u64) -> Duration {
    Duration::from_micros(v)
}

const fn ns(v: u64) -> Duration {
    Duration::from_nanos(v)
}

impl HardwareProfile {
    /// Virtex-5 with DDR: 80 ns per 128-bit chunk, 420 µs measured mask time.
    pub fn virtex5() -> Self {
        Self {
            name: "virtex5".into(),
            core_clock: ns(5),
            chunk_bits: 128,
            chunk_gen: ns(80),
            mask_pixels: 1024 * 768,
            offspring_mask_override: Some(us(420)),
            nominal_offspring: Some(us(500)),
            adc_accumulate: us(31),
            ranking_delay: us(10),
            init: us(43),
            population: 16,
            iteration_override: None,
        }
    }

    /// Virtex-UltraScale+ with masks in on-chip memory: 10 ns per chunk.
    pub fn ultrascale_plus() -> Self {
        Self {
            name: "ultrascale-plus".into(),
            chunk_gen: ns(10),
            offspring_mask_override: None,
            nominal_offspring: None,
            ..Self::virtex5()
        }
    }

    /// PC-driven GA: 1200 ms per iteration, nothing else modeled.
    pub fn pc_matlab() -> Self {
        Self {
            name: "pc-matlab".into(),
            offspring_mask_override: None,
            nominal_offspring: None,
            init: Duration::ZERO,
            iteration_override: Some(Duration::from_millis(1200)),
            ..Self::virtex5()
        }
    }

    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "virtex5" => Ok(Self::virtex5()),
            "ultrascale-plus" => Ok(Self::ultrascale_plus()),
            "pc-matlab" => Ok(Self::pc_matlab()),
            other => Err(Error::Config(format!(
                "unknown hardware profile {other:?}; available: {}",
                BUILTIN_PROFILES.join(", ")
            ))),
        }
    }

    /// Same platform with the mask time derived from the chunk count.
    pub fn derived(&self) -> Self {
        Self {
            offspring_mask_override: None,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("core_clock", self.core_clock),
            ("chunk_gen", self.chunk_gen),
            ("adc_accumulate", self.adc_accumulate),
            ("ranking_delay", self.ranking_delay),
        ];
        for (name, d) in positive {
            if d.is_zero() {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        for (name, d) in [
            ("offspring_mask", self.offspring_mask_override),
            ("nominal_offspring", self.nominal_offspring),
            ("iteration", self.iteration_override),
        ] {
            if d.is_some_and(|d| d.is_zero()) {
                return Err(Error::Config(format!("{name} override must be positive")));
            }
        }
        if self.chunk_bits == 0 || self.mask_pixels % self.chunk_bits != 0 {
            return Err(Error::Config(format!(
                "chunk_bits {} must divide mask_pixels {}",
                self.chunk_bits, self.mask_pixels
            )));
        }
        if self.population == 0 {
            return Err(Error::Config("population must be positive".into()));
        }
        Ok(())
    }

    pub fn chunk_count(&self) -> u64 {
        self.mask_pixels / self.chunk_bits
    }

    /// Chunk count × chunk time, ignoring any measured override.
    pub fn mask_generation_time(&self) -> Duration {
        self.chunk_gen * self.chunk_count() as u32
    }

    pub fn offspring_mask_time(&self) -> Duration {
        self.offspring_mask_override
            .unwrap_or_else(|| self.mask_generation_time())
    }

    /// Mask generation + ADC accumulation + ranking delay. Display time is
    /// hidden behind the DDR write-back and does not appear.
    pub fn offspring_time(&self) -> Duration {
        self.offspring_mask_time() + self.adc_accumulate + self.ranking_delay
    }

    pub fn iteration_time(&self) -> Duration {
        self.iteration_override
            .unwrap_or_else(|| iteration_time_from(self.offspring_time(), self.population))
    }

    /// Iteration time from the rounded per-offspring figure when the
    /// platform has one.
    pub fn nominal_iteration_time(&self) -> Duration {
        match (self.iteration_override, self.nominal_offspring) {
            (Some(it), _) => it,
            (None, Some(off)) => iteration_time_from(off, self.population),
            (None, None) => self.iteration_time(),
        }
    }

    /// init + iterations × iteration time.
    pub fn total_time(&self, iterations: u64) -> Duration {
        total_time_from(self.init, self.iteration_time(), iterations)
    }

    pub fn nominal_total_time(&self, iterations: u64) -> Duration {
        total_time_from(self.init, self.nominal_iteration_time(), iterations)
    }

    pub fn report(&self, iterations: u64) -> TimingReport {
        let offspring = self.offspring_time();
        TimingReport {
            profile: self.name.clone(),
            iterations,
            per_offspring_us: micros(offspring),
            per_iteration_ms: millis(self.iteration_time()),
            nominal_per_iteration_ms: millis(self.nominal_iteration_time()),
            total_s: self.total_time(iterations).as_secs_f64(),
            nominal_total_s: self.nominal_total_time(iterations).as_secs_f64(),
            measurement_rate_hz: 1e9 / offspring.as_nanos() as f64,
        }
    }

    /// `key=value` text mirroring the profile fields; times carry their unit
    /// in the key name.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        line("name", self.name.clone());
        line("core_clock_ns", fmt_scaled(self.core_clock, 1));
        line("chunk_bits", self.chunk_bits.to_string());
        line("chunk_gen_ns", fmt_scaled(self.chunk_gen, 1));
        line("mask_pixels", self.mask_pixels.to_string());
        if let Some(d) = self.offspring_mask_override {
            line("offspring_mask_us", fmt_scaled(d, 1_000));
        }
        if let Some(d) = self.nominal_offspring {
            line("nominal_offspring_us", fmt_scaled(d, 1_000));
        }
        line("adc_accumulate_us", fmt_scaled(self.adc_accumulate, 1_000));
        line("ranking_delay_us", fmt_scaled(self.ranking_delay, 1_000));
        line("init_us", fmt_scaled(self.init, 1_000));
        line("population", self.population.to_string());
        if let Some(d) = self.iteration_override {
            line("iteration_ms", fmt_scaled(d, 1_000_000));
        }
        out
    }

    /// Parses the `key=value` format. Missing keys take Virtex-5 values;
    /// optional overrides are absent unless given.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut p = Self {
            name: "custom".into(),
            offspring_mask_override: None,
            nominal_offspring: None,
            ..Self::virtex5()
        };
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                source_name: "hardware profile".into(),
                row: row + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            let value = value.trim();
            let time = |scale: u64| parse_scaled(value, scale).map_err(&err);
            let int = || {
                value
                    .parse::<u64>()
                    .map_err(|e| err(format!("bad integer {value:?}: {e}")))
            };
            match key.trim() {
                "name" => p.name = value.to_string(),
                "core_clock_ns" => p.core_clock = time(1)?,
                "chunk_bits" => p.chunk_bits = int()?,
                "chunk_gen_ns" => p.chunk_gen = time(1)?,
                "mask_pixels" => p.mask_pixels = int()?,
                "offspring_mask_us" => p.offspring_mask_override = Some(time(1_000)?),
                "nominal_offspring_us" => p.nominal_offspring = Some(time(1_000)?),
                "adc_accumulate_us" => p.adc_accumulate = time(1_000)?,
                "ranking_delay_us" => p.ranking_delay = time(1_000)?,
                "init_us" => p.init = time(1_000)?,
                "population" => {
                    p.population = u32::try_from(int()?).map_err(|e| err(e.to_string()))?
                }
                "iteration_ms" => p.iteration_override = Some(time(1_000_000)?),
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        p.validate()?;
        Ok(p)
    }
}

/// population × per-offspring time.
pub fn iteration_time_from(offspring: Duration, population: u32) -> Duration {
    offspring * population
}

pub fn total_time_from(init: Duration, iteration: Duration, iterations: u64) -> Duration {
    init + Duration::from_nanos(
        u64::try_from(iteration.as_nanos()).expect("iteration time fits in u64 ns") * iterations,
    )
}

/// Ratio of two per-iteration (or per-stage) times: `slow / fast`.
pub fn speedup(slow: Duration, fast: Duration) -> Result<f64> {
    if slow.is_zero() || fast.is_zero() {
        return Err(Error::invalid("speedup needs positive times"));
    }
    Ok(slow.as_nanos() as f64 / fast.as_nanos() as f64)
}

/// Per-iteration speedup of `fast` over `slow`.
pub fn profile_speedup(slow: &HardwareProfile, fast: &HardwareProfile) -> Result<f64> {
    speedup(slow.iteration_time(), fast.iteration_time())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub profile: String,
    pub iterations: u64,
    pub per_offspring_us: f64,
    pub per_iteration_ms: f64,
    pub nominal_per_iteration_ms: f64,
    pub total_s: f64,
    pub nominal_total_s: f64,
    pub measurement_rate_hz: f64,
}

fn micros(d: Duration) -> f64 {
    d.as_nanos() as f64 / 1e3
}

fn millis(d: Duration) -> f64 {
    d.as_nanos() as f64 / 1e6
}

/// Formats `d` in units of `scale` nanoseconds without rounding.
pub(crate) fn fmt_scaled(d: Duration, scale: u64) -> String {
    let total = d.as_nanos() as u64;
    let (int, frac) = (total / scale, total % scale);
    if frac == 0 {
        return int.to_string();
    }
    let width = scale.ilog10() as usize;
    let digits = format!("{frac:0width$}");
    format!("{int}.{}", digits.trim_end_matches('0'))
}

/// Parses a decimal number of `scale`-nanosecond units exactly.
pub(crate) fn parse_scaled(text: &str, scale: u64) -> std::result::Result<Duration, String> {
    let width = scale.ilog10() as usize;
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if frac.len() > width || (int.is_empty() && frac.is_empty()) {
        return Err(format!("cannot represent {text:?} in whole nanoseconds"));
    }
    let all_digits = |s: &str| s.chars().all(|c| c.is_ascii_digit());
    if !all_digits(int) || !all_digits(frac) {
        return Err(format!("bad duration {text:?}"));
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|e| format!("{e}"))? };
    let frac_val: u64 = if frac.is_empty() {
        0
    } else {
        frac.parse::<u64>().map_err(|e| format!("{e}"))? * 10u64.pow((width - frac.len()) as u32)
    };
    int.checked_mul(scale)
        .and_then(|v| v.checked_add(frac_val))
        .map(Duration::from_nanos)
        .ok_or_else(|| format!("duration {text:?} overflows"))
}
