//! Simulated optical bench: a complex Gaussian transmission matrix, the
//! binary-amplitude forward model, and a quantizing photodetector.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use crate::bits::Mask;
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Default ADC resolution.
pub const DEFAULT_ADC_BITS: u32 = 10;
/// Default ADC input range in volts (0 to 3.3 V).
pub const DEFAULT_ADC_FULL_SCALE: f64 = 3.3;
/// ADC samples accumulated per measurement: floor(31 µs / 2.3 µs).
pub const DEFAULT_SAMPLES_PER_MEASUREMENT: u32 = 13;
/// Mean speckle intensity is mapped to `full_scale / DEFAULT_HEADROOM` volts,
/// so enhancements up to this factor stay below saturation.
pub const DEFAULT_HEADROOM: f64 = 128.0;
/// Random masks averaged for the pre-optimization baseline.
pub const DEFAULT_BASELINE_SAMPLES: usize = 1000;

fn standard_complex(rng: &mut RandomSource) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Linear map from input modes to output field channels.
///
/// Entries are i.i.d. circular complex Gaussian with unit variance, stored
/// row-major (`n_outputs` rows of `n_modes`). Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct TransmissionMatrix {
    n_outputs: usize,
    n_modes: usize,
    target_channel: usize,
    seed: u64,
    entries: Vec<Complex64>,
}

fn check_shape(n_outputs: usize, n_modes: usize, target_channel: usize) -> Result<()> {
    if n_outputs == 0 || n_modes == 0 {
        return Err(Error::invalid(format!(
            "medium dimensions must be positive, got {n_outputs}x{n_modes}"
        )));
    }
    if target_channel >= n_outputs {
        return Err(Error::invalid(format!(
            "target channel {target_channel} out of range for {n_outputs} outputs"
        )));
    }
    Ok(())
}

/// Draws a medium from `seed`. The same seed always yields the same entries.
pub fn generate_medium(
    n_outputs: usize,
    n_modes: usize,
    target_channel: usize,
    seed: u64,
) -> Result<TransmissionMatrix> {
    check_shape(n_outputs, n_modes, target_channel)?;
    let mut rng = RandomSource::from_seed(seed);
    let entries = (0..n_outputs * n_modes)
        .map(|_| standard_complex(&mut rng))
        .collect();
    Ok(TransmissionMatrix {
        n_outputs,
        n_modes,
        target_channel,
        seed,
        entries,
    })
}

impl TransmissionMatrix {
    /// Wraps explicit entries (row-major). The seed is recorded as 0.
    pub fn from_entries(
        n_outputs: usize,
        n_modes: usize,
        target_channel: usize,
        entries: Vec<Complex64>,
    ) -> Result<Self> {
        check_shape(n_outputs, n_modes, target_channel)?;
        if entries.len() != n_outputs * n_modes {
            return Err(Error::invalid(format!(
                "expected {} entries, got {}",
                n_outputs * n_modes,
                entries.len()
            )));
        }
        Ok(Self {
            n_outputs,
            n_modes,
            target_channel,
            seed: 0,
            entries,
        })
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn target_channel(&self) -> usize {
        self.target_channel
    }

    /// Seed the matrix was generated from. Decorrelated matrices keep the
    /// seed of their ancestor and can no longer be regenerated from it.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, channel: usize) -> &[Complex64] {
        &self.entries[channel * self.n_modes..(channel + 1) * self.n_modes]
    }

    pub fn entry(&self, channel: usize, mode: usize) -> Complex64 {
        self.row(channel)[mode]
    }

    fn check_mask(&self, mask: &Mask) -> Result<()> {
        if mask.len() != self.n_modes {
            return Err(Error::invalid(format!(
                "mask has {} modes, medium has {}",
                mask.len(),
                self.n_modes
            )));
        }
        Ok(())
    }

    /// Field at one output: the sum of entries over modes that are on.
    pub fn field(&self, mask: &Mask, channel: usize) -> Result<Complex64> {
        self.check_mask(mask)?;
        if channel >= self.n_outputs {
            return Err(Error::invalid(format!("channel {channel} out of range")));
        }
        let row = self.row(channel);
        Ok(mask.iter_ones().map(|i| row[i]).sum())
    }

    /// Noise-free intensity at the target channel.
    pub fn target_intensity(&self, mask: &Mask) -> Result<f64> {
        Ok(self.field(mask, self.target_channel)?.norm_sqr())
    }

    /// Intensity at every output channel.
    pub fn propagate(&self, mask: &Mask) -> Result<Vec<f64>> {
        self.check_mask(mask)?;
        Ok((0..self.n_outputs)
            .map(|c| {
                let row = self.row(c);
                mask.iter_ones().map(|i| row[i]).sum::<Complex64>().norm_sqr()
            })
            .collect())
    }

    /// Markov blend toward a fresh medium: t' = √(1−α²)·t + α·g.
    pub fn decorrelate(&self, alpha: f64, rng: &mut RandomSource) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::invalid(format!("alpha {alpha} outside [0, 1]")));
        }
        let keep = (1.0 - alpha * alpha).sqrt();
        let entries = self
            .entries
            .iter()
            .map(|&t| t * keep + standard_complex(rng) * alpha)
            .collect();
        Ok(Self {
            entries,
            ..self.clone()
        })
    }
}

/// Free-function form of [`TransmissionMatrix::propagate`].
pub fn propagate(tm: &TransmissionMatrix, mask: &Mask) -> Result<Vec<f64>> {
    tm.propagate(mask)
}

/// Mean noise-free target intensity over `n_samples` fresh random masks.
pub fn baseline_intensity(
    tm: &TransmissionMatrix,
    rng: &mut RandomSource,
    n_samples: usize,
) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::invalid("baseline needs at least one sample"));
    }
    let mut sum = 0.0;
    for _ in 0..n_samples {
        let mask = rng.random_mask(tm.n_modes())?;
        sum += tm.target_intensity(&mask)?;
    }
    Ok(sum / n_samples as f64)
}

/// Mean speckle intensity over all output channels with every mode on.
pub fn unshaped_speckle_intensity(tm: &TransmissionMatrix) -> Result<f64> {
    let all_on = Mask::ones(tm.n_modes());
    let out = tm.propagate(&all_on)?;
    Ok(out.iter().sum::<f64>() / out.len() as f64)
}

/// Photodetector followed by an accumulating ADC.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorModel {
    /// Volts per unit intensity.
    pub gain: f64,
    /// Additive Gaussian noise per ADC sample, in volts.
    pub noise_sigma: f64,
    pub adc_bits: u32,
    pub adc_full_scale: f64,
    pub samples_per_measurement: u32,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            gain: 1.0,
            noise_sigma: 0.0,
            adc_bits: DEFAULT_ADC_BITS,
            adc_full_scale: DEFAULT_ADC_FULL_SCALE,
            samples_per_measurement: DEFAULT_SAMPLES_PER_MEASUREMENT,
        }
    }
}

/// One detector reading.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub raw_intensity: f64,
    pub digitized: u32,
    pub iteration_index: u64,
}

impl DetectorModel {
    /// Default ADC with the gain chosen so `baseline` maps to
    /// `full_scale / headroom` volts.
    pub fn calibrated(baseline: f64, headroom: f64) -> Result<Self> {
        if baseline <= 0.0 || !baseline.is_finite() {
            return Err(Error::invalid(format!("baseline must be positive, got {baseline}")));
        }
        if headroom <= 0.0 || !headroom.is_finite() {
            return Err(Error::invalid(format!("headroom must be positive, got {headroom}")));
        }
        let mut det = Self::default();
        det.gain = det.adc_full_scale / (headroom * baseline);
        Ok(det)
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.adc_bits == 0 || self.adc_bits > 24 {
            return Err(Error::invalid(format!("adc_bits {} not in 1..=24", self.adc_bits)));
        }
        if self.adc_full_scale <= 0.0 || !self.adc_full_scale.is_finite() {
            return Err(Error::invalid("adc_full_scale must be positive"));
        }
        if self.samples_per_measurement == 0 {
            return Err(Error::invalid("samples_per_measurement must be at least 1"));
        }
        if self.noise_sigma < 0.0 || !self.noise_sigma.is_finite() {
            return Err(Error::invalid("noise_sigma must be nonnegative"));
        }
        if self.gain <= 0.0 || !self.gain.is_finite() {
            return Err(Error::invalid("gain must be positive"));
        }
        Ok(())
    }

    #[inline]
    pub fn max_code(&self) -> u32 {
        (1u32 << self.adc_bits) - 1
    }

    /// Upper bound of the accumulated reading.
    pub fn max_reading(&self) -> u32 {
        self.max_code() * self.samples_per_measurement
    }

    /// Voltage seen by the ADC for a noise-free intensity.
    pub fn voltage(&self, intensity: f64) -> f64 {
        self.gain * intensity
    }

    /// Floor quantizer over `[0, full_scale]`, clamping out-of-range inputs.
    #[inline]
    pub fn quantize(&self, volts: f64) -> u32 {
        let v = volts.clamp(0.0, self.adc_full_scale);
        let code = (v / self.adc_full_scale * f64::from(self.max_code())).floor();
        (code as u32).min(self.max_code())
    }

    /// Accumulates `samples_per_measurement` noisy, clamped, quantized samples.
    /// No randomness is consumed when `noise_sigma` is zero.
    pub fn measure(
        &self,
        intensity: f64,
        iteration_index: u64,
        rng: &mut RandomSource,
    ) -> Result<Measurement> {
        if intensity < 0.0 || intensity.is_nan() {
            return Err(Error::invalid(format!("intensity must be nonnegative, got {intensity}")));
        }
        let v = self.voltage(intensity);
        let digitized = if self.noise_sigma == 0.0 {
            self.quantize(v) * self.samples_per_measurement
        } else {
            (0..self.samples_per_measurement)
                .map(|_| {
                    let n: f64 = StandardNormal.sample(rng);
                    self.quantize(v + self.noise_sigma * n)
                })
                .sum()
        };
        Ok(Measurement {
            raw_intensity: intensity,
            digitized,
            iteration_index,
        })
    }
}

/// Free-function form of [`DetectorModel::measure`].
pub fn measure(
    det: &DetectorModel,
    intensity: f64,
    iteration_index: u64,
    rng: &mut RandomSource,
) -> Result<Measurement> {
    det.measure(intensity, iteration_index, rng)
}

/// Portable description of a medium. Matrices are always regenerated from
/// the seed rather than stored.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MediumSpec {
    pub n_outputs: usize,
    pub n_modes: usize,
    pub target_channel: usize,
    pub seed: u64,
}

impl MediumSpec {
    pub fn generate(&self) -> Result<TransmissionMatrix> {
        generate_medium(self.n_outputs, self.n_modes, self.target_channel, self.seed)
    }

    pub fn of(tm: &TransmissionMatrix) -> Self {
        Self {
            n_outputs: tm.n_outputs,
            n_modes: tm.n_modes,
            target_channel: tm.target_channel,
            seed: tm.seed,
        }
    }

    /// `key=value` lines: n_outputs, n_modes, target_channel, seed.
    pub fn to_text(&self) -> String {
        format!(
            "n_outputs={}\nn_modes={}\ntarget_channel={}\nseed={}\n",
            self.n_outputs, self.n_modes, self.target_channel, self.seed
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let (mut outputs, mut modes, mut target, mut seed) = (None, None, None, None);
        for (row, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                source_name: "medium snapshot".into(),
                row: row + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(format!("expected key=value, got {line:?}")))?;
            let value = value.trim();
            let num = |v: &str| {
                v.parse::<u64>()
                    .map_err(|e| parse_err(format!("bad value {v:?}: {e}")))
            };
            match key.trim() {
                "n_outputs" => outputs = Some(num(value)? as usize),
                "n_modes" => modes = Some(num(value)? as usize),
                "target_channel" => target = Some(num(value)? as usize),
                "seed" => seed = Some(num(value)?),
                other => return Err(parse_err(format!("unknown key {other:?}"))),
            }
        }
        let missing = |k: &str| Error::Parse {
            source_name: "medium snapshot".into(),
            row: 0,
            message: format!("missing key {k}"),
        };
        let spec = Self {
            n_outputs: outputs.ok_or_else(|| missing("n_outputs"))?,
            n_modes: modes.ok_or_else(|| missing("n_modes"))?,
            target_channel: target.ok_or_else(|| missing("target_channel"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
        };
        check_shape(spec.n_outputs, spec.n_modes, spec.target_channel)?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitVec;

    fn single(n_modes: usize, j: usize) -> Mask {
        let mut m = BitVec::zeros(n_modes);
        m.set(j, true);
        m
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_medium(1, 1024, 0, 17).unwrap();
        let b = generate_medium(1, 1024, 0, 17).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_medium(1, 1024, 0, 18).unwrap());
    }

    #[test]
    fn small_medium_matches_direct_sampler() {
        let tm = generate_medium(1, 8, 0, 5).unwrap();
        let mut rng = RandomSource::from_seed(5);
        for i in 0..8 {
            assert_eq!(tm.entry(0, i), standard_complex(&mut rng));
        }
    }

    #[test]
    fn unit_second_moment() {
        let tm = generate_medium(64, 1024, 0, 3).unwrap();
        let m = tm.entries().iter().map(|t| t.norm_sqr()).sum::<f64>() / 65_536.0;
        assert!((0.95..=1.05).contains(&m), "{m}");
    }

    #[test]
    fn bad_shapes_rejected() {
        assert!(generate_medium(0, 8, 0, 1).is_err());
        assert!(generate_medium(1, 0, 0, 1).is_err());
        assert!(generate_medium(2, 8, 2, 1).is_err());
    }

    #[test]
    fn zero_mask_is_dark() {
        let tm = generate_medium(4, 16, 0, 9).unwrap();
        assert!(tm.propagate(&BitVec::zeros(16)).unwrap().iter().all(|&i| i == 0.0));
    }

    #[test]
    fn single_mode_intensity() {
        let tm = generate_medium(3, 16, 1, 9).unwrap();
        let out = tm.propagate(&single(16, 5)).unwrap();
        for (c, &i) in out.iter().enumerate() {
            assert_eq!(i, tm.entry(c, 5).norm_sqr());
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let tm = generate_medium(1, 16, 0, 9).unwrap();
        assert!(tm.propagate(&BitVec::zeros(15)).is_err());
    }

    #[test]
    fn field_is_additive_over_disjoint_modes() {
        let tm = generate_medium(4, 32, 0, 21).unwrap();
        let a = single(32, 3);
        let b = single(32, 20);
        let mut ab = a.clone();
        ab.set(20, true);
        for c in 0..4 {
            let lhs = tm.field(&ab, c).unwrap();
            let rhs = tm.field(&a, c).unwrap() + tm.field(&b, c).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn saturated_reading() {
        let det = DetectorModel::default();
        let mut rng = RandomSource::from_seed(0);
        let m = det.measure(3.3, 0, &mut rng).unwrap();
        assert_eq!(m.digitized, 13 * 1023);
        assert_eq!(m.digitized, 13_299);
        assert_eq!(det.measure(10.0, 0, &mut rng).unwrap().digitized, 13_299);
    }

    #[test]
    fn dark_reading() {
        let det = DetectorModel::default();
        let mut rng = RandomSource::from_seed(0);
        assert_eq!(det.measure(0.0, 0, &mut rng).unwrap().digitized, 0);
    }

    #[test]
    fn half_scale_reading() {
        let det = DetectorModel::default();
        let mut rng = RandomSource::from_seed(0);
        assert_eq!(det.measure(1.65, 0, &mut rng).unwrap().digitized, 6643);
    }

    #[test]
    fn negative_intensity_rejected() {
        let det = DetectorModel::default();
        let mut rng = RandomSource::from_seed(0);
        assert!(det.measure(-1e-9, 0, &mut rng).is_err());
    }

    #[test]
    fn noisy_reading_stays_in_range() {
        let det = DetectorModel::default().with_noise(0.5);
        let mut rng = RandomSource::from_seed(4);
        for i in 0..200 {
            let m = det.measure(i as f64 * 0.02, i, &mut rng).unwrap();
            assert!(m.digitized <= det.max_reading());
        }
    }

    #[test]
    fn decorrelate_zero_is_identity() {
        let tm = generate_medium(2, 64, 0, 1).unwrap();
        let mut rng = RandomSource::from_seed(2);
        assert_eq!(tm.decorrelate(0.0, &mut rng).unwrap(), tm);
        assert!(tm.decorrelate(1.5, &mut rng).is_err());
        assert!(tm.decorrelate(-0.1, &mut rng).is_err());
    }

    fn correlation(a: &TransmissionMatrix, b: &TransmissionMatrix) -> f64 {
        let num: Complex64 = a.entries().iter().zip(b.entries()).map(|(x, y)| x * y.conj()).sum();
        let na: f64 = a.entries().iter().map(|x| x.norm_sqr()).sum();
        let nb: f64 = b.entries().iter().map(|x| x.norm_sqr()).sum();
        num.re / (na * nb).sqrt()
    }

    #[test]
    fn full_decorrelation_is_independent() {
        let tm = generate_medium(64, 1024, 0, 31).unwrap();
        let mut rng = RandomSource::from_seed(32);
        let fresh = tm.decorrelate(1.0, &mut rng).unwrap();
        let r = correlation(&tm, &fresh);
        assert!((-0.02..=0.02).contains(&r), "{r}");
        let m = fresh.entries().iter().map(|t| t.norm_sqr()).sum::<f64>() / 65_536.0;
        assert!((0.95..=1.05).contains(&m), "{m}");
    }

    #[test]
    fn partial_decorrelation() {
        let tm = generate_medium(64, 1024, 0, 31).unwrap();
        let mut rng = RandomSource::from_seed(33);
        let next = tm.decorrelate(0.1, &mut rng).unwrap();
        let r = correlation(&tm, &next);
        assert!((0.98..=1.00).contains(&r), "{r}");
    }

    #[test]
    fn unshaped_speckle_matches_channel_average() {
        let tm = generate_medium(5, 40, 2, 21).unwrap();
        let expected: f64 = (0..5)
            .map(|c| tm.row(c).iter().sum::<Complex64>().norm_sqr())
            .sum::<f64>()
            / 5.0;
        let got = unshaped_speckle_intensity(&tm).unwrap();
        assert!((got - expected).abs() <= 1e-12 * expected);

        let one = generate_medium(1, 16, 0, 3).unwrap();
        let direct = one.row(0).iter().sum::<Complex64>().norm_sqr();
        assert_eq!(unshaped_speckle_intensity(&one).unwrap(), direct);
    }

    #[test]
    fn unshaped_speckle_scales_with_modes() {
        // 256 channels, each exponential with mean ≈ n_modes
        let tm = generate_medium(256, 1024, 0, 8).unwrap();
        let got = unshaped_speckle_intensity(&tm).unwrap() / 1024.0;
        assert!((0.8..1.2).contains(&got), "{got}");
    }

    #[test]
    fn baseline_single_mode() {
        let t = Complex64::new(0.6, -0.8);
        let tm = TransmissionMatrix::from_entries(1, 1, 0, vec![t]).unwrap();
        let mut rng = RandomSource::from_seed(1);
        let b = baseline_intensity(&tm, &mut rng, 10_000).unwrap();
        // on half the time: mean |t|²/2 = 0.5, ±3σ for 10 000 coin flips
        assert!((b - 0.5).abs() < 0.015, "{b}");
    }

    #[test]
    fn baseline_is_deterministic() {
        let tm = generate_medium(1, 128, 0, 2).unwrap();
        let a = baseline_intensity(&tm, &mut RandomSource::from_seed(6), 100).unwrap();
        let b = baseline_intensity(&tm, &mut RandomSource::from_seed(6), 100).unwrap();
        assert_eq!(a, b);
        assert!(baseline_intensity(&tm, &mut RandomSource::from_seed(6), 0).is_err());
    }

    #[test]
    fn calibration_maps_baseline() {
        let det = DetectorModel::calibrated(512.0, 256.0).unwrap();
        assert!((det.voltage(512.0) - 3.3 / 256.0).abs() < 1e-15);
        assert!(DetectorModel::calibrated(0.0, 256.0).is_err());
    }

    #[test]
    fn snapshot_round_trip() {
        let spec = MediumSpec {
            n_outputs: 4,
            n_modes: 1024,
            target_channel: 2,
            seed: u64::MAX,
        };
        assert_eq!(MediumSpec::from_text(&spec.to_text()).unwrap(), spec);
        assert_eq!(spec.generate().unwrap(), generate_medium(4, 1024, 2, u64::MAX).unwrap());
        assert!(matches!(
            MediumSpec::from_text("n_outputs=1\nbogus\n"),
            Err(Error::Parse { row: 2, .. })
        ));
    }
}
