use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::ga::{GaConfig, MutationMode, MutationSchedule, Replacement};
use crate::medium::{
    DetectorModel, DEFAULT_ADC_BITS, DEFAULT_ADC_FULL_SCALE, DEFAULT_BASELINE_SAMPLES,
    DEFAULT_HEADROOM, DEFAULT_SAMPLES_PER_MEASUREMENT,
};
use crate::timing::HardwareProfile;

const BASELINE_SALT: u64 = 0x5EED_BA5E_0000_0000;
const DECORRELATION_SALT: u64 = 0x5EED_DEC0_0000_0000;

/// How the pre-optimization speckle intensity is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineMode {
    /// Every mode on, intensity averaged over all output channels.
    Unshaped,
    /// Target intensity averaged over fresh random masks.
    RandomMasks,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    Exponential,
    Linear,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// 1024 modes, P = 32, M = 16, exponential schedule.
    Simulation,
    /// 4096 modes, P = M = 16, linear fixed-point schedule, Virtex-5 timing.
    Hardware,
}

/// Everything needed to reproduce an experiment. All randomness derives from
/// `seed`: the medium uses it directly, GA run `i` uses `seed ^ (i + 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n_outputs: usize,
    pub n_modes: usize,
    pub target_channel: usize,
    pub baseline: BaselineMode,
    pub baseline_samples: usize,
    pub headroom: f64,
    pub adc_bits: u32,
    pub adc_full_scale: f64,
    pub samples_per_measurement: u32,
    /// Detector noise in volts.
    pub noise_sigma: f64,
    /// Detector noise as a multiple of the baseline voltage.
    pub noise_relative: f64,
    pub population: usize,
    pub offspring: usize,
    pub replacement: Replacement,
    pub mutation: MutationMode,
    pub iterations: u64,
    pub early_stop: Option<u64>,
    pub parallel: bool,
    pub schedule: ScheduleKind,
    pub r0: f64,
    pub r_end: f64,
    pub decay: f64,
    pub kappa_start: u32,
    pub tau: u32,
    pub epsilon: u32,
    pub rate: f64,
    /// Built-in profile name or path to a profile file.
    pub profile: Option<String>,
    pub decays: Vec<f64>,
    pub repeats: usize,
    pub repeat_iterations: u64,
    pub alpha: f64,
    /// Relative noise levels for noise studies.
    pub noise_levels: Vec<f64>,
    pub out: PathBuf,
    pub svg: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::preset(Preset::Simulation)
    }
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let sim = Self {
            seed: 1,
            n_outputs: 256,
            n_modes: 1024,
            target_channel: 0,
            baseline: BaselineMode::Unshaped,
            baseline_samples: DEFAULT_BASELINE_SAMPLES,
            headroom: DEFAULT_HEADROOM,
            adc_bits: DEFAULT_ADC_BITS,
            adc_full_scale: DEFAULT_ADC_FULL_SCALE,
            samples_per_measurement: DEFAULT_SAMPLES_PER_MEASUREMENT,
            noise_sigma: 0.0,
            noise_relative: 0.0,
            population: 32,
            offspring: 16,
            replacement: Replacement::ReplaceWorst,
            mutation: MutationMode::Redraw,
            iterations: 2000,
            early_stop: None,
            parallel: false,
            schedule: ScheduleKind::Exponential,
            r0: 0.06,
            r_end: 0.012,
            decay: 80.0,
            kappa_start: 2000,
            tau: 12,
            epsilon: 1 << 15,
            rate: 0.012,
            profile: None,
            decays: vec![80.0, 400.0, 1000.0],
            repeats: 10,
            repeat_iterations: 500,
            alpha: 0.0,
            noise_levels: vec![0.0, 0.1, 0.3],
            out: PathBuf::from("out"),
            svg: false,
        };
        match preset {
            Preset::Simulation => sim,
            Preset::Hardware => Self {
                n_outputs: 64,
                n_modes: 64 * 64,
                population: 16,
                offspring: 16,
                replacement: Replacement::ElitistMerge,
                schedule: ScheduleKind::Linear,
                profile: Some("virtex5".into()),
                ..sim
            },
        }
    }

    /// Parses `key=value` lines; `#` starts a comment. A `preset` line is
    /// applied before every other key regardless of position.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            pairs.push((i + 1, k.trim(), v.trim()));
        }
        let mut cfg = Self::default();
        for (line, k, v) in pairs.iter().filter(|p| p.1 == "preset") {
            cfg = Self::preset(parse_preset(v).map_err(|e| at_line(*line, k, e))?);
        }
        for (line, k, v) in pairs.iter().filter(|p| p.1 != "preset") {
            cfg.set(k, v).map_err(|e| at_line(*line, k, e))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "preset" => *self = Self::preset(parse_preset(value)?),
            "seed" => self.seed = num(key, value)?,
            "n_outputs" => self.n_outputs = num(key, value)?,
            "n_modes" => self.n_modes = num(key, value)?,
            "target_channel" => self.target_channel = num(key, value)?,
            "baseline" => {
                self.baseline = match value {
                    "unshaped" => BaselineMode::Unshaped,
                    "random-masks" => BaselineMode::RandomMasks,
                    _ => return Err(bad(key, value, "unshaped | random-masks")),
                }
            }
            "baseline_samples" => self.baseline_samples = num(key, value)?,
            "headroom" => self.headroom = num(key, value)?,
            "adc_bits" => self.adc_bits = num(key, value)?,
            "adc_full_scale" => self.adc_full_scale = num(key, value)?,
            "samples_per_measurement" => self.samples_per_measurement = num(key, value)?,
            "noise_sigma" => self.noise_sigma = num(key, value)?,
            "noise_relative" => self.noise_relative = num(key, value)?,
            "population" => self.population = num(key, value)?,
            "offspring" => self.offspring = num(key, value)?,
            "replacement" => self.replacement = value.parse()?,
            "mutation" => self.mutation = value.parse()?,
            "iterations" => self.iterations = num(key, value)?,
            "early_stop" => {
                self.early_stop = match value {
                    "" | "off" | "none" => None,
                    v => Some(num(key, v)?),
                }
            }
            "parallel" => self.parallel = boolean(key, value)?,
            "schedule" => {
                self.schedule = match value {
                    "exponential" => ScheduleKind::Exponential,
                    "linear" => ScheduleKind::Linear,
                    "constant" => ScheduleKind::Constant,
                    _ => return Err(bad(key, value, "exponential | linear | constant")),
                }
            }
            "r0" => self.r0 = num(key, value)?,
            "r_end" => self.r_end = num(key, value)?,
            "decay" => self.decay = num(key, value)?,
            "kappa_start" => self.kappa_start = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "rate" => self.rate = num(key, value)?,
            "profile" => {
                self.profile = match value {
                    "" | "none" => None,
                    v => Some(v.to_string()),
                }
            }
            "decays" => self.decays = list(key, value)?,
            "repeats" => self.repeats = num(key, value)?,
            "repeat_iterations" => self.repeat_iterations = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "noise_levels" => self.noise_levels = list(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "svg" => self.svg = boolean(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Text form accepted by [`ExperimentConfig::from_text`].
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut lines = vec![
            format!("seed={}", self.seed),
            format!("n_outputs={}", self.n_outputs),
            format!("n_modes={}", self.n_modes),
            format!("target_channel={}", self.target_channel),
            format!(
                "baseline={}",
                match self.baseline {
                    BaselineMode::Unshaped => "unshaped",
                    BaselineMode::RandomMasks => "random-masks",
                }
            ),
            format!("baseline_samples={}", self.baseline_samples),
            format!("headroom={}", self.headroom),
            format!("adc_bits={}", self.adc_bits),
            format!("adc_full_scale={}", self.adc_full_scale),
            format!("samples_per_measurement={}", self.samples_per_measurement),
            format!("noise_sigma={}", self.noise_sigma),
            format!("noise_relative={}", self.noise_relative),
            format!("population={}", self.population),
            format!("offspring={}", self.offspring),
            format!("replacement={}", self.replacement),
            format!("mutation={}", self.mutation),
            format!("iterations={}", self.iterations),
            format!("early_stop={}", self.early_stop.map_or("off".into(), |k| k.to_string())),
            format!("parallel={}", self.parallel),
            format!(
                "schedule={}",
                match self.schedule {
                    ScheduleKind::Exponential => "exponential",
                    ScheduleKind::Linear => "linear",
                    ScheduleKind::Constant => "constant",
                }
            ),
            format!("r0={}", self.r0),
            format!("r_end={}", self.r_end),
            format!("decay={}", self.decay),
            format!("kappa_start={}", self.kappa_start),
            format!("tau={}", self.tau),
            format!("epsilon={}", self.epsilon),
            format!("rate={}", self.rate),
            format!("profile={}", self.profile.as_deref().unwrap_or("none")),
            format!("decays={}", join(&self.decays)),
            format!("repeats={}", self.repeats),
            format!("repeat_iterations={}", self.repeat_iterations),
            format!("alpha={}", self.alpha),
            format!("noise_levels={}", join(&self.noise_levels)),
            format!("out={}", self.out.display()),
            format!("svg={}", self.svg),
        ];
        lines.push(String::new());
        lines.join("\n")
    }

    pub fn mutation_schedule(&self) -> Result<MutationSchedule> {
        match self.schedule {
            ScheduleKind::Exponential => MutationSchedule::exponential(self.r0, self.r_end, self.decay),
            ScheduleKind::Linear => {
                MutationSchedule::linear_clamped(self.kappa_start, self.tau, self.epsilon, self.r_end)
            }
            ScheduleKind::Constant => MutationSchedule::constant(self.rate),
        }
    }

    pub fn ga_config(&self) -> Result<GaConfig> {
        let cfg = GaConfig {
            population_size: self.population,
            offspring_per_iteration: self.offspring,
            n_modes: self.n_modes,
            schedule: self.mutation_schedule()?,
            replacement: self.replacement,
            mutation: self.mutation,
            max_iterations: self.iterations,
            early_stop: self.early_stop,
            parallel: self.parallel,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Detector calibrated to `baseline`, with the configured noise.
    pub fn detector(&self, baseline: f64) -> Result<DetectorModel> {
        if self.noise_sigma != 0.0 && self.noise_relative != 0.0 {
            return Err(Error::Config(
                "set either noise_sigma or noise_relative, not both".into(),
            ));
        }
        let mut det = DetectorModel::calibrated(baseline, self.headroom)?;
        det.adc_bits = self.adc_bits;
        det.adc_full_scale = self.adc_full_scale;
        det.samples_per_measurement = self.samples_per_measurement;
        det.gain = det.adc_full_scale / (self.headroom * baseline);
        det.noise_sigma = if self.noise_relative != 0.0 {
            self.noise_relative * det.voltage(baseline)
        } else {
            self.noise_sigma
        };
        det.validate()?;
        Ok(det)
    }

    pub fn hardware_profile(&self) -> Result<Option<HardwareProfile>> {
        let Some(p) = &self.profile else {
            return Ok(None);
        };
        load_profile(p).map(Some)
    }

    pub fn validate(&self) -> Result<()> {
        self.ga_config()?;
        if self.n_outputs == 0 || self.target_channel >= self.n_outputs {
            return Err(Error::Config(format!(
                "target_channel {} needs n_outputs > it, have {}",
                self.target_channel, self.n_outputs
            )));
        }
        if self.baseline == BaselineMode::RandomMasks && self.baseline_samples == 0 {
            return Err(Error::Config("baseline_samples must be positive".into()));
        }
        if !(self.headroom > 0.0) {
            return Err(Error::Config(format!("headroom must be positive, got {}", self.headroom)));
        }
        if self.noise_sigma < 0.0 || self.noise_relative < 0.0 {
            return Err(Error::Config("noise must be nonnegative".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        self.hardware_profile()?;
        Ok(())
    }

    pub fn medium_seed(&self) -> u64 {
        self.seed
    }

    pub fn ga_seed(&self, run_index: u64) -> u64 {
        self.seed ^ (run_index + 1)
    }

    pub fn baseline_seed(&self) -> u64 {
        self.seed ^ BASELINE_SALT
    }

    pub fn decorrelation_seed(&self) -> u64 {
        self.seed ^ DECORRELATION_SALT
    }
}

/// A built-in profile name, or a path to a profile file.
pub fn load_profile(name_or_path: &str) -> Result<HardwareProfile> {
    match HardwareProfile::builtin(name_or_path) {
        Ok(p) => Ok(p),
        Err(e) => {
            let path = Path::new(name_or_path);
            if path.is_file() {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                HardwareProfile::from_text(&text)
            } else {
                Err(e)
            }
        }
    }
}

fn parse_preset(v: &str) -> Result<Preset> {
    match v {
        "simulation" => Ok(Preset::Simulation),
        "hardware" => Ok(Preset::Hardware),
        _ => Err(bad("preset", v, "simulation | hardware")),
    }
}

fn at_line(line: usize, key: &str, e: Error) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("line {line}: {msg}")),
        other => Error::Config(format!("line {line}: {key}: {other}")),
    }
}

fn bad(key: &str, value: &str, expected: &str) -> Error {
    Error::Config(format!("{key}: {value:?} is not one of {expected}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Config(format!("{key}: cannot parse {value:?}: {e}")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(key, value, "true | false")),
    }
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::preset(Preset::Hardware);
        cfg.early_stop = Some(500);
        cfg.decays = vec![80.0, 2.5];
        cfg.noise_relative = 0.1;
        assert_eq!(ExperimentConfig::from_text(&cfg.to_text()).unwrap(), cfg);
        let sim = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_text(&sim.to_text()).unwrap(), sim);
    }

    #[test]
    fn preset_applies_first() {
        let cfg = ExperimentConfig::from_text("population = 8\n# comment\npreset=hardware\n").unwrap();
        assert_eq!(cfg.population, 8);
        assert_eq!(cfg.n_modes, 4096);
        assert_eq!(cfg.replacement, Replacement::ElitistMerge);
    }

    #[test]
    fn errors_name_the_line() {
        let err = ExperimentConfig::from_text("seed=1\nbogus=2\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert_eq!(err.exit_code(), 2);
        let err = ExperimentConfig::from_text("seed=x").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
        assert!(ExperimentConfig::from_text("seed").is_err());
    }

    #[test]
    fn presets_build_ga_configs() {
        let sim = ExperimentConfig::default().ga_config().unwrap();
        assert_eq!(sim, GaConfig::simulation(80.0));
        let hw = ExperimentConfig::preset(Preset::Hardware).ga_config().unwrap();
        assert_eq!(hw, GaConfig::hardware_parity());
    }

    #[test]
    fn seed_policy() {
        let cfg = ExperimentConfig { seed: 10, ..Default::default() };
        assert_eq!(cfg.medium_seed(), 10);
        assert_eq!(cfg.ga_seed(0), 11);
        assert_eq!(cfg.ga_seed(1), 8);
        assert_ne!(cfg.baseline_seed(), cfg.decorrelation_seed());
    }

    #[test]
    fn relative_noise_scales_with_baseline_voltage() {
        let cfg = ExperimentConfig { noise_relative: 0.3, ..Default::default() };
        let det = cfg.detector(1000.0).unwrap();
        assert!((det.noise_sigma - 0.3 * 3.3 / 128.0).abs() < 1e-15);
        let both = ExperimentConfig { noise_sigma: 0.01, ..cfg };
        assert!(both.detector(1000.0).is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.target_channel = 256;
        assert!(cfg.validate().is_err());
        cfg = ExperimentConfig { profile: Some("nope".into()), ..Default::default() };
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
        cfg = ExperimentConfig { alpha: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
