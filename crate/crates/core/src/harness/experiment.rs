use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{load_profile, BaselineMode, ExperimentConfig};
use super::io::{micros, svg_line_plot, trace_from_csv, trace_to_csv, write_atomic, read_text, Series};
use crate::error::{Error, Result};
use crate::ga;
use crate::medium::{
    baseline_intensity, generate_medium, unshaped_speckle_intensity, DetectorModel,
    TransmissionMatrix,
};
use crate::metrics::{
    convergence_efficiency, max_enhancement, normalized_convergence, optimal_stop,
    EnhancementSource, Normalization, RunTrace,
};
use crate::rng::RandomSource;
use crate::timing::{speedup, HardwareProfile, TimingReport};

/// Medium, baseline and detector shared by every run of an experiment.
#[derive(Clone, Debug)]
pub struct Setup {
    pub medium: TransmissionMatrix,
    pub baseline: f64,
    pub detector: DetectorModel,
    pub profile: Option<HardwareProfile>,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let medium = generate_medium(cfg.n_outputs, cfg.n_modes, cfg.target_channel, cfg.medium_seed())?;
        let baseline = measure_baseline(cfg, &medium)?;
        Ok(Self {
            detector: cfg.detector(baseline)?,
            profile: cfg.hardware_profile()?,
            medium,
            baseline,
        })
    }
}

pub fn measure_baseline(cfg: &ExperimentConfig, tm: &TransmissionMatrix) -> Result<f64> {
    let b = match cfg.baseline {
        BaselineMode::Unshaped => unshaped_speckle_intensity(tm)?,
        BaselineMode::RandomMasks => {
            let mut rng = RandomSource::from_seed(cfg.baseline_seed());
            baseline_intensity(tm, &mut rng, cfg.baseline_samples)?
        }
    };
    if !(b > 0.0) {
        return Err(Error::Numeric(format!("baseline intensity {b} is not positive")));
    }
    Ok(b)
}

/// Everything in `summary.json`; recomputable from the trace alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: Option<u64>,
    pub iterations: u64,
    pub final_enhancement: f64,
    pub max_enhancement: f64,
    pub max_eta: f64,
    pub optimal_stop: u64,
    pub convergence_at_optimal_stop: f64,
    pub total_measurements: u64,
    pub model_time_at_optimal_stop_us: Option<f64>,
    pub enhancement_source: EnhancementSource,
}

impl RunSummary {
    pub fn from_trace(trace: &RunTrace, seed: Option<u64>) -> Result<Self> {
        trace.validate()?;
        let eta = convergence_efficiency(trace)?;
        let k_star = optimal_stop(trace)?;
        let f = normalized_convergence(trace, Normalization::SelfMax)?;
        let at = |k: u64| &trace.records[k as usize - 1];
        let last = trace.records.last().expect("validated trace is nonempty");
        Ok(Self {
            seed,
            iterations: last.iteration,
            final_enhancement: last.enhancement,
            max_enhancement: max_enhancement(trace),
            max_eta: eta[k_star as usize - 1],
            optimal_stop: k_star,
            convergence_at_optimal_stop: f[k_star as usize - 1],
            total_measurements: last.cum_measurements,
            model_time_at_optimal_stop_us: at(k_star).model_time.map(micros),
            enhancement_source: trace.enhancement_source,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trace: RunTrace,
    pub summary: RunSummary,
}

/// One seeded GA run on a prepared setup.
pub fn run_on(cfg: &ExperimentConfig, setup: &Setup, run_index: u64) -> Result<RunOutcome> {
    let ga_cfg = cfg.ga_config()?;
    let rng = RandomSource::from_seed(cfg.ga_seed(run_index));
    let trace = ga::run(
        &ga_cfg,
        &setup.medium,
        &setup.detector,
        setup.baseline,
        setup.profile.as_ref(),
        rng,
    )?;
    let summary = RunSummary::from_trace(&trace, Some(cfg.seed))?;
    Ok(RunOutcome { trace, summary })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    run_on(cfg, &Setup::new(cfg)?, 0)
}

/// Writes `trace.csv`, `summary.json` and, if enabled, convergence plots.
pub fn write_run(cfg: &ExperimentConfig, outcome: &RunOutcome, dir: &Path) -> Result<()> {
    write_atomic(&dir.join("trace.csv"), trace_to_csv(&outcome.trace).as_bytes())?;
    write_atomic(&dir.join("summary.json"), outcome.summary.to_json().as_bytes())?;
    if cfg.svg {
        let t = &outcome.trace;
        let zeta = Series {
            name: "enhancement".into(),
            points: t.records.iter().map(|r| (r.iteration as f64, r.enhancement)).collect(),
        };
        let eta = Series {
            name: "η".into(),
            points: convergence_efficiency(t)?
                .into_iter()
                .enumerate()
                .map(|(i, e)| (i as f64 + 1.0, e))
                .collect(),
        };
        write_atomic(
            &dir.join("enhancement.svg"),
            svg_line_plot("Enhancement", "iteration", "ζ", &[zeta]).as_bytes(),
        )?;
        write_atomic(
            &dir.join("eta.svg"),
            svg_line_plot("Convergence efficiency", "iteration", "η", &[eta]).as_bytes(),
        )?;
    }
    Ok(())
}

/// Runs and writes into `cfg.out`.
pub fn run_to_dir(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let outcome = run_experiment(cfg)?;
    write_run(cfg, &outcome, &cfg.out)?;
    Ok(outcome)
}

#[derive(Clone, Debug)]
pub struct SweepRun {
    pub decay: f64,
    pub outcome: RunOutcome,
    /// ζ_k divided by the sweep-wide maximum.
    pub convergence: Vec<f64>,
    /// Cross-run convergence minus k / N_g.
    pub eta: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub runs: Vec<SweepRun>,
    /// Highest enhancement over all runs.
    pub reference: f64,
}

impl SweepOutcome {
    /// `iteration,F_d<D>,eta_d<D>,...` with one column pair per run.
    pub fn comparison_csv(&self) -> String {
        let mut s = String::from("iteration");
        for (i, r) in self.runs.iter().enumerate() {
            let _ = write!(s, ",F_{0},eta_{0}", run_label(i, r.decay, &self.runs));
        }
        s.push('\n');
        let n = self.runs.iter().map(|r| r.convergence.len()).max().unwrap_or(0);
        for k in 0..n {
            let _ = write!(s, "{}", k + 1);
            for r in &self.runs {
                match (r.convergence.get(k), r.eta.get(k)) {
                    (Some(f), Some(e)) => {
                        let _ = write!(s, ",{f},{e}");
                    }
                    _ => s.push_str(",,"),
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn run_for(&self, decay: f64) -> Option<&SweepRun> {
        self.runs.iter().find(|r| r.decay == decay)
    }
}

fn run_label(index: usize, decay: f64, runs: &[SweepRun]) -> String {
    let dupes = runs.iter().filter(|r| r.decay == decay).count();
    if dupes > 1 {
        format!("d{decay}_{index}")
    } else {
        format!("d{decay}")
    }
}

/// One run per decay factor on the same medium with the same GA seed, so the
/// runs differ only in their schedule.
pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    if cfg.decays.is_empty() {
        return Err(Error::Config("sweep needs at least one decay value".into()));
    }
    let setup = Setup::new(cfg)?;
    let one = |&decay: &f64| -> Result<(f64, RunOutcome)> {
        let c = ExperimentConfig { decay, ..cfg.clone() };
        Ok((decay, run_on(&c, &setup, 0)?))
    };
    let outcomes: Vec<(f64, RunOutcome)> = if cfg.parallel {
        cfg.decays.par_iter().map(one).collect::<Result<_>>()?
    } else {
        cfg.decays.iter().map(one).collect::<Result<_>>()?
    };
    let reference = outcomes
        .iter()
        .map(|(_, o)| max_enhancement(&o.trace))
        .fold(f64::NEG_INFINITY, f64::max);
    let runs = outcomes
        .into_iter()
        .map(|(decay, outcome)| {
            let convergence =
                normalized_convergence(&outcome.trace, Normalization::External(reference))?;
            let n_g = outcome.trace.effective_n_g()? as f64;
            let eta = convergence
                .iter()
                .enumerate()
                .map(|(i, f)| f - (i as f64 + 1.0) / n_g)
                .collect();
            Ok(SweepRun { decay, outcome, convergence, eta })
        })
        .collect::<Result<_>>()?;
    Ok(SweepOutcome { runs, reference })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SweepRunSummary {
    decay: f64,
    final_enhancement: f64,
    max_enhancement: f64,
    cross_run_max_eta: f64,
    cross_run_optimal_stop: u64,
    summary: RunSummary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct SweepSummary {
    seed: u64,
    reference_enhancement: f64,
    runs: Vec<SweepRunSummary>,
}

/// Writes `comparison.csv`, `sweep.json` and each run under `d<D>/`.
pub fn sweep_to_dir(cfg: &ExperimentConfig) -> Result<SweepOutcome> {
    let outcome = sweep(cfg)?;
    let mut runs = Vec::new();
    for (i, r) in outcome.runs.iter().enumerate() {
        write_run(cfg, &r.outcome, &cfg.out.join(run_label(i, r.decay, &outcome.runs)))?;
        let k = crate::metrics::argmax_first(&r.eta);
        runs.push(SweepRunSummary {
            decay: r.decay,
            final_enhancement: r.outcome.summary.final_enhancement,
            max_enhancement: r.outcome.summary.max_enhancement,
            cross_run_max_eta: r.eta[k],
            cross_run_optimal_stop: k as u64 + 1,
            summary: r.outcome.summary.clone(),
        });
    }
    let summary = SweepSummary { seed: cfg.seed, reference_enhancement: outcome.reference, runs };
    let mut json = serde_json::to_string_pretty(&summary).expect("sweep summary serializes");
    json.push('\n');
    write_atomic(&cfg.out.join("comparison.csv"), outcome.comparison_csv().as_bytes())?;
    write_atomic(&cfg.out.join("sweep.json"), json.as_bytes())?;
    if cfg.svg {
        let curves = |f: &dyn Fn(&SweepRun) -> &Vec<f64>| -> Vec<Series> {
            outcome
                .runs
                .iter()
                .map(|r| Series {
                    name: format!("D = {}", r.decay),
                    points: f(r).iter().enumerate().map(|(i, &v)| (i as f64 + 1.0, v)).collect(),
                })
                .collect()
        };
        write_atomic(
            &cfg.out.join("convergence.svg"),
            svg_line_plot("Normalized convergence", "iteration", "F(ξ)", &curves(&|r| &r.convergence)).as_bytes(),
        )?;
        write_atomic(
            &cfg.out.join("eta.svg"),
            svg_line_plot("Convergence efficiency", "iteration", "η", &curves(&|r| &r.eta)).as_bytes(),
        )?;
    }
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub ga_seed: u64,
    pub final_enhancement: f64,
    pub final_digitized: u32,
    pub max_enhancement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatOutcome {
    pub seed: u64,
    pub iterations: u64,
    pub alpha: f64,
    pub records: Vec<RepeatRecord>,
    pub mean: f64,
    pub std_dev: f64,
    /// Population standard deviation over mean of the final enhancements.
    pub cv: f64,
}

impl RepeatOutcome {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("repeat,ga_seed,final_enhancement,final_digitized,max_enhancement\n");
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.repeat, r.ga_seed, r.final_enhancement, r.final_digitized, r.max_enhancement
            );
        }
        s
    }
}

/// Mean, population standard deviation and their ratio.
pub fn coefficient_of_variation(values: &[f64]) -> (f64, f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    (mean, sd, if mean != 0.0 { sd / mean } else { f64::NAN })
}

/// Restarts the GA `repeats` times from fresh populations. With `alpha > 0`
/// the medium drifts between repeats; the detector keeps its initial
/// calibration.
pub fn repeat(cfg: &ExperimentConfig) -> Result<RepeatOutcome> {
    if cfg.repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    let run_cfg = ExperimentConfig { iterations: cfg.repeat_iterations, early_stop: None, ..cfg.clone() };
    let setup = Setup::new(&run_cfg)?;
    let mut setups = vec![setup.clone()];
    if cfg.alpha > 0.0 {
        let mut rng = RandomSource::from_seed(cfg.decorrelation_seed());
        for _ in 1..cfg.repeats {
            let prev = setups.last().expect("nonempty");
            let medium = prev.medium.decorrelate(cfg.alpha, &mut rng)?;
            let baseline = measure_baseline(&run_cfg, &medium)?;
            setups.push(Setup { medium, baseline, ..setup.clone() });
        }
    } else {
        setups.resize(cfg.repeats, setup);
    }
    let one = |(i, s): (usize, &Setup)| -> Result<RepeatRecord> {
        let o = run_on(&run_cfg, s, i as u64)?;
        let last = o.trace.records.last().expect("nonempty trace");
        Ok(RepeatRecord {
            repeat: i,
            ga_seed: run_cfg.ga_seed(i as u64),
            final_enhancement: last.enhancement,
            final_digitized: last.best_digitized,
            max_enhancement: o.summary.max_enhancement,
        })
    };
    let records: Vec<RepeatRecord> = if cfg.parallel {
        setups.par_iter().enumerate().map(one).collect::<Result<_>>()?
    } else {
        setups.iter().enumerate().map(one).collect::<Result<_>>()?
    };
    let finals: Vec<f64> = records.iter().map(|r| r.final_enhancement).collect();
    let (mean, std_dev, cv) = coefficient_of_variation(&finals);
    Ok(RepeatOutcome {
        seed: cfg.seed,
        iterations: cfg.repeat_iterations,
        alpha: cfg.alpha,
        records,
        mean,
        std_dev,
        cv,
    })
}

/// Writes `repeats.csv` and `repeats.json` into `cfg.out`.
pub fn repeat_to_dir(cfg: &ExperimentConfig) -> Result<RepeatOutcome> {
    let outcome = repeat(cfg)?;
    write_atomic(&cfg.out.join("repeats.csv"), outcome.to_csv().as_bytes())?;
    let mut json = serde_json::to_string_pretty(&outcome).expect("repeat outcome serializes");
    json.push('\n');
    write_atomic(&cfg.out.join("repeats.json"), json.as_bytes())?;
    Ok(outcome)
}

/// Recomputes the run summary from a trace file.
pub fn analyze(path: &Path, seed: Option<u64>) -> Result<RunSummary> {
    let text = read_text(path)?;
    let trace = trace_from_csv(&text, &path.display().to_string())?;
    RunSummary::from_trace(&trace, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    #[serde(flatten)]
    pub report: TimingReport,
    pub reference_profile: String,
    /// Per-iteration speedup over the reference using nominal figures.
    pub nominal_speedup: f64,
    /// Per-iteration speedup over the reference using the modeled pipeline.
    pub modeled_speedup: f64,
}

impl TimingSummary {
    pub fn table(&self) -> String {
        let r = &self.report;
        let rows = [
            ("profile", r.profile.clone()),
            ("iterations", r.iterations.to_string()),
            ("offspring (µs)", format!("{}", r.per_offspring_us)),
            ("iteration (ms)", format!("{}", r.per_iteration_ms)),
            ("iteration, nominal (ms)", format!("{}", r.nominal_per_iteration_ms)),
            ("total (s)", format!("{}", r.total_s)),
            ("total, nominal (s)", format!("{}", r.nominal_total_s)),
            ("measurement rate (Hz)", format!("{:.1}", r.measurement_rate_hz)),
            (
                "speedup vs reference",
                format!("{} nominal, {:.2} modeled ({})", self.nominal_speedup, self.modeled_speedup, self.reference_profile),
            ),
        ];
        let w = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
        let mut s = String::new();
        for (k, v) in rows {
            let _ = writeln!(s, "{k:<w$}  {v}");
        }
        s
    }
}

/// Timing of `profile` (name or file) over `iterations`, with speedups over
/// the PC reference.
pub fn timing_report(profile: &str, iterations: u64) -> Result<TimingSummary> {
    let p = load_profile(profile)?;
    p.validate()?;
    let reference = HardwareProfile::pc_matlab();
    Ok(TimingSummary {
        report: p.report(iterations),
        nominal_speedup: speedup(reference.nominal_iteration_time(), p.nominal_iteration_time())?,
        modeled_speedup: speedup(reference.iteration_time(), p.iteration_time())?,
        reference_profile: reference.name,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub noise_relative: f64,
    pub finals: Vec<f64>,
    pub mean_final: f64,
}

/// Final enhancement at each relative noise level in `cfg.noise_levels`,
/// over `seeds` independent media. The same seeds are used at every level.
pub fn noise_study(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<Vec<NoisePoint>> {
    cfg.noise_levels
        .iter()
        .map(|&level| {
            let finals = seeds
                .iter()
                .map(|&seed| {
                    let c = ExperimentConfig { seed, noise_sigma: 0.0, noise_relative: level, ..cfg.clone() };
                    Ok(run_experiment(&c)?.summary.final_enhancement)
                })
                .collect::<Result<Vec<_>>>()?;
            let mean_final = finals.iter().sum::<f64>() / finals.len().max(1) as f64;
            Ok(NoisePoint { noise_relative: level, finals, mean_final })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            n_outputs: 16,
            n_modes: 64,
            iterations: 60,
            repeat_iterations: 30,
            repeats: 3,
            headroom: 16.0,
            ..Default::default()
        }
    }

    #[test]
    fn single_iteration_run() {
        let cfg = ExperimentConfig { iterations: 1, ..small() };
        let o = run_experiment(&cfg).unwrap();
        assert_eq!(o.trace.records.len(), 1);
        assert_eq!(o.summary.optimal_stop, 1);
        assert_eq!(o.summary.max_eta, 0.0);
        assert_eq!(o.summary.total_measurements, 48);
    }

    #[test]
    fn summary_survives_csv() {
        let cfg = ExperimentConfig { profile: Some("virtex5".into()), ..small() };
        let o = run_experiment(&cfg).unwrap();
        let back = trace_from_csv(&trace_to_csv(&o.trace), "t").unwrap();
        assert_eq!(RunSummary::from_trace(&back, Some(cfg.seed)).unwrap(), o.summary);
        assert!(o.summary.model_time_at_optimal_stop_us.is_some());
    }

    #[test]
    fn sweep_duplicates_are_identical() {
        let cfg = ExperimentConfig { decays: vec![80.0, 80.0], ..small() };
        let s = sweep(&cfg).unwrap();
        assert_eq!(s.runs[0].outcome.trace, s.runs[1].outcome.trace);
        let csv = s.comparison_csv();
        assert!(csv.starts_with("iteration,F_d80_0,eta_d80_0,F_d80_1,eta_d80_1\n"));
    }

    #[test]
    fn sweep_normalizes_across_runs() {
        let cfg = ExperimentConfig { decays: vec![5.0, 1000.0], ..small() };
        let s = sweep(&cfg).unwrap();
        let peak = s
            .runs
            .iter()
            .flat_map(|r| r.convergence.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(peak, 1.0);
        for r in &s.runs {
            assert!(r.convergence.iter().all(|&f| f <= 1.0));
        }
    }

    #[test]
    fn singleton_sweep_matches_run() {
        let cfg = ExperimentConfig { decays: vec![80.0], ..small() };
        let s = sweep(&cfg).unwrap();
        assert_eq!(s.runs[0].outcome.trace, run_experiment(&cfg).unwrap().trace);
    }

    #[test]
    fn repeats() {
        let one = repeat(&ExperimentConfig { repeats: 1, ..small() }).unwrap();
        assert_eq!(one.cv, 0.0);
        let three = repeat(&small()).unwrap();
        assert_eq!(three.records.len(), 3);
        assert_ne!(three.records[0].ga_seed, three.records[1].ga_seed);
        let par = repeat(&ExperimentConfig { parallel: true, ..small() }).unwrap();
        assert_eq!(par, three);
        let drift = repeat(&ExperimentConfig { alpha: 1.0, ..small() }).unwrap();
        assert_eq!(drift.records.len(), 3);
        assert!(drift.records.iter().all(|r| r.final_enhancement > 1.0));
    }

    #[test]
    fn cv_cases() {
        assert_eq!(coefficient_of_variation(&[4.0]).2, 0.0);
        let (m, sd, cv) = coefficient_of_variation(&[1.0, 3.0]);
        assert_eq!((m, sd, cv), (2.0, 1.0, 0.5));
    }

    #[test]
    fn timing_summary() {
        let t = timing_report("virtex5", 2000).unwrap();
        assert_eq!(t.nominal_speedup, 150.0);
        assert_eq!(t.report.nominal_per_iteration_ms, 8.0);
        let zero = timing_report("virtex5", 0).unwrap();
        assert_eq!(zero.report.total_s, HardwareProfile::virtex5().init.as_secs_f64());
        let err = timing_report("nope", 1).unwrap_err();
        assert!(err.to_string().contains("ultrascale-plus"));
        assert!(t.table().contains("150 nominal"));
    }
}
