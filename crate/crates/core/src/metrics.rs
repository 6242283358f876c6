//! Convergence metrics: decay ratio, enhancement, normalized convergence,
//! convergence efficiency and the stopping rule derived from it.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::MutationSchedule;

/// What the enhancement series is computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnhancementSource {
    /// Noise-free target intensity of the best-ranked mask (simulation only).
    Intensity,
    /// Detector reading of the best-ranked mask.
    Digitized,
}

/// State after one GA iteration (iteration 0 is the initial population).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub iteration: u64,
    pub best_digitized: u32,
    pub best_intensity: f64,
    pub enhancement: f64,
    pub mutation_rate_num: u32,
    pub cum_measurements: u64,
    pub model_time: Option<Duration>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    /// Record for the freshly ranked initial population, when known.
    pub initial: Option<TraceRecord>,
    /// One record per iteration, `iteration` running 1, 2, 3, ...
    pub records: Vec<TraceRecord>,
    /// Mean speckle intensity before optimization.
    pub baseline: f64,
    /// Iteration of the global optimum; `None` means the last iteration.
    pub n_g: Option<u64>,
    pub enhancement_source: EnhancementSource,
}

impl RunTrace {
    pub fn last_iteration(&self) -> u64 {
        self.records.last().map_or(0, |r| r.iteration)
    }

    pub fn enhancements(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.enhancement).collect()
    }

    pub fn record(&self, iteration: u64) -> Option<&TraceRecord> {
        let idx = usize::try_from(iteration.checked_sub(1)?).ok()?;
        self.records.get(idx).filter(|r| r.iteration == iteration)
    }

    pub fn final_enhancement(&self) -> Option<f64> {
        self.records.last().map(|r| r.enhancement)
    }

    /// The global-optimum iteration, falling back to the last iteration.
    pub fn effective_n_g(&self) -> Result<u64> {
        let last = self.last_iteration();
        if last == 0 {
            return Err(Error::invalid("trace has no iterations"));
        }
        let n_g = self.n_g.unwrap_or(last);
        if n_g == 0 || n_g > last {
            return Err(Error::invalid(format!("N_g = {n_g} outside 1..={last}")));
        }
        Ok(n_g)
    }

    /// Checks that iterations run 1, 2, ... without gaps and the baseline is
    /// positive.
    pub fn validate(&self) -> Result<()> {
        if !(self.baseline > 0.0) {
            return Err(Error::Numeric(format!("baseline {} is not positive", self.baseline)));
        }
        for (i, r) in self.records.iter().enumerate() {
            if r.iteration != i as u64 + 1 {
                return Err(Error::Numeric(format!(
                    "record {i} has iteration {}, expected {}",
                    r.iteration,
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// Υ_k = R_k − R_{k+1}.
pub fn decay_ratio(schedule: &MutationSchedule, k: u64) -> f64 {
    schedule.rate(k) - schedule.rate(k + 1)
}

/// ζ = best intensity / baseline.
pub fn enhancement(best_intensity: f64, baseline: f64) -> Result<f64> {
    if !(baseline > 0.0) {
        return Err(Error::invalid(format!("baseline must be positive, got {baseline}")));
    }
    Ok(best_intensity / baseline)
}

/// Reference enhancement for normalized convergence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    /// The trace's own maximum enhancement.
    SelfMax,
    /// A maximum taken across several runs.
    External(f64),
}

/// F(ξ)_k = ζ_k / ζ_ref for every record.
pub fn normalized_convergence(trace: &RunTrace, reference: Normalization) -> Result<Vec<f64>> {
    if trace.records.is_empty() {
        return Err(Error::invalid("trace has no iterations"));
    }
    let zeta_ref = match reference {
        Normalization::SelfMax => max_enhancement(trace),
        Normalization::External(z) => z,
    };
    if !(zeta_ref > 0.0) {
        return Err(Error::invalid(format!("reference enhancement {zeta_ref} is not positive")));
    }
    Ok(trace.records.iter().map(|r| r.enhancement / zeta_ref).collect())
}

pub fn max_enhancement(trace: &RunTrace) -> f64 {
    trace
        .records
        .iter()
        .map(|r| r.enhancement)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// η_k = ζ_k/ζ_{N_g} − k/N_g for k = 1..=N_g; element `k−1` holds η_k.
pub fn convergence_efficiency(trace: &RunTrace) -> Result<Vec<f64>> {
    let n_g = trace.effective_n_g()?;
    let zeta_g = trace
        .record(n_g)
        .ok_or_else(|| Error::Numeric(format!("no record for iteration {n_g}")))?
        .enhancement;
    if !(zeta_g > 0.0) {
        return Err(Error::Numeric(format!("enhancement at N_g is {zeta_g}")));
    }
    let n = n_g as f64;
    Ok(trace.records[..n_g as usize]
        .iter()
        .map(|r| r.enhancement / zeta_g - r.iteration as f64 / n)
        .collect())
}

/// Iteration maximizing η; ties go to the earliest iteration.
pub fn optimal_stop(trace: &RunTrace) -> Result<u64> {
    Ok(argmax_first(&convergence_efficiency(trace)?) as u64 + 1)
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
