//! Genetic algorithm over binary masks.
//!
//! One iteration produces `M` offspring: rank-weighted parent selection,
//! uniform crossover, then mutation at the scheduled rate. All random material
//! for an iteration is drawn serially before any fitness is evaluated, so the
//! trace does not depend on whether evaluation runs in parallel.

mod schedule;

use std::time::Duration;

use rayon::prelude::*;

pub use schedule::{rate_exponential, rate_linear_clamped, rate_to_numerator, MutationSchedule};

use crate::bits::Mask;
use crate::error::{Error, Result};
use crate::medium::{DetectorModel, TransmissionMatrix};
use crate::metrics::{EnhancementSource, RunTrace, TraceRecord};
use crate::rng::{RandomSource, RATE_DENOMINATOR};
use crate::timing::HardwareProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Replacement {
    /// Drop the worst `M` parents and insert every offspring.
    ReplaceWorst,
    /// Keep the best `P` of parents and offspring together.
    ElitistMerge,
}

impl std::str::FromStr for Replacement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replace-worst" => Ok(Self::ReplaceWorst),
            "elitist-merge" => Ok(Self::ElitistMerge),
            _ => Err(Error::Config(format!(
                "unknown replacement {s:?} (replace-worst | elitist-merge)"
            ))),
        }
    }
}

impl std::fmt::Display for Replacement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ReplaceWorst => "replace-worst",
            Self::ElitistMerge => "elitist-merge",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MutationMode {
    /// Selected modes are re-drawn as fair coins.
    Redraw,
    /// Selected modes are inverted.
    Flip,
}

impl std::str::FromStr for MutationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "redraw" => Ok(Self::Redraw),
            "flip" => Ok(Self::Flip),
            _ => Err(Error::Config(format!("unknown mutation mode {s:?} (redraw | flip)"))),
        }
    }
}

impl std::fmt::Display for MutationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Redraw => "redraw",
            Self::Flip => "flip",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub offspring_per_iteration: usize,
    pub n_modes: usize,
    pub schedule: MutationSchedule,
    pub replacement: Replacement,
    pub mutation: MutationMode,
    pub max_iterations: u64,
    /// Stop after this iteration if it comes before `max_iterations`.
    pub early_stop: Option<u64>,
    /// Evaluate offspring intensities on the rayon pool.
    pub parallel: bool,
}

impl GaConfig {
    /// 1024 modes, P = 32, M = 16, replace-worst, exponential schedule with
    /// R0 = 0.06, R_end = 0.012 and the given decay factor, 2000 iterations.
    pub fn simulation(decay: f64) -> Self {
        Self {
            population_size: 32,
            offspring_per_iteration: 16,
            n_modes: 1024,
            schedule: MutationSchedule::default_exponential(decay),
            replacement: Replacement::ReplaceWorst,
            mutation: MutationMode::Redraw,
            max_iterations: 2000,
            early_stop: None,
            parallel: false,
        }
    }

    /// 64×64 modes, P = M = 16, elitist merge, linear fixed-point schedule,
    /// 2000 iterations.
    pub fn hardware_parity() -> Self {
        Self {
            population_size: 16,
            offspring_per_iteration: 16,
            n_modes: 64 * 64,
            schedule: MutationSchedule::hardware_linear(),
            replacement: Replacement::ElitistMerge,
            mutation: MutationMode::Redraw,
            max_iterations: 2000,
            early_stop: None,
            parallel: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("population needs at least 2 members"));
        }
        if self.offspring_per_iteration == 0 || self.offspring_per_iteration > self.population_size {
            return Err(Error::invalid(format!(
                "offspring per iteration must be in 1..={}, got {}",
                self.population_size, self.offspring_per_iteration
            )));
        }
        if self.n_modes == 0 {
            return Err(Error::invalid("n_modes must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        if self.early_stop == Some(0) {
            return Err(Error::invalid("early stop iteration must be positive"));
        }
        Ok(())
    }

    /// Iterations actually executed.
    pub fn iterations(&self) -> u64 {
        self.early_stop
            .map_or(self.max_iterations, |s| s.min(self.max_iterations))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub mask: Mask,
    /// Detector reading taken when the mask was displayed.
    pub fitness: Option<u32>,
    /// Noise-free target intensity, kept for diagnostics.
    pub intensity: f64,
    /// Iterations survived.
    pub age: u32,
}

impl Individual {
    fn score(&self) -> u32 {
        self.fitness.unwrap_or(0)
    }
}

/// Members sorted by fitness, best first; equal fitness keeps insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    members: Vec<Individual>,
    capacity: usize,
}

impl Population {
    pub fn from_members(mut members: Vec<Individual>, capacity: usize) -> Self {
        rank(&mut members);
        Self { members, capacity }
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn best(&self) -> &Individual {
        &self.members[0]
    }

    fn replace(&mut self, offspring: Vec<Individual>, strategy: Replacement) {
        for m in &mut self.members {
            m.age += 1;
        }
        match strategy {
            Replacement::ReplaceWorst => {
                self.members.truncate(self.capacity - offspring.len());
                self.members.extend(offspring);
                rank(&mut self.members);
            }
            Replacement::ElitistMerge => {
                self.members.extend(offspring);
                rank(&mut self.members);
                self.members.truncate(self.capacity);
            }
        }
    }
}

fn rank(members: &mut [Individual]) {
    // stable: ties keep lower index first
    members.sort_by(|a, b| b.score().cmp(&a.score()));
}

/// Picks two distinct members by rank weight: rank r (1 = best) of P has
/// weight P − r + 1. The second draw excludes the first. Returns indices.
pub fn select_parents(pop: &Population, rng: &mut RandomSource) -> Result<(usize, usize)> {
    let n = pop.len();
    if n < 2 {
        return Err(Error::InvalidState(format!(
            "parent selection needs at least 2 members, have {n}"
        )));
    }
    let weight = |i: usize| (n - i) as u64;
    let total = (n as u64) * (n as u64 + 1) / 2;
    let pick = |mut u: u64, skip: Option<usize>| {
        for i in 0..n {
            if Some(i) == skip {
                continue;
            }
            if u < weight(i) {
                return i;
            }
            u -= weight(i);
        }
        unreachable!("draw exceeds total weight")
    };
    let first = pick(rng.uniform_below(total)?, None);
    let second = pick(rng.uniform_below(total - weight(first))?, Some(first));
    Ok((first, second))
}

/// Uniform crossover: a fresh random template picks `a` where set, `b`
/// elsewhere.
pub fn crossover(a: &Mask, b: &Mask, rng: &mut RandomSource) -> Result<Mask> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "crossover of masks with {} and {} modes",
            a.len(),
            b.len()
        )));
    }
    let template = rng.next_bits(a.len());
    Ok(a.blend(b, &template))
}

/// Selects each mode with probability `rate_num / 2^15`, then re-draws or
/// inverts the selected modes.
pub fn mutate(
    mask: &Mask,
    rate_num: u32,
    mode: MutationMode,
    rng: &mut RandomSource,
) -> Result<Mask> {
    let selected = rng.bernoulli_select(mask.len(), rate_num)?;
    Ok(match mode {
        MutationMode::Redraw => {
            let fresh = rng.next_bits(mask.len());
            fresh.blend(mask, &selected)
        }
        MutationMode::Flip => mask.xor(&selected),
    })
}

/// Outcome of one iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationResult {
    pub iteration: u64,
    pub best_fitness: u32,
    pub best_intensity: f64,
    pub mutation_rate_num: u32,
    pub measurements: u64,
}

pub struct GaEngine<'a> {
    cfg: GaConfig,
    medium: &'a TransmissionMatrix,
    detector: DetectorModel,
    rng: RandomSource,
    population: Population,
    iteration: u64,
    measurements: u64,
}

impl<'a> GaEngine<'a> {
    /// Validates the setup, then draws, measures and ranks the initial
    /// population.
    pub fn new(
        cfg: GaConfig,
        medium: &'a TransmissionMatrix,
        detector: DetectorModel,
        mut rng: RandomSource,
    ) -> Result<Self> {
        cfg.validate()?;
        detector.validate()?;
        if medium.n_modes() != cfg.n_modes {
            return Err(Error::invalid(format!(
                "config has {} modes, medium has {}",
                cfg.n_modes,
                medium.n_modes()
            )));
        }
        let masks = (0..cfg.population_size)
            .map(|_| rng.random_mask(cfg.n_modes))
            .collect::<Result<Vec<_>>>()?;
        let members = evaluate(&cfg, medium, &detector, &mut rng, masks, 0)?;
        let population = Population::from_members(members, cfg.population_size);
        Ok(Self {
            measurements: cfg.population_size as u64,
            cfg,
            medium,
            detector,
            rng,
            population,
            iteration: 0,
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn measurements(&self) -> u64 {
        self.measurements
    }

    pub fn config(&self) -> &GaConfig {
        &self.cfg
    }

    pub fn rng(&self) -> &RandomSource {
        &self.rng
    }

    pub fn step(&mut self) -> Result<IterationResult> {
        let k = self.iteration + 1;
        let rate_num = self.cfg.schedule.rate_numerator_for_iteration(k);
        let mut children = Vec::with_capacity(self.cfg.offspring_per_iteration);
        for _ in 0..self.cfg.offspring_per_iteration {
            let (i, j) = select_parents(&self.population, &mut self.rng)?;
            let members = self.population.members();
            let child = crossover(&members[i].mask, &members[j].mask, &mut self.rng)?;
            children.push(mutate(&child, rate_num, self.cfg.mutation, &mut self.rng)?);
        }
        let offspring = evaluate(
            &self.cfg,
            self.medium,
            &self.detector,
            &mut self.rng,
            children,
            k,
        )?;
        self.population.replace(offspring, self.cfg.replacement);
        self.iteration = k;
        self.measurements += self.cfg.offspring_per_iteration as u64;
        let best = self.population.best();
        Ok(IterationResult {
            iteration: k,
            best_fitness: best.score(),
            best_intensity: best.intensity,
            mutation_rate_num: rate_num,
            measurements: self.measurements,
        })
    }
}

/// Intensities may be computed in parallel; readings are taken serially in
/// input order.
fn evaluate(
    cfg: &GaConfig,
    medium: &TransmissionMatrix,
    detector: &DetectorModel,
    rng: &mut RandomSource,
    masks: Vec<Mask>,
    iteration: u64,
) -> Result<Vec<Individual>> {
    let intensities: Vec<f64> = if cfg.parallel {
        masks
            .par_iter()
            .map(|m| medium.target_intensity(m))
            .collect::<Result<_>>()?
    } else {
        masks
            .iter()
            .map(|m| medium.target_intensity(m))
            .collect::<Result<_>>()?
    };
    masks
        .into_iter()
        .zip(intensities)
        .map(|(mask, intensity)| {
            let m = detector.measure(intensity, iteration, rng)?;
            Ok(Individual {
                mask,
                fitness: Some(m.digitized),
                intensity,
                age: 0,
            })
        })
        .collect()
}

/// Runs the GA to completion and records every iteration.
///
/// `baseline` is the pre-optimization mean intensity used for enhancement;
/// with a hardware profile attached, each record carries the modeled time
/// init + k × iteration time.
pub fn run(
    cfg: &GaConfig,
    medium: &TransmissionMatrix,
    detector: &DetectorModel,
    baseline: f64,
    profile: Option<&HardwareProfile>,
    rng: RandomSource,
) -> Result<RunTrace> {
    if !(baseline > 0.0) {
        return Err(Error::invalid(format!("baseline must be positive, got {baseline}")));
    }
    if let Some(p) = profile {
        p.validate()?;
    }
    let model_time = |k: u64| -> Option<Duration> { profile.map(|p| p.total_time(k)) };
    let mut engine = GaEngine::new(cfg.clone(), medium, *detector, rng)?;
    let best = engine.population().best();
    let initial = TraceRecord {
        iteration: 0,
        best_digitized: best.score(),
        best_intensity: best.intensity,
        enhancement: best.intensity / baseline,
        mutation_rate_num: 0,
        cum_measurements: engine.measurements(),
        model_time: model_time(0),
    };
    let n = cfg.iterations();
    let mut records = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let r = engine.step()?;
        records.push(TraceRecord {
            iteration: r.iteration,
            best_digitized: r.best_fitness,
            best_intensity: r.best_intensity,
            enhancement: r.best_intensity / baseline,
            mutation_rate_num: r.mutation_rate_num,
            cum_measurements: r.measurements,
            model_time: model_time(r.iteration),
        });
    }
    Ok(RunTrace {
        initial: Some(initial),
        records,
        baseline,
        n_g: None,
        enhancement_source: EnhancementSource::Intensity,
    })
}

/// Largest rate numerator accepted by [`mutate`].
pub const MAX_RATE_NUM: u32 = RATE_DENOMINATOR;
