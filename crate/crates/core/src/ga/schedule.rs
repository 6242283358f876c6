//! Mutation-rate schedules.
//!
//! Rates are applied as numerators over 2^15, the fixed-point format of the
//! hardware comparator; [`MutationSchedule::rate`] gives the exact real value.

use crate::error::{Error, Result};
use crate::rng::RATE_DENOMINATOR;

/// R(k) = (R0 − R_end)·exp(−k/D) + R_end
pub fn rate_exponential(k: u64, r0: f64, r_end: f64, decay: f64) -> f64 {
    (r0 - r_end) * (-(k as f64) / decay).exp() + r_end
}

/// R(k) = (κ_start − (k−1)·τ)/ε while that exceeds R_end, else R_end.
/// The numerator is evaluated in integers.
pub fn rate_linear_clamped(k: u64, kappa_start: u32, tau: u32, epsilon: u32, r_end: f64) -> f64 {
    let steps = k.saturating_sub(1) as i64;
    let numerator = i64::from(kappa_start) - steps * i64::from(tau);
    let r = numerator as f64 / f64::from(epsilon);
    if r > r_end {
        r
    } else {
        r_end
    }
}

/// Rounds a rate in [0, 1] to the nearest 2^-15 step.
pub fn rate_to_numerator(rate: f64) -> u32 {
    (rate.clamp(0.0, 1.0) * f64::from(RATE_DENOMINATOR)).round() as u32
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MutationSchedule {
    Exponential { r0: f64, r_end: f64, decay: f64 },
    LinearClamped {
        kappa_start: u32,
        tau: u32,
        epsilon: u32,
        r_end: f64,
    },
    Constant { rate: f64 },
}

impl MutationSchedule {
    pub fn exponential(r0: f64, r_end: f64, decay: f64) -> Result<Self> {
        check_rates(r0, r_end)?;
        if !(decay > 0.0 && decay.is_finite()) {
            return Err(Error::invalid(format!("decay factor must be positive, got {decay}")));
        }
        Ok(Self::Exponential { r0, r_end, decay })
    }

    pub fn linear_clamped(kappa_start: u32, tau: u32, epsilon: u32, r_end: f64) -> Result<Self> {
        if epsilon == 0 {
            return Err(Error::invalid("epsilon must be positive"));
        }
        check_rates(f64::from(kappa_start) / f64::from(epsilon), r_end)?;
        Ok(Self::LinearClamped {
            kappa_start,
            tau,
            epsilon,
            r_end,
        })
    }

    pub fn constant(rate: f64) -> Result<Self> {
        check_rates(rate, rate)?;
        Ok(Self::Constant { rate })
    }

    /// Exponential schedule with R0 = 0.06, R_end = 0.012.
    pub fn default_exponential(decay: f64) -> Self {
        Self::Exponential {
            r0: 0.06,
            r_end: 0.012,
            decay,
        }
    }

    /// Linear schedule with κ_start = 2000, τ = 12, ε = 2^15, R_end = 0.012.
    pub fn hardware_linear() -> Self {
        Self::LinearClamped {
            kappa_start: 2000,
            tau: 12,
            epsilon: RATE_DENOMINATOR,
            r_end: 0.012,
        }
    }

    /// Index of the first rate: 0 for the exponential and constant forms,
    /// 1 for the linear form.
    pub fn first_index(&self) -> u64 {
        match self {
            Self::LinearClamped { .. } => 1,
            _ => 0,
        }
    }

    /// Rate at schedule index `k`.
    pub fn rate(&self, k: u64) -> f64 {
        match *self {
            Self::Exponential { r0, r_end, decay } => rate_exponential(k, r0, r_end, decay),
            Self::LinearClamped {
                kappa_start,
                tau,
                epsilon,
                r_end,
            } => rate_linear_clamped(k.max(1), kappa_start, tau, epsilon, r_end),
            Self::Constant { rate } => rate,
        }
    }

    /// Fixed-point numerator of [`Self::rate`].
    pub fn rate_numerator(&self, k: u64) -> u32 {
        rate_to_numerator(self.rate(k))
    }

    /// Rate used during GA iteration `iteration` (1-based); iteration 1 always
    /// runs at R0.
    pub fn rate_for_iteration(&self, iteration: u64) -> f64 {
        self.rate(iteration.saturating_sub(1) + self.first_index())
    }

    pub fn rate_numerator_for_iteration(&self, iteration: u64) -> u32 {
        rate_to_numerator(self.rate_for_iteration(iteration))
    }

    pub fn r0(&self) -> f64 {
        self.rate(self.first_index())
    }

    pub fn r_end(&self) -> f64 {
        match *self {
            Self::Exponential { r_end, .. } | Self::LinearClamped { r_end, .. } => r_end,
            Self::Constant { rate } => rate,
        }
    }
}

fn check_rates(r0: f64, r_end: f64) -> Result<()> {
    if !(r_end > 0.0 && r_end <= r0 && r0 <= 1.0) {
        return Err(Error::invalid(format!(
            "rates must satisfy 0 < R_end <= R0 <= 1, got R0={r0}, R_end={r_end}"
        )));
    }
    Ok(())
}
