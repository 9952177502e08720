//! Predictable plug-in e-processes for one-sided mean tests on `[0, 1]`.
//!
//! Each arm carries two test supermartingales built from factors
//! `1 + λ (X − ξ)`:
//!
//! * the *minus* process bets `λ ≥ 0` and grows when the mean exceeds `ξ`,
//!   giving evidence against `H⁻: μ ≤ ξ` (the arm is good);
//! * the *plus* process bets `λ ≤ 0` and grows when the mean is below `ξ`,
//!   giving evidence against `H⁺: μ > ξ` (the arm is bad).
//!
//! The betting fraction for the next observation is computed from the running
//! mean of the observations already seen, clamped so that every factor is at
//! least `1 − b`. Evidence is tracked as a natural log; it routinely grows far
//! past what a product of `f64` factors can represent.
//!
//! By Ville's inequality a nonnegative supermartingale starting at 1 crosses
//! `1/δ` with probability at most `δ` under its null, at any stopping time.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Default truncation constant.
pub const DEFAULT_TRUNCATION: f64 = 0.98;

/// Default weight of the pseudo-observation at `ξ` in the plug-in mean.
pub const DEFAULT_PRIOR_WEIGHT: f64 = 1.0;

/// Betting fraction for the good-arm test: `min(b/ξ, max((μ̂ − ξ)/(ξ(1 − ξ)), 0))`.
#[inline]
pub fn lambda_minus(mean_estimate: f64, threshold: f64, truncation: f64) -> f64 {
    let raw = (mean_estimate - threshold) / (threshold * (1.0 - threshold));
    (truncation / threshold).min(raw.max(0.0))
}

/// Betting fraction for the bad-arm test: `min(0, max((μ̂ − ξ)/(ξ(1 − ξ)), −b/(1 − ξ)))`.
#[inline]
pub fn lambda_plus(mean_estimate: f64, threshold: f64, truncation: f64) -> f64 {
    let raw = (mean_estimate - threshold) / (threshold * (1.0 - threshold));
    0.0f64.min(raw.max(-truncation / (1.0 - threshold)))
}

/// How the betting fractions are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ScheduleKind {
    /// Plug in the running mean of the arm's past rewards.
    PredictablePlugin,
    /// Plug in a known mean; both fractions stay fixed for the lifetime of the arm.
    OracleFixed { mean: f64 },
}

/// Betting schedule with its truncation constant and threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaSchedule {
    kind: ScheduleKind,
    truncation: f64,
    threshold: f64,
    prior_weight: f64,
}

impl LambdaSchedule {
    pub fn new(kind: ScheduleKind, truncation: f64, threshold: f64) -> Result<Self> {
        if !(truncation > 0.0 && truncation < 1.0) {
            return Err(invalid(
                "b",
                format!("truncation must lie in (0, 1), got {truncation}"),
            ));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(invalid(
                "xi",
                format!("threshold must lie in (0, 1), got {threshold}"),
            ));
        }
        if let ScheduleKind::OracleFixed { mean } = kind {
            if !(0.0..=1.0).contains(&mean) {
                return Err(invalid(
                    "means",
                    format!("oracle mean {mean} is outside [0, 1]"),
                ));
            }
        }
        Ok(Self {
            kind,
            truncation,
            threshold,
            prior_weight: DEFAULT_PRIOR_WEIGHT,
        })
    }

    /// Sets how many pseudo-observations at `ξ` the plug-in mean starts from.
    /// With weight `w` the mean after `N` rewards is `(wξ + ΣX)/(w + N)`; zero
    /// gives the raw sample mean, read as `ξ` before the first reward.
    pub fn with_prior_weight(mut self, weight: f64) -> Result<Self> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(invalid(
                "prior_weight",
                format!("must be finite and nonnegative, got {weight}"),
            ));
        }
        self.prior_weight = weight;
        Ok(self)
    }

    pub fn plugin(truncation: f64, threshold: f64) -> Result<Self> {
        Self::new(ScheduleKind::PredictablePlugin, truncation, threshold)
    }

    pub fn oracle(mean: f64, truncation: f64, threshold: f64) -> Result<Self> {
        Self::new(ScheduleKind::OracleFixed { mean }, truncation, threshold)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn truncation(&self) -> f64 {
        self.truncation
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn prior_weight(&self) -> f64 {
        self.prior_weight
    }

    /// Plug-in mean after `pulls` rewards summing to `sum`.
    #[inline]
    pub fn plugin_mean(&self, sum: f64, pulls: u64) -> f64 {
        let w = self.prior_weight;
        let n = w + pulls as f64;
        if n > 0.0 {
            (w * self.threshold + sum) / n
        } else {
            self.threshold
        }
    }

    /// `(λ⁻, λ⁺)` to use for the next observation given the current running mean.
    #[inline]
    pub fn fractions(&self, running_mean: f64) -> (f64, f64) {
        let plug = match self.kind {
            ScheduleKind::PredictablePlugin => running_mean,
            ScheduleKind::OracleFixed { mean } => mean,
        };
        (
            lambda_minus(plug, self.threshold, self.truncation),
            lambda_plus(plug, self.threshold, self.truncation),
        )
    }
}

/// Outcome of testing one arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestDecision {
    None,
    /// `H⁻` rejected: label the arm good.
    RejectBadNull,
    /// `H⁺` rejected: label the arm bad.
    RejectGoodNull,
}

/// Rejection level `log(2K/δ)`: a union bound over two tests per arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionThreshold {
    log_level: f64,
}

impl RejectionThreshold {
    pub fn new(num_arms: usize, delta: f64) -> Result<Self> {
        if num_arms == 0 {
            return Err(invalid("k", "need at least one arm"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(
                "delta",
                format!("delta must lie in (0, 1), got {delta}"),
            ));
        }
        Ok(Self {
            log_level: (2.0 * num_arms as f64).ln() - delta.ln(),
        })
    }

    /// Threshold on a single e-process, `log(1/δ)`.
    pub fn single(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid(
                "delta",
                format!("delta must lie in (0, 1), got {delta}"),
            ));
        }
        Ok(Self {
            log_level: -delta.ln(),
        })
    }

    pub fn from_log(log_level: f64) -> Self {
        Self { log_level }
    }

    pub fn log_level(&self) -> f64 {
        self.log_level
    }
}

/// Log-domain evidence for one arm against both one-sided nulls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceState {
    log_e_minus: f64,
    log_e_plus: f64,
    pulls: u64,
    running_sum: f64,
    running_mean: f64,
    schedule: LambdaSchedule,
}

impl EvidenceState {
    pub fn new(schedule: LambdaSchedule) -> Self {
        Self {
            log_e_minus: 0.0,
            log_e_plus: 0.0,
            pulls: 0,
            running_sum: 0.0,
            // an unpulled arm reads as sitting exactly on the threshold
            running_mean: schedule.threshold(),
            schedule,
        }
    }

    pub fn log_e_minus(&self) -> f64 {
        self.log_e_minus
    }

    pub fn log_e_plus(&self) -> f64 {
        self.log_e_plus
    }

    pub fn pulls(&self) -> u64 {
        self.pulls
    }

    pub fn running_sum(&self) -> f64 {
        self.running_sum
    }

    /// Plug-in mean of the rewards seen so far; `ξ` before the first one.
    pub fn running_mean(&self) -> f64 {
        self.running_mean
    }

    pub fn schedule(&self) -> &LambdaSchedule {
        &self.schedule
    }

    /// Fractions that will be applied to the next observation.
    pub fn next_fractions(&self) -> (f64, f64) {
        self.schedule.fractions(self.running_mean)
    }

    /// Incorporates one reward. The bet is fixed before `x` is seen.
    #[inline]
    pub fn update(&mut self, x: f64) {
        debug_assert!((0.0..=1.0).contains(&x));
        let (lm, lp) = self.next_fractions();
        let centered = x - self.schedule.threshold();
        self.log_e_minus += (lm * centered).ln_1p();
        self.log_e_plus += (lp * centered).ln_1p();
        self.pulls += 1;
        self.running_sum += x;
        self.running_mean = self.schedule.plugin_mean(self.running_sum, self.pulls);
    }

    /// Back to `E = 1`, no pulls, mean at the threshold.
    pub fn reset(&mut self) {
        *self = Self::new(self.schedule);
    }

    /// Good when `E⁻ ≥ 2K/δ`, otherwise bad when `E⁺ > 2K/δ`.
    #[inline]
    pub fn decide(&self, threshold: &RejectionThreshold) -> TestDecision {
        if self.log_e_minus >= threshold.log_level() {
            TestDecision::RejectBadNull
        } else if self.log_e_plus > threshold.log_level() {
            TestDecision::RejectGoodNull
        } else {
            TestDecision::None
        }
    }

    #[cfg(test)]
    pub(crate) fn with_log_evidence(mut self, log_e_minus: f64, log_e_plus: f64) -> Self {
        self.log_e_minus = log_e_minus;
        self.log_e_plus = log_e_plus;
        self
    }
}
