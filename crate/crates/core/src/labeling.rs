//! Stopping rules that turn per-arm statistics into good/bad labels.

use serde::{Deserialize, Serialize};

use crate::eprocess::{
    EvidenceState, LambdaSchedule, RejectionThreshold, TestDecision, DEFAULT_PRIOR_WEIGHT,
};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingKind {
    /// Predictable plug-in e-processes at level `2K/δ`.
    Eprocess,
    /// Hoeffding-style bound `sqrt(log(4KN²/δ) / 2N)` around the empirical mean.
    ConfidenceBound,
    /// E-processes betting with the true arm mean.
    OracleEprocess,
}

impl StoppingKind {
    pub fn name(self) -> &'static str {
        match self {
            StoppingKind::Eprocess => "eprocess",
            StoppingKind::ConfidenceBound => "confidence_bound",
            StoppingKind::OracleEprocess => "oracle_eprocess",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "eprocess" => Ok(StoppingKind::Eprocess),
            "confidence_bound" => Ok(StoppingKind::ConfidenceBound),
            "oracle_eprocess" => Ok(StoppingKind::OracleEprocess),
            other => Err(invalid(
                "stopping",
                format!("unknown stopping rule `{other}` (expected eprocess, confidence_bound, oracle_eprocess)"),
            )),
        }
    }

    pub fn uses_evidence(self) -> bool {
        !matches!(self, StoppingKind::ConfidenceBound)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    kind: StoppingKind,
    delta: f64,
    num_arms: usize,
    truncation: f64,
    threshold: f64,
    prior_weight: f64,
    level: RejectionThreshold,
}

impl StoppingRule {
    pub fn new(
        kind: StoppingKind,
        delta: f64,
        num_arms: usize,
        truncation: f64,
        threshold: f64,
    ) -> Result<Self> {
        let level = RejectionThreshold::new(num_arms, delta)?;
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
        Ok(Self {
            kind,
            delta,
            num_arms,
            truncation,
            threshold,
            prior_weight: DEFAULT_PRIOR_WEIGHT,
            level,
        })
    }

    /// Pseudo-observation weight of the plug-in mean; see
    /// [`LambdaSchedule::with_prior_weight`].
    pub fn with_prior_weight(mut self, weight: f64) -> Result<Self> {
        LambdaSchedule::plugin(self.truncation, self.threshold)?.with_prior_weight(weight)?;
        self.prior_weight = weight;
        Ok(self)
    }

    pub fn prior_weight(&self) -> f64 {
        self.prior_weight
    }

    pub fn kind(&self) -> StoppingKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn level(&self) -> &RejectionThreshold {
        &self.level
    }

    /// Betting schedule for an arm whose true mean is `true_mean`, if this
    /// rule is e-process based.
    pub fn schedule_for(&self, true_mean: f64) -> Option<LambdaSchedule> {
        let sched = match self.kind {
            StoppingKind::Eprocess => LambdaSchedule::plugin(self.truncation, self.threshold)
                .and_then(|s| s.with_prior_weight(self.prior_weight)),
            StoppingKind::OracleEprocess => {
                LambdaSchedule::oracle(true_mean, self.truncation, self.threshold)
            }
            StoppingKind::ConfidenceBound => return None,
        };
        Some(sched.expect("parameters validated at construction"))
    }

    /// Radius `sqrt(log(4KN²/δ) / 2N)`.
    pub fn confidence_radius(&self, pulls: u64) -> f64 {
        let n = pulls as f64;
        ((4.0 * self.num_arms as f64 * n * n / self.delta).ln() / (2.0 * n)).sqrt()
    }

    /// Tests one arm after its latest observation.
    ///
    /// `pulls` and `mean` are the post-observation count and empirical mean.
    /// E-process rules read `evidence` and ignore the other two.
    pub fn judge(
        &self,
        pulls: u64,
        mean: f64,
        evidence: Option<&EvidenceState>,
    ) -> Result<TestDecision> {
        match self.kind {
            StoppingKind::ConfidenceBound => {
                if pulls == 0 {
                    return Err(invalid(
                        "pulls",
                        "confidence bound needs at least one observation",
                    ));
                }
                let radius = self.confidence_radius(pulls);
                Ok(if mean - radius > self.threshold {
                    TestDecision::RejectBadNull
                } else if mean + radius < self.threshold {
                    TestDecision::RejectGoodNull
                } else {
                    TestDecision::None
                })
            }
            StoppingKind::Eprocess | StoppingKind::OracleEprocess => {
                let ev = evidence
                    .ok_or_else(|| invalid("evidence", "e-process rule needs evidence state"))?;
                Ok(ev.decide(&self.level))
            }
        }
    }
}

/// Fewest pulls of one arm before its e-process can cross `2K/δ`.
///
/// Each factor is at most `1 + b·max(ξ/(1−ξ), (1−ξ)/ξ)`, so crossing needs at
/// least `log(2K/δ)` over the log of that many pulls. Never less than 1.
pub fn min_pulls_to_label(num_arms: usize, delta: f64, truncation: f64, threshold: f64) -> u64 {
    let level = (2.0 * num_arms as f64 / delta).ln();
    let ratio = (threshold / (1.0 - threshold)).max((1.0 - threshold) / threshold);
    let per_step = (truncation * ratio).ln_1p();
    let n = (level / per_step).ceil();
    if n.is_finite() && n > 1.0 {
        n as u64
    } else {
        1
    }
}
