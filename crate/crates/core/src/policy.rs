//! Arm-selection rules restricted to the set of still-unlabeled arms.

use serde::{Deserialize, Serialize};

use crate::engine::RunTrace;
use crate::error::{invalid, Error, Result};
use crate::reward::BanditInstance;

/// Default exploration parameter for MOSS and LUCB-G.
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Sampling policy and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum PolicyKind {
    /// Anytime MOSS restricted to unlabeled arms.
    Moss {
        alpha: f64,
    },
    Ucb,
    Hdoc,
    LucbG {
        alpha: f64,
    },
    AptG,
    /// Pulls the unlabeled arm with the largest true mean.
    Oracle,
}

impl PolicyKind {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Moss { .. } => "moss",
            PolicyKind::Ucb => "ucb",
            PolicyKind::Hdoc => "hdoc",
            PolicyKind::LucbG { .. } => "lucb_g",
            PolicyKind::AptG => "apt_g",
            PolicyKind::Oracle => "oracle",
        }
    }

    /// Parses a policy name; `alpha` is used by `moss` and `lucb_g`.
    pub fn from_name(name: &str, alpha: f64) -> Result<Self> {
        let kind = match name {
            "moss" => PolicyKind::Moss { alpha },
            "ucb" => PolicyKind::Ucb,
            "hdoc" => PolicyKind::Hdoc,
            "lucb_g" => PolicyKind::LucbG { alpha },
            "apt_g" => PolicyKind::AptG,
            "oracle" => PolicyKind::Oracle,
            other => {
                return Err(invalid(
                    "policy",
                    format!(
                    "unknown policy `{other}` (expected moss, ucb, hdoc, lucb_g, apt_g, oracle)"
                ),
                ))
            }
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PolicyKind::Moss { alpha } | PolicyKind::LucbG { alpha }
                if !(alpha > 0.0 && alpha.is_finite()) =>
            {
                Err(invalid(
                    "alpha",
                    format!("alpha must be positive, got {alpha}"),
                ))
            }
            _ => Ok(()),
        }
    }

    /// Whether every arm is pulled once before indices are used.
    pub fn needs_initialization(&self) -> bool {
        !matches!(self, PolicyKind::Oracle)
    }
}

/// Selection score of one arm at round `t`; larger is preferred.
///
/// APT-G minimizes `√N·|ξ − μ̂|`, so its score is the negated statistic.
/// `Oracle` is not index based and returns `mean`.
pub fn index(
    kind: &PolicyKind,
    t: u64,
    num_arms: usize,
    pulls: u64,
    mean: f64,
    threshold: f64,
) -> f64 {
    debug_assert!(pulls >= 1);
    let n = pulls as f64;
    let t = t as f64;
    let k = num_arms as f64;
    match *kind {
        PolicyKind::Moss { alpha } => {
            let bonus = (t / (k * n)).ln().max(0.0);
            mean + ((1.0 + alpha) / 2.0 * bonus / n).sqrt()
        }
        PolicyKind::Ucb => {
            let lt = t.ln();
            mean + ((1.0 + t * lt * lt).ln() / (2.0 * n)).sqrt()
        }
        PolicyKind::Hdoc => mean + (t.ln() / (2.0 * n)).sqrt(),
        PolicyKind::LucbG { alpha } => mean + ((4.0 * k * n * n / alpha).ln() / (2.0 * n)).sqrt(),
        PolicyKind::AptG => -(n.sqrt() * (threshold - mean).abs()),
        PolicyKind::Oracle => mean,
    }
}

/// Sufficient statistics for one sampling policy during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    kind: PolicyKind,
    pulls: Vec<u64>,
    sums: Vec<f64>,
    rounds: u64,
    threshold: f64,
    true_means: Vec<f64>,
}

impl PolicyState {
    pub fn new(kind: PolicyKind, instance: &BanditInstance) -> Result<Self> {
        kind.validate()?;
        let k = instance.num_arms();
        Ok(Self {
            kind,
            pulls: vec![0; k],
            sums: vec![0.0; k],
            rounds: 0,
            threshold: instance.threshold(),
            true_means: instance.means(),
        })
    }

    pub fn kind(&self) -> &PolicyKind {
        &self.kind
    }

    pub fn num_arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn pulls(&self, arm: usize) -> u64 {
        self.pulls[arm]
    }

    pub fn reward_sum(&self, arm: usize) -> f64 {
        self.sums[arm]
    }

    /// Number of observations so far; the next selection happens at round `rounds + 1`.
    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn mean_estimate(&self, arm: usize) -> f64 {
        match self.pulls[arm] {
            0 => self.threshold,
            n => self.sums[arm] / n as f64,
        }
    }

    /// Chooses the next arm among `unlabeled`.
    ///
    /// Index policies first pull any arm without observations, in index order.
    /// Otherwise the best score wins and ties go to the smallest arm index.
    pub fn select(&self, unlabeled: &[usize]) -> Result<usize> {
        if unlabeled.is_empty() {
            return Err(Error::NoUnlabeledArms);
        }
        if self.kind == PolicyKind::Oracle {
            return Ok(argmax_by(unlabeled, |a| self.true_means[a]));
        }
        if let Some(a) = unlabeled
            .iter()
            .copied()
            .filter(|&a| self.pulls[a] == 0)
            .min()
        {
            return Ok(a);
        }
        let t = self.rounds + 1;
        let k = self.num_arms();
        Ok(argmax_by(unlabeled, |a| {
            index(
                &self.kind,
                t,
                k,
                self.pulls[a],
                self.mean_estimate(a),
                self.threshold,
            )
        }))
    }

    pub fn observe(&mut self, arm: usize, x: f64) {
        self.pulls[arm] += 1;
        self.sums[arm] += x;
        self.rounds += 1;
    }

    /// Forgets everything observed on `arm`. The global round counter is kept.
    pub fn reset_arm(&mut self, arm: usize) {
        self.pulls[arm] = 0;
        self.sums[arm] = 0.0;
    }
}

fn argmax_by(candidates: &[usize], score: impl Fn(usize) -> f64) -> usize {
    let mut ordered = candidates.to_vec();
    ordered.sort_unstable();
    let mut best = ordered[0];
    let mut best_score = score(best);
    for &a in &ordered[1..] {
        let s = score(a);
        if s > best_score {
            best = a;
            best_score = s;
        }
    }
    best
}

/// Fraction of traces whose action at round `t` was not the best arm still
/// unlabeled at that round. Only traces that reached round `t` count; returns
/// `None` when there are none.
pub fn regret_anomaly_rate(
    traces: &[RunTrace],
    instance: &BanditInstance,
    t: u64,
) -> Result<Option<f64>> {
    assert!(t >= 1, "rounds are 1-based");
    let means = instance.means();
    let mut reached = 0usize;
    let mut anomalies = 0usize;
    for trace in traces {
        let actions = trace.actions.as_ref().ok_or(Error::MissingActionLog)?;
        let Some(&action) = actions.get((t - 1) as usize) else {
            continue;
        };
        // an arm labeled at round τ was still unlabeled when round τ was played
        let unlabeled: Vec<usize> = (0..means.len())
            .filter(|&a| trace.tau_arm[a].is_none_or(|tau| tau >= t))
            .collect();
        let best = argmax_by(&unlabeled, |a| means[a]);
        reached += 1;
        if means[action as usize] < means[best] {
            anomalies += 1;
        }
    }
    Ok((reached > 0).then(|| anomalies as f64 / reached as f64))
}
