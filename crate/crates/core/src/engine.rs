//! The good-arm identification loop.
//!
//! Each round the policy picks an unlabeled arm, the arm is sampled, and only
//! that arm is re-tested. A decision moves the arm into the good or bad set and
//! it is never pulled again. The run ends once `m` arms are labeled good, every
//! arm is labeled, or the round cap is hit.
//!
//! Index policies pull each arm once before using their indices. Those pulls
//! count as rounds `1..=K` and are tested like any other pull.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eprocess::{EvidenceState, TestDecision};
use crate::error::{invalid, Result};
use crate::labeling::{StoppingKind, StoppingRule};
use crate::policy::{PolicyKind, PolicyState};
use crate::reward::BanditInstance;
use crate::rng::{derive_seed, stream};

pub const DEFAULT_MAX_ROUNDS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmLabel {
    Good,
    Bad,
    Unlabeled,
}

impl ArmLabel {
    pub fn code(self) -> char {
        match self {
            ArmLabel::Good => 'G',
            ArmLabel::Bad => 'B',
            ArmLabel::Unlabeled => 'U',
        }
    }
}

/// Fully validated parameters for a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    instance: BanditInstance,
    policy: PolicyKind,
    stopping: StoppingRule,
    target_good: usize,
    reset_variant: bool,
    max_rounds: u64,
    log_actions: bool,
}

impl EngineConfig {
    /// Defaults: stop only when all arms are labeled, no resets, a cap of
    /// [`DEFAULT_MAX_ROUNDS`], and no action log.
    pub fn new(
        instance: BanditInstance,
        policy: PolicyKind,
        stopping: StoppingKind,
        delta: f64,
        truncation: f64,
    ) -> Result<Self> {
        policy.validate()?;
        let k = instance.num_arms();
        let stopping = StoppingRule::new(stopping, delta, k, truncation, instance.threshold())?;
        Ok(Self {
            instance,
            policy,
            stopping,
            target_good: k,
            reset_variant: false,
            max_rounds: DEFAULT_MAX_ROUNDS.max(k as u64),
            log_actions: false,
        })
    }

    pub fn with_target_good(mut self, m: usize) -> Result<Self> {
        if m == 0 || m > self.instance.num_arms() {
            return Err(invalid(
                "m",
                format!("must lie in [1, {}], got {m}", self.instance.num_arms()),
            ));
        }
        self.target_good = m;
        Ok(self)
    }

    pub fn with_max_rounds(mut self, max_rounds: u64) -> Result<Self> {
        if max_rounds < self.instance.num_arms() as u64 {
            return Err(invalid(
                "max_rounds",
                format!(
                    "must be at least K = {}, got {max_rounds}",
                    self.instance.num_arms()
                ),
            ));
        }
        self.max_rounds = max_rounds;
        Ok(self)
    }

    /// Pseudo-observation weight at `ξ` in the plug-in mean.
    pub fn with_prior_weight(mut self, weight: f64) -> Result<Self> {
        self.stopping = self.stopping.with_prior_weight(weight)?;
        Ok(self)
    }

    pub fn with_reset_variant(mut self, on: bool) -> Self {
        self.reset_variant = on;
        self
    }

    pub fn with_action_log(mut self, on: bool) -> Self {
        self.log_actions = on;
        self
    }

    pub fn instance(&self) -> &BanditInstance {
        &self.instance
    }

    pub fn policy(&self) -> &PolicyKind {
        &self.policy
    }

    pub fn stopping(&self) -> &StoppingRule {
        &self.stopping
    }

    pub fn target_good(&self) -> usize {
        self.target_good
    }

    pub fn reset_variant(&self) -> bool {
        self.reset_variant
    }

    pub fn max_rounds(&self) -> u64 {
        self.max_rounds
    }
}

/// Everything recorded about one run. Rounds are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub seed: u64,
    /// Rounds played before exit.
    pub rounds: u64,
    /// Round of the i-th good label.
    pub tau_good: Vec<u64>,
    /// Round at which each arm was labeled.
    pub tau_arm: Vec<Option<u64>>,
    /// Observations in the arm's test statistic when it was labeled.
    pub pulls_at_label: Vec<Option<u64>>,
    /// Round at which the run finished; `None` when truncated.
    pub tau_stop: Option<u64>,
    pub labels: Vec<ArmLabel>,
    /// Total pulls per arm over the whole run.
    pub pulls: Vec<u64>,
    pub cumulative_reward: f64,
    /// `Σ_{t ≤ τ_G1} (max_a μ_a − μ_{A_t})`.
    pub regret_at_tau_g1: Option<f64>,
    /// `τ_G1 · max_a μ_a − Σ_{t ≤ τ_G1} X_t`.
    pub realized_regret_at_tau_g1: Option<f64>,
    pub mislabeled: bool,
    pub truncated: bool,
    pub actions: Option<Vec<u32>>,
}

impl RunTrace {
    pub fn tau_g(&self, i: usize) -> Option<u64> {
        self.tau_good.get(i - 1).copied()
    }

    pub fn label_string(&self) -> String {
        self.labels.iter().map(|l| l.code()).collect()
    }
}

/// Executes one run. Identical `(config, seed)` pairs give identical traces.
pub fn run(config: &EngineConfig, seed: u64) -> RunTrace {
    let instance = &config.instance;
    let k = instance.num_arms();
    let means = instance.means();
    let best = instance.max_mean();
    let rule = &config.stopping;

    let mut rng = stream(seed);
    let mut policy =
        PolicyState::new(config.policy, instance).expect("policy validated at construction");
    let mut evidence: Vec<Option<EvidenceState>> = means
        .iter()
        .map(|&mu| rule.schedule_for(mu).map(EvidenceState::new))
        .collect();

    let mut unlabeled: Vec<usize> = (0..k).collect();
    let mut labels = vec![ArmLabel::Unlabeled; k];
    let mut tau_arm = vec![None; k];
    let mut pulls_at_label = vec![None; k];
    let mut pulls = vec![0u64; k];
    let mut tau_good = Vec::new();
    let mut actions = config.log_actions.then(Vec::new);

    let mut t = 0u64;
    let mut cumulative_reward = 0.0;
    let mut pseudo_regret = 0.0;
    let mut regret_at_tau_g1 = None;
    let mut realized_regret_at_tau_g1 = None;

    while tau_good.len() < config.target_good && !unlabeled.is_empty() && t < config.max_rounds {
        t += 1;
        let arm = policy
            .select(&unlabeled)
            .expect("unlabeled set is nonempty");
        let x = instance.arms()[arm].sample(&mut rng);

        policy.observe(arm, x);
        pulls[arm] += 1;
        cumulative_reward += x;
        pseudo_regret += best - means[arm];
        if let Some(log) = actions.as_mut() {
            log.push(arm as u32);
        }
        if let Some(ev) = evidence[arm].as_mut() {
            ev.update(x);
        }

        let decision = rule
            .judge(
                policy.pulls(arm),
                policy.mean_estimate(arm),
                evidence[arm].as_ref(),
            )
            .expect("evidence present for e-process rules");
        let label = match decision {
            TestDecision::None => continue,
            TestDecision::RejectBadNull => ArmLabel::Good,
            TestDecision::RejectGoodNull => ArmLabel::Bad,
        };

        labels[arm] = label;
        tau_arm[arm] = Some(t);
        pulls_at_label[arm] = Some(
            evidence[arm]
                .as_ref()
                .map_or(policy.pulls(arm), |e| e.pulls()),
        );
        unlabeled.retain(|&a| a != arm);
        if label == ArmLabel::Good {
            tau_good.push(t);
            if tau_good.len() == 1 {
                regret_at_tau_g1 = Some(pseudo_regret);
                realized_regret_at_tau_g1 = Some(t as f64 * best - cumulative_reward);
            }
        }
        if config.reset_variant {
            for &a in &unlabeled {
                policy.reset_arm(a);
                if let Some(ev) = evidence[a].as_mut() {
                    ev.reset();
                }
            }
        }
    }

    let finished = tau_good.len() >= config.target_good || unlabeled.is_empty();
    let mislabeled = labels.iter().enumerate().any(|(a, l)| match l {
        ArmLabel::Good => !instance.is_good(a),
        ArmLabel::Bad => instance.is_good(a),
        ArmLabel::Unlabeled => false,
    });

    RunTrace {
        seed,
        rounds: t,
        tau_good,
        tau_arm,
        pulls_at_label,
        tau_stop: finished.then_some(t),
        labels,
        pulls,
        cumulative_reward,
        regret_at_tau_g1,
        realized_regret_at_tau_g1,
        mislabeled,
        truncated: !finished,
        actions,
    }
}

/// Runs `replications` independent copies; run `i` uses
/// [`derive_seed`]`(master_seed, i)`. Work is spread over the current rayon
/// pool and results come back in index order.
pub fn run_batch(config: &EngineConfig, master_seed: u64, replications: usize) -> Vec<RunTrace> {
    (0..replications as u64)
        .into_par_iter()
        .map(|i| run(config, derive_seed(master_seed, i)))
        .collect()
}
