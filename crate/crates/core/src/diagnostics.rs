//! Statistical self-checks behind the `validate` subcommand.

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::engine::{run_batch, EngineConfig};
use crate::eprocess::{
    lambda_minus, lambda_plus, EvidenceState, LambdaSchedule, RejectionThreshold,
};
use crate::labeling::{min_pulls_to_label, StoppingKind};
use crate::policy::PolicyKind;
use crate::reward::{ArmModel, BanditInstance, RewardKind};
use crate::rng::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Result of running the plug-in good-arm process on streams drawn at the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullCrossing {
    pub runs: usize,
    pub crossings: usize,
    pub level: f64,
    /// `P(Bin(runs, level) ≥ crossings)`.
    pub p_value: f64,
}

impl NullCrossing {
    pub fn fraction(&self) -> f64 {
        self.crossings as f64 / self.runs as f64
    }

    /// Fails only if the crossing rate is significantly above `level`.
    pub fn consistent_with_level(&self, confidence: f64) -> bool {
        self.p_value > 1.0 - confidence
    }
}

/// Counts how many of `runs` Bernoulli(ξ) streams of length `steps` push the
/// plug-in good-arm e-process to `1/level` at any point.
pub fn null_crossings(
    threshold: f64,
    truncation: f64,
    level: f64,
    runs: usize,
    steps: usize,
    seed: u64,
) -> NullCrossing {
    let schedule = LambdaSchedule::plugin(truncation, threshold).expect("valid schedule");
    let barrier = RejectionThreshold::single(level)
        .expect("valid level")
        .log_level();
    let arm = ArmModel::bernoulli(threshold).expect("threshold is a valid mean");
    let crossings = (0..runs as u64)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = stream(derive_seed(seed, i));
            let mut ev = EvidenceState::new(schedule);
            (0..steps).any(|_| {
                ev.update(arm.sample(&mut rng));
                ev.log_e_minus() >= barrier
            })
        })
        .count();
    let p_value = if crossings == 0 {
        1.0
    } else {
        let bin = Binomial::new(level, runs as u64).expect("valid binomial");
        bin.sf(crossings as u64 - 1)
    };
    NullCrossing {
        runs,
        crossings,
        level,
        p_value,
    }
}

/// Average log-evidence growth `log E⁻ / N` of one e-process fed `steps`
/// draws from `arm`.
pub fn growth_rate(arm: ArmModel, schedule: LambdaSchedule, steps: usize, seed: u64) -> f64 {
    let mut rng = stream(seed);
    let mut ev = EvidenceState::new(schedule);
    for _ in 0..steps {
        ev.update(arm.sample(&mut rng));
    }
    ev.log_e_minus() / steps as f64
}

fn check_null(runs: usize, steps: usize) -> CheckOutcome {
    let res = null_crossings(0.5, 0.98, 0.05, runs, steps, 0x5EED);
    CheckOutcome {
        name: "null supermartingale",
        passed: res.consistent_with_level(0.99),
        detail: format!(
            "{}/{} runs crossed 1/0.05 (fraction {:.4}, one-sided p = {:.3})",
            res.crossings,
            res.runs,
            res.fraction(),
            res.p_value
        ),
    }
}

fn check_clamps() -> CheckOutcome {
    let mut violations = 0usize;
    let grid = |n: usize| (1..n).map(move |i| i as f64 / n as f64);
    let mut total = 0usize;
    for xi in grid(20) {
        for b in grid(20) {
            for mu in (0..=50).map(|i| i as f64 / 50.0) {
                total += 1;
                let lm = lambda_minus(mu, xi, b);
                let lp = lambda_plus(mu, xi, b);
                if !(0.0..=b / xi).contains(&lm) || !(-b / (1.0 - xi)..=0.0).contains(&lp) {
                    violations += 1;
                }
            }
        }
    }
    CheckOutcome {
        name: "betting fraction clamps",
        passed: violations == 0,
        detail: format!("{violations} violations over {total} grid points"),
    }
}

fn check_log_fidelity() -> CheckOutcome {
    let mut worst = 0.0f64;
    for seed in 0..1000u64 {
        let mut rng = stream(derive_seed(0xF1DE, seed));
        let arm = ArmModel::mixture(0.3 + 0.4 * (seed as f64 / 1000.0)).expect("mean in range");
        let xi = 0.5;
        let mut ev = EvidenceState::new(LambdaSchedule::plugin(0.98, xi).expect("valid schedule"));
        let (mut prod, mut sum) = (1.0f64, 0.0f64);
        for i in 0..30 {
            let x = arm.sample(&mut rng);
            let mean = (xi + sum) / (i as f64 + 1.0);
            prod *= 1.0 + lambda_minus(mean, xi, 0.98) * (x - xi);
            sum += x;
            ev.update(x);
        }
        worst = worst.max(((ev.log_e_minus().exp() - prod) / prod).abs());
    }
    CheckOutcome {
        name: "log-domain fidelity",
        passed: worst < 1e-10,
        detail: format!("max relative error {worst:.2e} over 1000 sequences of length 30"),
    }
}

fn check_floor(replications: usize) -> CheckOutcome {
    let inst = BanditInstance::from_means(RewardKind::Bernoulli, &[0.6, 0.55, 0.45, 0.4], 0.5)
        .expect("valid instance");
    let cfg = EngineConfig::new(
        inst,
        PolicyKind::Moss { alpha: 0.05 },
        StoppingKind::Eprocess,
        0.05,
        0.98,
    )
    .expect("valid config");
    let floor = min_pulls_to_label(4, 0.05, 0.98, 0.5);
    let traces = run_batch(&cfg, 0xF100, replications);
    let (mut labels, mut violations) = (0usize, 0usize);
    for n in traces
        .iter()
        .flat_map(|t| t.pulls_at_label.iter().flatten())
    {
        labels += 1;
        if *n < floor {
            violations += 1;
        }
    }
    CheckOutcome {
        name: "minimum pulls to label",
        passed: violations == 0,
        detail: format!("{violations} of {labels} labels below the floor of {floor} pulls"),
    }
}

/// Sizes for [`run_all`].
#[derive(Debug, Clone, Copy)]
pub struct ValidateSizes {
    pub null_runs: usize,
    pub null_steps: usize,
    pub floor_runs: usize,
}

impl Default for ValidateSizes {
    fn default() -> Self {
        Self {
            null_runs: 10_000,
            null_steps: 10_000,
            floor_runs: 200,
        }
    }
}

pub fn run_all(sizes: ValidateSizes) -> Vec<CheckOutcome> {
    vec![
        check_null(sizes.null_runs, sizes.null_steps),
        check_clamps(),
        check_log_fidelity(),
        check_floor(sizes.floor_runs),
    ]
}
