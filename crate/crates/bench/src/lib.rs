//! Shared fixtures for the criterion benches.

use gai_core::{BanditInstance, EngineConfig, PolicyKind, RewardKind, StoppingKind};

pub const K4_MEANS: [f64; 4] = [0.6, 0.55, 0.45, 0.4];

pub fn k4_config(policy: PolicyKind, stopping: StoppingKind) -> EngineConfig {
    let inst =
        BanditInstance::from_means(RewardKind::Bernoulli, &K4_MEANS, 0.5).expect("valid instance");
    EngineConfig::new(inst, policy, stopping, 0.05, 0.98).expect("valid config")
}
