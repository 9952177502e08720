//! Good-arm identification for bounded-reward bandits.
//!
//! Arms are sampled by a regret-minimizing policy restricted to the arms that
//! are still unlabeled, and each arm is labeled good or bad by anytime-valid
//! e-process tests whose overall error is controlled at `δ`.
//!
//! * [`reward`]: arm reward generators and bandit instances.
//! * [`eprocess`]: predictable plug-in e-processes in log domain.
//! * [`policy`]: MOSS, UCB, HDoC, LUCB-G, APT-G and oracle arm selection.
//! * [`labeling`]: stopping rules.
//! * [`engine`]: the identification loop and batch runner.
//! * [`theory`]: KL rates and asymptotic stopping-time bounds.
//! * [`experiment`]: config files, aggregation and CSV/JSON output.
//! * [`diagnostics`]: statistical self-checks.

pub mod diagnostics;
pub mod engine;
pub mod eprocess;
pub mod error;
pub mod experiment;
pub mod labeling;
pub mod policy;
pub mod reward;
pub mod rng;
pub mod theory;

pub use engine::{run, run_batch, ArmLabel, EngineConfig, RunTrace};
pub use eprocess::{EvidenceState, LambdaSchedule, RejectionThreshold, ScheduleKind, TestDecision};
pub use error::{Error, Result};
pub use experiment::{execute, ExperimentConfig, ExperimentOutput, Metric, RunRecord, SummaryRow};
pub use labeling::{min_pulls_to_label, StoppingKind, StoppingRule};
pub use policy::{PolicyKind, PolicyState};
pub use reward::{ArmModel, BanditInstance, RewardKind};
pub use theory::{kl_bernoulli, minimax_bounds, Bound, BoundReport};
