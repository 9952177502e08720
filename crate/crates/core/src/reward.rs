//! Bounded reward generators and bandit instances.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Reward distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    /// `Bernoulli(mean)`.
    Bernoulli,
    /// Equal-weight mixture of `Bernoulli(2·mean − 1/2)` and `Uniform(0, 1)`.
    Mixture,
}

impl RewardKind {
    pub fn name(self) -> &'static str {
        match self {
            RewardKind::Bernoulli => "bernoulli",
            RewardKind::Mixture => "mixture",
        }
    }
}

/// Reward generator for a single arm. Immutable once built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    kind: RewardKind,
    mean: f64,
}

impl ArmModel {
    pub fn new(kind: RewardKind, mean: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mean) {
            return Err(invalid(
                "means",
                format!("arm mean {mean} is outside [0, 1]"),
            ));
        }
        if kind == RewardKind::Mixture && !(0.25..=0.75).contains(&mean) {
            return Err(invalid(
                "means",
                format!("mixture arms need a mean in [0.25, 0.75], got {mean}"),
            ));
        }
        Ok(Self { kind, mean })
    }

    pub fn bernoulli(mean: f64) -> Result<Self> {
        Self::new(RewardKind::Bernoulli, mean)
    }

    pub fn mixture(mean: f64) -> Result<Self> {
        Self::new(RewardKind::Mixture, mean)
    }

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Draws one reward in `[0, 1]`.
    ///
    /// A mixture draw always consumes two uniforms: the component coin, then
    /// the component draw. Bernoulli consumes one.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x = match self.kind {
            RewardKind::Bernoulli => bernoulli(rng, self.mean),
            RewardKind::Mixture => {
                let coin: f64 = rng.random();
                let inner: f64 = rng.random();
                if coin < 0.5 {
                    if inner < 2.0 * self.mean - 0.5 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    inner
                }
            }
        };
        debug_assert!((0.0..=1.0).contains(&x));
        x
    }
}

#[inline]
fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> f64 {
    // random() is in [0, 1), so p = 0 never fires and p = 1 always does.
    if rng.random::<f64>() < p {
        1.0
    } else {
        0.0
    }
}

/// A set of arms together with the threshold `xi` separating good from bad.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditInstance {
    arms: Vec<ArmModel>,
    threshold: f64,
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmModel>, threshold: f64) -> Result<Self> {
        if arms.is_empty() {
            return Err(invalid("means", "an instance needs at least one arm"));
        }
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(invalid(
                "xi",
                format!("threshold must lie in (0, 1), got {threshold}"),
            ));
        }
        Ok(Self { arms, threshold })
    }

    /// Builds an instance where every arm shares one reward family.
    pub fn from_means(kind: RewardKind, means: &[f64], threshold: f64) -> Result<Self> {
        let arms = means
            .iter()
            .map(|&m| ArmModel::new(kind, m))
            .collect::<Result<Vec<_>>>()?;
        Self::new(arms, threshold)
    }

    pub fn arms(&self) -> &[ArmModel] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn means(&self) -> Vec<f64> {
        self.arms.iter().map(ArmModel::mean).collect()
    }

    pub fn max_mean(&self) -> f64 {
        self.arms
            .iter()
            .map(ArmModel::mean)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_good(&self, arm: usize) -> bool {
        self.arms[arm].mean() > self.threshold
    }

    /// Zero-based `(good, bad)` arm indices. An arm whose mean equals the
    /// threshold is bad.
    pub fn true_labels(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.arms.len()).partition(|&a| self.is_good(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn empirical_mean(model: ArmModel, n: usize, seed: u64) -> f64 {
        let mut rng = stream(seed);
        (0..n).map(|_| model.sample(&mut rng)).sum::<f64>() / n as f64
    }

    #[test]
    fn degenerate_bernoulli() {
        let mut rng = stream(3);
        let zero = ArmModel::bernoulli(0.0).unwrap();
        let one = ArmModel::bernoulli(1.0).unwrap();
        for _ in 0..1000 {
            assert_eq!(zero.sample(&mut rng), 0.0);
            assert_eq!(one.sample(&mut rng), 1.0);
        }
    }

    #[test]
    fn mixture_mean_06() {
        let m = empirical_mean(ArmModel::mixture(0.6).unwrap(), 1_000_000, 11);
        assert!((m - 0.6).abs() <= 0.002, "{m}");
    }

    #[test]
    fn mean_grid() {
        let tol = 3.0 * 0.5 / 1000.0;
        for (i, &mu) in [0.25, 0.4, 0.5, 0.537, 0.6, 0.75].iter().enumerate() {
            for kind in [RewardKind::Bernoulli, RewardKind::Mixture] {
                let model = ArmModel::new(kind, mu).unwrap();
                let m = empirical_mean(model, 1_000_000, 100 + i as u64);
                assert!((m - mu).abs() <= tol, "{kind:?} {mu}: {m}");
            }
        }
    }

    #[test]
    fn mixture_range_enforced() {
        assert!(ArmModel::mixture(0.2).is_err());
        assert!(ArmModel::mixture(0.8).is_err());
        assert!(ArmModel::mixture(0.25).is_ok());
        assert!(ArmModel::mixture(0.75).is_ok());
        assert!(ArmModel::bernoulli(1.2).is_err());
    }

    #[test]
    fn same_stream_same_draws() {
        let model = ArmModel::mixture(0.45).unwrap();
        let (mut a, mut b) = (stream(5), stream(5));
        for _ in 0..500 {
            assert_eq!(
                model.sample(&mut a).to_bits(),
                model.sample(&mut b).to_bits()
            );
        }
    }

    #[test]
    fn labels_for_table_instances() {
        let inst = BanditInstance::from_means(RewardKind::Bernoulli, &[0.6, 0.55, 0.45, 0.4], 0.5)
            .unwrap();
        assert_eq!(inst.true_labels(), (vec![0, 1], vec![2, 3]));

        let dose = BanditInstance::from_means(
            RewardKind::Bernoulli,
            &[0.36, 0.34, 0.469, 0.465, 0.537],
            0.5,
        )
        .unwrap();
        assert_eq!(dose.true_labels(), (vec![4], vec![0, 1, 2, 3]));

        let flat = BanditInstance::from_means(RewardKind::Bernoulli, &[0.5, 0.5], 0.5).unwrap();
        assert_eq!(flat.true_labels(), (vec![], vec![0, 1]));
    }

    #[test]
    fn instance_validation() {
        assert!(BanditInstance::new(vec![], 0.5).is_err());
        let arm = ArmModel::bernoulli(0.5).unwrap();
        assert!(BanditInstance::new(vec![arm], 0.0).is_err());
        assert!(BanditInstance::new(vec![arm], 1.0).is_err());
    }
}
