//! Closed-form reference quantities: Bernoulli KL, the oracle betting
//! fraction, and asymptotic lower bounds on stopping times.
//!
//! Stopping-time bounds are reported as coefficients of `log(1/δ)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::reward::BanditInstance;

/// `KL(Bern(μ) ‖ Bern(ξ)) = μ log(μ/ξ) + (1−μ) log((1−μ)/(1−ξ))`, with `0 log 0 = 0`.
pub fn kl_bernoulli(mean: f64, threshold: f64) -> f64 {
    let term = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    term(mean, threshold) + term(1.0 - mean, 1.0 - threshold)
}

/// Log-optimal constant bet against `ξ` for a Bernoulli(μ) stream.
pub fn lambda_opt(mean: f64, threshold: f64) -> f64 {
    (mean - threshold) / (threshold * (1.0 - threshold))
}

/// Worst-case optimal e-power, in the form
/// `log((1−μ)/(1−ξ)) + μ log(μ(1−ξ)/(ξ(1−μ)))`.
///
/// Algebraically equal to [`kl_bernoulli`]; evaluated separately so the two
/// can be checked against each other. The endpoints take the limits
/// `log(1/(1−ξ))` at `μ = 0` and `log(1/ξ)` at `μ = 1`.
pub fn e_power_reference(mean: f64, threshold: f64) -> f64 {
    if mean <= 0.0 {
        return -(1.0 - threshold).ln();
    }
    if mean >= 1.0 {
        return -threshold.ln();
    }
    ((1.0 - mean) / (1.0 - threshold)).ln()
        + mean * ((mean * (1.0 - threshold)) / (threshold * (1.0 - mean))).ln()
}

/// A nonnegative bound that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Finite(f64),
    Infinite,
}

impl Bound {
    fn reciprocal(x: f64) -> Self {
        if x > 0.0 {
            Bound::Finite(1.0 / x)
        } else {
            Bound::Infinite
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Infinite => None,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        match self {
            Bound::Finite(v) => Bound::Finite(v * c),
            Bound::Infinite => Bound::Infinite,
        }
    }
}

impl std::ops::Add for Bound {
    type Output = Bound;

    fn add(self, rhs: Bound) -> Bound {
        match (self, rhs) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            _ => Bound::Infinite,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v:.4}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

/// Per-arm rates and summed lower-bound coefficients for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub threshold: f64,
    pub delta: f64,
    pub means: Vec<f64>,
    /// `d(μ_a, ξ)` in the original arm order.
    pub kl: Vec<f64>,
    /// Entry `i − 1` bounds `τ_{G,i}`; one entry per good arm.
    pub tau_g_bounds: Vec<Bound>,
    pub tau_stop_bound: Bound,
    /// Reasons the asymptotic bound's hypotheses fail for this instance.
    pub warnings: Vec<String>,
}

impl BoundReport {
    /// `log(1/δ)`.
    pub fn delta_scale(&self) -> f64 {
        -self.delta.ln()
    }

    /// `log(2K/δ)`: heuristic finite-δ scaling matching the rejection level.
    pub fn union_scale(&self) -> f64 {
        (2.0 * self.means.len() as f64 / self.delta).ln()
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Lower-bound coefficients of `log(1/δ)` for `τ_{G,i}` and `τ_stop`.
///
/// `τ_{G,i}` sums `1/d` over the `i` largest means; `τ_stop` sums over all
/// arms. An arm sitting exactly on the threshold contributes an infinite term.
pub fn minimax_bounds(instance: &BanditInstance, delta: f64) -> BoundReport {
    let xi = instance.threshold();
    let means = instance.means();
    let kl: Vec<f64> = means.iter().map(|&m| kl_bernoulli(m, xi)).collect();

    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(a.cmp(&b)));

    let mut tau_g_bounds = Vec::new();
    let mut acc = Bound::Finite(0.0);
    for &a in order.iter().take_while(|&&a| means[a] > xi) {
        acc = acc + Bound::reciprocal(kl[a]);
        tau_g_bounds.push(acc);
    }
    let tau_stop_bound = kl
        .iter()
        .fold(Bound::Finite(0.0), |s, &d| s + Bound::reciprocal(d));

    let mut warnings = Vec::new();
    for (a, &m) in means.iter().enumerate() {
        if m == xi {
            warnings.push(format!("arm {} has mean equal to the threshold", a + 1));
        }
    }
    let mut sorted = means.clone();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        warnings.push("arm means are not pairwise distinct".to_string());
    }

    BoundReport {
        threshold: xi,
        delta,
        means,
        kl,
        tau_g_bounds,
        tau_stop_bound,
        warnings,
    }
}

/// Whether `mean` lies in `(ξ(1−b), b(1−ξ)+ξ)`, the range where the plug-in
/// process attains the optimal e-power.
pub fn in_admissible_window(mean: f64, threshold: f64, truncation: f64) -> bool {
    mean > threshold * (1.0 - truncation) && mean < truncation * (1.0 - threshold) + threshold
}
