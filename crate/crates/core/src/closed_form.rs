//! Analytic solutions used as solver oracles. Both require log utility with
//! zero shift, Cobb-Douglas technology, and full depreciation; under those
//! primitives the savings rate is independent of the capital stock and has
//! a closed form even when discounting varies over time.

use crate::error::{ModelError, Result};
use crate::scalar::{scalar, Scalar};
use crate::technology::Technology;
use crate::weights::{DiscountProfile, WeightVector};

/// Constant savings rate of the single-agent log planner: elasticity times
/// the discount factor.
pub fn brock_mirman_rate<F: Scalar>(tech: &Technology<F>, delta: F) -> F {
    tech.elasticity * delta
}

/// Optimal savings out of capital k for the single-agent log planner.
pub fn brock_mirman_policy<F: Scalar>(tech: &Technology<F>, delta: F, k: F) -> Result<F> {
    let (f, _) = tech.eval(k)?;
    Ok(brock_mirman_rate(tech, delta) * f)
}

/// Fixed point of the single-agent log policy, k = a delta A k^a.
pub fn brock_mirman_steady_state<F: Scalar>(tech: &Technology<F>, delta: F) -> F {
    (brock_mirman_rate(tech, delta) * tech.productivity)
        .powf(F::one() / (F::one() - tech.elasticity))
}

/// Savings-rate profile of the collective log planner and the discounted
/// sums generating it.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSavingsOracle<F> {
    /// d_t = a sum_i theta0_i delta_i^t / (1 - a delta_i) for t = 0..=T+1;
    /// satisfies the backward recursion d_t = a (beta_t + d_{t+1}).
    pub d: Vec<F>,
    /// sigma_t = d_{t+1} / (beta_t + d_{t+1}) for t = 0..=T; the planner
    /// saves sigma_t f(k_t).
    pub sigma: Vec<F>,
}

/// Closed-form savings rates for heterogeneous discount factors under log
/// utility with zero shift. With a single agent the profile is constant at
/// the usual a delta.
pub fn log_savings_profile<F: Scalar>(
    theta0: &WeightVector<F>,
    profile: &DiscountProfile<F>,
    tech: &Technology<F>,
    t_len: usize,
) -> Result<LogSavingsOracle<F>> {
    if profile.gamma() != F::one() {
        return Err(ModelError::InvalidParameter(format!(
            "savings-rate closed form requires log curvature, got gamma {}",
            profile.gamma()
        )));
    }
    let a = tech.elasticity;
    let delta = profile.delta();
    let d_at = |t: usize| -> F {
        let tf = scalar::<F>(t as f64);
        let mut acc = F::zero();
        for (&w, &dl) in theta0.iter().zip(delta) {
            acc += w * dl.powf(tf) / (F::one() - a * dl);
        }
        a * acc
    };
    let mut d = Vec::with_capacity(t_len + 2);
    for t in 0..=t_len + 1 {
        d.push(d_at(t));
    }
    let mut sigma = Vec::with_capacity(t_len + 1);
    for t in 0..=t_len {
        let beta_t = profile.beta_at(theta0, t)?;
        sigma.push(d[t + 1] / (beta_t + d[t + 1]));
    }
    Ok(LogSavingsOracle { d, sigma })
}
