use crate::error::{ModelError, Result};
use crate::scalar::{scalar, Scalar};

/// Point on the unit simplex: the planner's welfare weights at some date.
///
/// Zero components are admissible. They stay zero under the weight dynamics,
/// so excluded agents never re-enter.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<F>(Vec<F>);

impl<F: Scalar> WeightVector<F> {
    /// Strict constructor: components must be nonnegative, finite, and sum
    /// to one within the scalar's validation tolerance. The stored vector is
    /// rescaled by the exact sum so downstream identities start clean.
    pub fn new(components: Vec<F>) -> Result<Self> {
        if components.is_empty() {
            return Err(ModelError::InvalidParameter(
                "weight vector must be nonempty".into(),
            ));
        }
        let mut sum = F::zero();
        for (i, &w) in components.iter().enumerate() {
            if !w.is_finite() || w < F::zero() {
                return Err(ModelError::InvalidParameter(format!(
                    "weight {i} must be finite and nonnegative, got {w}"
                )));
            }
            sum += w;
        }
        if (sum - F::one()).abs() > F::validation_tol() {
            return Err(ModelError::SimplexViolation {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        if sum <= F::zero() {
            return Err(ModelError::AllZeroWeights);
        }
        Ok(Self(components.into_iter().map(|w| w / sum).collect()))
    }

    /// Permissive constructor: any nonnegative vector with positive mass,
    /// rescaled onto the simplex.
    pub fn normalized(components: Vec<F>) -> Result<Self> {
        if components.is_empty() {
            return Err(ModelError::InvalidParameter(
                "weight vector must be nonempty".into(),
            ));
        }
        let mut sum = F::zero();
        for (i, &w) in components.iter().enumerate() {
            if !w.is_finite() || w < F::zero() {
                return Err(ModelError::InvalidParameter(format!(
                    "weight {i} must be finite and nonnegative, got {w}"
                )));
            }
            sum += w;
        }
        if sum <= F::zero() {
            return Err(ModelError::AllZeroWeights);
        }
        Ok(Self(components.into_iter().map(|w| w / sum).collect()))
    }

    /// Already-normalized data from internal computations.
    pub(crate) fn from_normalized(components: Vec<F>) -> Self {
        debug_assert!({
            let s: F = components.iter().copied().sum();
            (s - F::one()).abs() < scalar::<F>(1e-6)
        });
        Self(components)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(ModelError::InvalidParameter(
                "weight vector must be nonempty".into(),
            ));
        }
        let w = F::one() / scalar::<F>(n as f64);
        Ok(Self(vec![w; n]))
    }

    /// All mass on agent `i`.
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(ModelError::InvalidParameter(format!(
                "vertex index {i} out of range for {n} agents"
            )));
        }
        let mut v = vec![F::zero(); n];
        v[i] = F::one();
        Ok(Self(v))
    }

    pub fn as_slice(&self) -> &[F] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, F> {
        self.0.iter()
    }
}

impl<F> std::ops::Index<usize> for WeightVector<F> {
    type Output = F;
    fn index(&self, i: usize) -> &F {
        &self.0[i]
    }
}

/// Agents' discount factors together with the common curvature parameter.
///
/// Factors are required to be weakly decreasing so that agent 0 is always a
/// most patient agent; strictly heterogeneous profiles are the interesting
/// case but ties are legal and make the collective problem collapse to a
/// standard stationary one.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountProfile<F> {
    delta: Vec<F>,
    gamma: F,
    /// delta_i^(1/gamma), the factors of the as-if representative problem.
    delta_hat: Vec<F>,
}

/// Per-date discounting data for a horizon, all vectors of length T + 1.
///
/// `beta[t]` and `beta_hat[t]` are cumulative factors (both exactly 1 at
/// t = 0); `mu[t]` and `mu_hat[t]` are the one-step factors applying between
/// t and t + 1, so beta[t+1] = mu[t] beta[t] and likewise with hats.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountSequence<F> {
    pub beta: Vec<F>,
    pub beta_hat: Vec<F>,
    pub mu: Vec<F>,
    pub mu_hat: Vec<F>,
}

impl<F: Scalar> DiscountProfile<F> {
    pub fn new(delta: Vec<F>, gamma: F) -> Result<Self> {
        if delta.is_empty() {
            return Err(ModelError::InvalidDiscounts(
                "need at least one agent".into(),
            ));
        }
        for (i, &d) in delta.iter().enumerate() {
            if !(d > F::zero()) || !(d < F::one()) {
                return Err(ModelError::InvalidDiscounts(format!(
                    "factor {i} must lie in (0, 1), got {d}"
                )));
            }
        }
        for i in 1..delta.len() {
            if delta[i] > delta[i - 1] {
                return Err(ModelError::InvalidDiscounts(format!(
                    "factors must be ordered from most to least patient; \
                     position {i} has {} after {}",
                    delta[i],
                    delta[i - 1]
                )));
            }
        }
        if !(gamma > F::zero()) || !gamma.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        let delta_hat = if gamma == F::one() {
            delta.clone()
        } else {
            delta.iter().map(|&d| d.powf(F::one() / gamma)).collect()
        };
        Ok(Self {
            delta,
            gamma,
            delta_hat,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.delta.len()
    }

    pub fn delta(&self) -> &[F] {
        &self.delta
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }

    pub fn delta_hat(&self) -> &[F] {
        &self.delta_hat
    }

    /// True when some pair of agents genuinely disagrees about the future.
    pub fn is_heterogeneous(&self) -> bool {
        self.delta.first() > self.delta.last()
    }

    fn check_len(&self, theta: &WeightVector<F>) -> Result<()> {
        if theta.len() != self.delta.len() {
            return Err(ModelError::InvalidParameter(format!(
                "weight vector has {} components but profile has {} agents",
                theta.len(),
                self.delta.len()
            )));
        }
        Ok(())
    }

    /// One-step aggregate discount factor mu(theta) = sum_i theta_i delta_i.
    pub fn mu(&self, theta: &WeightVector<F>) -> Result<F> {
        self.check_len(theta)?;
        Ok(theta.iter().zip(&self.delta).map(|(&t, &d)| t * d).sum())
    }

    /// The planner's weight recursion: theta_i scales by delta_i and the
    /// vector is renormalized, so patience compounds into influence.
    pub fn update_weights(&self, theta: &WeightVector<F>) -> Result<WeightVector<F>> {
        self.check_len(theta)?;
        let m = self.mu(theta)?;
        Ok(WeightVector::from_normalized(
            theta
                .iter()
                .zip(&self.delta)
                .map(|(&t, &d)| t * d / m)
                .collect(),
        ))
    }

    /// Weights after `t` steps in closed form. Computed in log space with
    /// exponents measured relative to the first (most patient) agent, which
    /// keeps the result exactly t-invariant when all factors are equal and
    /// avoids underflow in the unnormalized products otherwise. Components
    /// whose relative weight falls below about 1e-300 flush to exact zero.
    pub fn weights_at(&self, theta0: &WeightVector<F>, t: usize) -> Result<WeightVector<F>> {
        self.check_len(theta0)?;
        if t == 0 {
            return Ok(theta0.clone());
        }
        let tf = scalar::<F>(t as f64);
        let ln_d0 = self.delta[0].ln();
        let mut exponents = vec![F::neg_infinity(); theta0.len()];
        let mut m = F::neg_infinity();
        for i in 0..theta0.len() {
            if theta0[i] > F::zero() {
                let e = theta0[i].ln() + tf * (self.delta[i].ln() - ln_d0);
                exponents[i] = e;
                if e > m {
                    m = e;
                }
            }
        }
        if m == F::neg_infinity() {
            return Err(ModelError::AllZeroWeights);
        }
        let tiny = scalar::<F>(1e-300);
        let mut w: Vec<F> = exponents
            .iter()
            .map(|&e| {
                let v = (e - m).exp();
                if v < tiny {
                    F::zero()
                } else {
                    v
                }
            })
            .collect();
        let sum: F = w.iter().copied().sum();
        for v in &mut w {
            *v = *v / sum;
        }
        Ok(WeightVector::from_normalized(w))
    }

    /// Curvature-adjusted weights a_i = theta_i^(1/gamma) / sum_j
    /// theta_j^(1/gamma). These are the shares of aggregate consumption the
    /// optimal sharing rule assigns (up to the affine floor correction).
    pub fn effective_weights(&self, theta: &WeightVector<F>) -> Result<WeightVector<F>> {
        self.check_len(theta)?;
        if self.gamma == F::one() {
            return Ok(theta.clone());
        }
        let inv_g = F::one() / self.gamma;
        let powered: Vec<F> = theta.iter().map(|&t| t.powf(inv_g)).collect();
        let sum: F = powered.iter().copied().sum();
        Ok(WeightVector::from_normalized(
            powered.into_iter().map(|p| p / sum).collect(),
        ))
    }

    /// One-step discount factor of the as-if representative problem,
    /// mu_hat(theta) = (sum_i a_i(theta) delta_i^(1/gamma))^gamma.
    /// A gamma-power mean of the factors, so it lies between min and max
    /// delta and collapses to mu when gamma = 1.
    pub fn effective_mu(&self, theta: &WeightVector<F>) -> Result<F> {
        if self.gamma == F::one() {
            return self.mu(theta);
        }
        let a = self.effective_weights(theta)?;
        let inner: F = a
            .iter()
            .zip(&self.delta_hat)
            .map(|(&ai, &dh)| ai * dh)
            .sum();
        Ok(inner.powf(self.gamma))
    }

    /// Cumulative collective discount factor sum_i theta0_i delta_i^t.
    /// Exactly 1 at t = 0. Log-sum-exp keeps large t from underflowing.
    pub fn beta_at(&self, theta0: &WeightVector<F>, t: usize) -> Result<F> {
        self.check_len(theta0)?;
        if t == 0 {
            return Ok(F::one());
        }
        let tf = scalar::<F>(t as f64);
        let terms: Vec<F> = theta0
            .iter()
            .zip(&self.delta)
            .filter(|(&th, _)| th > F::zero())
            .map(|(&th, &d)| th.ln() + tf * d.ln())
            .collect();
        Ok(log_sum_exp(&terms).exp())
    }

    /// Cumulative factor of the as-if representative problem,
    /// (sum_i a_i(theta0) (delta_i^(1/gamma))^t)^gamma.
    pub fn beta_hat_at(&self, theta0: &WeightVector<F>, t: usize) -> Result<F> {
        self.check_len(theta0)?;
        if t == 0 {
            return Ok(F::one());
        }
        if self.gamma == F::one() {
            return self.beta_at(theta0, t);
        }
        let a = self.effective_weights(theta0)?;
        let tf = scalar::<F>(t as f64);
        let terms: Vec<F> = a
            .iter()
            .zip(&self.delta_hat)
            .filter(|(&ai, _)| ai > F::zero())
            .map(|(&ai, &dh)| ai.ln() + tf * dh.ln())
            .collect();
        Ok((self.gamma * log_sum_exp(&terms)).exp())
    }

    /// All per-date discounting data for periods 0..=horizon.
    pub fn discount_sequences(
        &self,
        theta0: &WeightVector<F>,
        horizon: usize,
    ) -> Result<DiscountSequence<F>> {
        self.check_len(theta0)?;
        let n = horizon + 1;
        let mut seq = DiscountSequence {
            beta: Vec::with_capacity(n),
            beta_hat: Vec::with_capacity(n),
            mu: Vec::with_capacity(n),
            mu_hat: Vec::with_capacity(n),
        };
        for t in 0..n {
            let theta_t = self.weights_at(theta0, t)?;
            seq.beta.push(self.beta_at(theta0, t)?);
            seq.beta_hat.push(self.beta_hat_at(theta0, t)?);
            seq.mu.push(self.mu(&theta_t)?);
            seq.mu_hat.push(self.effective_mu(&theta_t)?);
        }
        Ok(seq)
    }
}

/// log(sum exp(x_i)) with the usual max shift. Empty input is the log of an
/// empty sum, -infinity.
fn log_sum_exp<F: Scalar>(xs: &[F]) -> F {
    let m = xs.iter().copied().fold(F::neg_infinity(), F::max);
    if !m.is_finite() {
        return m;
    }
    let s: F = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}
