use crate::error::{ModelError, Result};
use crate::scalar::Scalar;

/// Cobb-Douglas production with full depreciation: f(k) = A k^a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Technology<F> {
    pub productivity: F,
    pub elasticity: F,
    /// Largest sustainable stock, the fixed point of f: A^(1/(1-a)).
    /// Output from any k <= k_max stays below k_max, so grids capped
    /// there are forward-invariant.
    pub k_max: F,
}

impl<F: Scalar> Technology<F> {
    pub fn new(productivity: F, elasticity: F) -> Result<Self> {
        if !(productivity > F::zero()) || !productivity.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "productivity must be positive and finite, got {productivity}"
            )));
        }
        if !(elasticity > F::zero()) || !(elasticity < F::one()) {
            return Err(ModelError::InvalidParameter(format!(
                "capital elasticity must lie in (0, 1), got {elasticity}"
            )));
        }
        let k_max = productivity.powf(F::one() / (F::one() - elasticity));
        Ok(Self {
            productivity,
            elasticity,
            k_max,
        })
    }

    pub fn output(&self, k: F) -> F {
        debug_assert!(k >= F::zero());
        self.productivity * k.powf(self.elasticity)
    }

    pub fn marginal_product(&self, k: F) -> F {
        debug_assert!(k >= F::zero());
        self.productivity * self.elasticity * k.powf(self.elasticity - F::one())
    }

    /// Output and marginal product together, with the domain check that the
    /// `debug_assert`s in the raw accessors only catch in debug builds.
    pub fn eval(&self, k: F) -> Result<(F, F)> {
        if !(k >= F::zero()) {
            return Err(ModelError::NegativeCapital {
                k: k.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok((self.output(k), self.marginal_product(k)))
    }
}
