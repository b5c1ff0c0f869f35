use crate::error::{ModelError, Result};
use crate::scalar::{scalar, Scalar};

/// Which branch of the family a parameter set lives on.
///
/// `Power` is the generic curvature case, `Log` the gamma = 1 limit, and
/// `Exponential` the infinite-curvature limit with phi pinned to 1. The
/// limits are stored as their own variants so evaluation near the limit
/// points never relies on cancellation in the generic formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtcfMode {
    Power,
    Log,
    Exponential,
}

/// Utility with linear tolerance for consumption fluctuations:
///
///   u(x) = (gamma / (1 - gamma)) * ((phi + (eta/gamma) x)^(1-gamma) - 1)
///
/// The tolerance for consumption fluctuations, -u'/u'', is phi/eta + x/gamma,
/// affine in x. Special cases: gamma = 1 gives log(phi + eta x), and the
/// gamma -> infinity, phi = 1 limit gives 1 - exp(-eta x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LtcfParams<F> {
    pub gamma: F,
    pub eta: F,
    pub phi: F,
    pub mode: LtcfMode,
}

impl<F: Scalar> LtcfParams<F> {
    pub fn new(gamma: F, eta: F, phi: F) -> Result<Self> {
        if !(gamma > F::zero()) || !gamma.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        if !(eta > F::zero()) || !eta.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "eta must be positive and finite, got {eta}"
            )));
        }
        if !phi.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "phi must be finite, got {phi}"
            )));
        }
        let mode = if gamma == F::one() {
            LtcfMode::Log
        } else {
            LtcfMode::Power
        };
        Ok(Self {
            gamma,
            eta,
            phi,
            mode,
        })
    }

    pub fn log_limit(eta: F, phi: F) -> Result<Self> {
        Self::new(F::one(), eta, phi)
    }

    /// The gamma -> infinity limit. Only phi = 1 yields a nondegenerate
    /// pointwise limit, so phi is not a free parameter here.
    pub fn exponential(eta: F) -> Result<Self> {
        if !(eta > F::zero()) || !eta.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "eta must be positive and finite, got {eta}"
            )));
        }
        Ok(Self {
            gamma: F::infinity(),
            eta,
            phi: F::one(),
            mode: LtcfMode::Exponential,
        })
    }

    /// Base term phi + (eta/gamma) x. Negative base means x is outside the
    /// domain; a tiny negative value from rounding is treated as zero.
    fn base(&self, x: F) -> Result<F> {
        let b = self.phi + (self.eta / self.gamma) * x;
        if b >= F::zero() {
            return Ok(b);
        }
        let slack = F::validation_tol() * (F::one() + self.phi.abs() + x.abs());
        if b > -slack {
            Ok(F::zero())
        } else {
            Err(ModelError::DomainViolation {
                x: x.to_f64().unwrap_or(f64::NAN),
                bound: self.domain_floor().to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Infimum of the mathematical domain, -phi gamma / eta. May be negative
    /// when phi > 0; consumption floors additionally clip at zero.
    fn domain_floor(&self) -> F {
        match self.mode {
            LtcfMode::Exponential => F::neg_infinity(),
            _ => -self.phi * self.gamma / self.eta,
        }
    }

    /// Smallest admissible consumption level. Zero when phi >= 0, else the
    /// subsistence point where the base term vanishes.
    pub fn consumption_floor(&self) -> F {
        match self.mode {
            LtcfMode::Exponential => F::zero(),
            _ => self.domain_floor().max(F::zero()),
        }
    }

    /// True when the floor itself must be excluded from feasible sets: the
    /// base term is zero there, marginal utility diverges, and for
    /// gamma >= 1 utility is -infinity.
    pub fn strict_floor(&self) -> bool {
        match self.mode {
            LtcfMode::Exponential => false,
            _ => self.phi <= F::zero(),
        }
    }

    /// Same family with phi scaled by the number of agents. This is the
    /// utility a planner acts as if it had once optimal risk sharing among
    /// n identical-curvature agents is folded in.
    pub fn reduced(&self, n: usize) -> Result<Self> {
        if self.mode == LtcfMode::Exponential {
            return Err(ModelError::InvalidParameter(
                "exponential limit does not admit the phi-scaling reduction".into(),
            ));
        }
        if n == 0 {
            return Err(ModelError::InvalidParameter(
                "agent count must be positive".into(),
            ));
        }
        Ok(Self {
            phi: self.phi * scalar::<F>(n as f64),
            ..*self
        })
    }

    pub fn utility(&self, x: F) -> Result<F> {
        match self.mode {
            LtcfMode::Exponential => Ok(F::one() - (-self.eta * x).exp()),
            LtcfMode::Log => Ok(self.base(x)?.ln()),
            LtcfMode::Power => {
                let b = self.base(x)?;
                let g = self.gamma;
                // b = 0 falls through correctly: 0^(1-gamma) is 0 for
                // gamma < 1 and +inf for gamma > 1, so u is finite or -inf.
                Ok(g / (F::one() - g) * (b.powf(F::one() - g) - F::one()))
            }
        }
    }

    /// u'(x) = eta * base^(-gamma). Diverges at the floor when phi <= 0.
    pub fn marginal(&self, x: F) -> Result<F> {
        match self.mode {
            LtcfMode::Exponential => Ok(self.eta * (-self.eta * x).exp()),
            _ => {
                let b = self.base(x)?;
                Ok(self.eta * b.powf(-self.gamma))
            }
        }
    }

    /// Tolerance for consumption fluctuations, -u'/u''.
    pub fn tcf(&self, x: F) -> Result<F> {
        match self.mode {
            LtcfMode::Exponential => Ok(F::one() / self.eta),
            _ => Ok(self.base(x)? / self.eta),
        }
    }

    /// Solve u'(x) = m for x. The formula extends to the whole positive
    /// half-line in m; callers are responsible for restricting to whatever
    /// consumption domain their problem imposes.
    pub fn inverse_marginal(&self, m: F) -> Result<F> {
        if !(m > F::zero()) {
            return Err(ModelError::InvalidParameter(format!(
                "marginal utility must be positive, got {m}"
            )));
        }
        match self.mode {
            LtcfMode::Exponential => Ok(-(m / self.eta).ln() / self.eta),
            _ => {
                let b = (self.eta / m).powf(F::one() / self.gamma);
                Ok(self.gamma / self.eta * (b - self.phi))
            }
        }
    }

    /// Solve u(x) = v for x, rejecting values outside the range of u.
    pub fn inverse_utility(&self, v: F) -> Result<F> {
        if !v.is_finite() {
            return Err(ModelError::InfeasibleIndifference {
                value: v.to_f64().unwrap_or(f64::NAN),
            });
        }
        match self.mode {
            LtcfMode::Exponential => {
                if v >= F::one() {
                    return Err(ModelError::InfeasibleIndifference {
                        value: v.to_f64().unwrap_or(f64::NAN),
                    });
                }
                Ok(-(F::one() - v).ln() / self.eta)
            }
            LtcfMode::Log => {
                let b = v.exp();
                Ok(self.gamma / self.eta * (b - self.phi))
            }
            LtcfMode::Power => {
                let g = self.gamma;
                // Range of u: gamma > 1 gives (-inf, gamma/(gamma-1)),
                // gamma < 1 gives [-gamma/(1-gamma), +inf).
                let inner = F::one() + v * (F::one() - g) / g;
                if !(inner > F::zero()) {
                    if g < F::one() && inner == F::zero() {
                        // v at the bottom of the range maps to the floor.
                        return Ok(self.domain_floor());
                    }
                    return Err(ModelError::InfeasibleIndifference {
                        value: v.to_f64().unwrap_or(f64::NAN),
                    });
                }
                let b = inner.powf(F::one() / (F::one() - g));
                Ok(g / self.eta * (b - self.phi))
            }
        }
    }

    /// Total version of `utility` for optimizer inner loops: out-of-domain
    /// consumption maps to -infinity instead of an error.
    pub(crate) fn stage_value(&self, x: F) -> F {
        match self.utility(x) {
            Ok(u) => u,
            Err(_) => F::neg_infinity(),
        }
    }
}
