use crate::error::{ModelError, Result};
use crate::scalar::{scalar, Scalar};
use crate::utility::{LtcfMode, LtcfParams};
use crate::weights::{DiscountProfile, WeightVector};

/// Optimal split of aggregate consumption x across agents for fixed welfare
/// weights: the rule is affine, s_i = a_i x + b_i, with slopes given by the
/// curvature-adjusted weights and intercepts that redistribute the floors.
#[derive(Debug, Clone, PartialEq)]
pub struct SharingOutcome<F> {
    pub shares: Vec<F>,
    /// Multiplier on the resource constraint: common value of
    /// theta_i u'(s_i) across agents with positive weight.
    pub lambda: F,
    pub a_coeffs: Vec<F>,
    pub b_coeffs: Vec<F>,
}

/// Numerical solution of the same split, produced without the closed form:
/// bisection on the multiplier with shares recovered from inverted marginal
/// utility. Exists to check `sharing_rule`, not to be fast.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome<F> {
    pub shares: Vec<F>,
    pub lambda: F,
    pub resource_gap: F,
    pub iterations: usize,
}

/// theta_i^(1/gamma), normalized. Slopes of the sharing rule.
fn curvature_adjusted<F: Scalar>(theta: &WeightVector<F>, gamma: F) -> Vec<F> {
    if gamma == F::one() {
        return theta.as_slice().to_vec();
    }
    let inv_g = F::one() / gamma;
    let powered: Vec<F> = theta.iter().map(|&t| t.powf(inv_g)).collect();
    let sum: F = powered.iter().copied().sum();
    powered.into_iter().map(|p| p / sum).collect()
}

/// Scale factor c(theta) = (sum_i theta_i^(1/gamma))^gamma relating the
/// aggregate utility to the phi-scaled reduced utility. Exactly 1 when
/// gamma = 1 or when the weights sit on a vertex.
pub fn aggregate_scale<F: Scalar>(prefs: &LtcfParams<F>, theta: &WeightVector<F>) -> Result<F> {
    require_shareable(prefs)?;
    if prefs.gamma == F::one() {
        return Ok(F::one());
    }
    let inv_g = F::one() / prefs.gamma;
    let s: F = theta.iter().map(|&t| t.powf(inv_g)).sum();
    Ok(s.powf(prefs.gamma))
}

/// Shift term d(theta) completing U(x, theta) = c(theta) U_hat(x) + d(theta).
/// For gamma = 1 it is the weight entropy sum theta_i ln theta_i, with the
/// usual 0 ln 0 = 0 convention.
pub fn aggregate_shift<F: Scalar>(prefs: &LtcfParams<F>, theta: &WeightVector<F>) -> Result<F> {
    require_shareable(prefs)?;
    if prefs.gamma == F::one() {
        let mut d = F::zero();
        for &t in theta.iter() {
            if t > F::zero() {
                d += t * t.ln();
            }
        }
        return Ok(d);
    }
    let c = aggregate_scale(prefs, theta)?;
    Ok(prefs.gamma / (F::one() - prefs.gamma) * (c - F::one()))
}

fn require_shareable<F: Scalar>(prefs: &LtcfParams<F>) -> Result<()> {
    if prefs.mode == LtcfMode::Exponential {
        return Err(ModelError::InvalidParameter(
            "sharing requires the power or log family; the exponential limit scales differently"
                .into(),
        ));
    }
    Ok(())
}

/// Split x across the agents optimally for weights theta.
///
/// Agents with zero weight land exactly on the consumption floor, which is a
/// legitimate corner when phi <= 0; with phi > 0 the formula would assign
/// them negative consumption and the call fails instead. Positive-weight
/// agents must come out strictly interior.
pub fn sharing_rule<F: Scalar>(
    prefs: &LtcfParams<F>,
    theta: &WeightVector<F>,
    x: F,
) -> Result<SharingOutcome<F>> {
    require_shareable(prefs)?;
    let n = theta.len();
    let reduced = prefs.reduced(n)?;
    check_aggregate_domain(&reduced, x)?;

    let a = curvature_adjusted(theta, prefs.gamma);
    let nf = scalar::<F>(n as f64);
    let floor_coef = prefs.gamma * prefs.phi / prefs.eta;
    let b: Vec<F> = a
        .iter()
        .map(|&ai| floor_coef * (ai * nf - F::one()))
        .collect();
    let shares: Vec<F> = a.iter().zip(&b).map(|(&ai, &bi)| ai * x + bi).collect();

    let floor = prefs.consumption_floor();
    for i in 0..n {
        let (ok, bound) = if theta[i] > F::zero() {
            if prefs.strict_floor() {
                (shares[i] > floor, floor)
            } else {
                (shares[i] >= F::zero(), F::zero())
            }
        } else {
            // zero weight: the floor itself is the corner solution
            (
                shares[i] >= floor && shares[i] >= F::zero(),
                floor.max(F::zero()),
            )
        };
        if !ok {
            return Err(ModelError::InteriorityViolation {
                agent: i,
                share: shares[i].to_f64().unwrap_or(f64::NAN),
                bound: bound.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let lambda = aggregate_scale(prefs, theta)? * reduced.marginal(x)?;
    Ok(SharingOutcome {
        shares,
        lambda,
        a_coeffs: a,
        b_coeffs: b,
    })
}

/// Aggregate utility U(x, theta) = max over splits of sum_i theta_i u(s_i),
/// evaluated through the scale and shift factors rather than the split.
pub fn aggregate_utility<F: Scalar>(
    prefs: &LtcfParams<F>,
    theta: &WeightVector<F>,
    x: F,
) -> Result<F> {
    let reduced = prefs.reduced(theta.len())?;
    let c = aggregate_scale(prefs, theta)?;
    let d = aggregate_shift(prefs, theta)?;
    Ok(c * reduced.utility(x)? + d)
}

/// Aggregate utility for an arbitrary nonnegative weight slice, without the
/// simplex restriction. Positively homogeneous of degree one in the weights,
/// which is what the simplex version's shift term obscures.
pub fn aggregate_utility_raw<F: Scalar>(prefs: &LtcfParams<F>, weights: &[F], x: F) -> Result<F> {
    require_shareable(prefs)?;
    if weights.is_empty() {
        return Err(ModelError::InvalidParameter(
            "weight slice must be nonempty".into(),
        ));
    }
    let mut total = F::zero();
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < F::zero() {
            return Err(ModelError::InvalidParameter(format!(
                "weight {i} must be finite and nonnegative, got {w}"
            )));
        }
        total += w;
    }
    if total <= F::zero() {
        return Err(ModelError::AllZeroWeights);
    }
    let reduced = prefs.reduced(weights.len())?;
    let u_hat = reduced.utility(x)?;
    if prefs.gamma == F::one() {
        let mut entropy = F::zero();
        for &w in weights {
            if w > F::zero() {
                entropy += w * w.ln();
            }
        }
        return Ok(entropy - total * total.ln() + total * u_hat);
    }
    let inv_g = F::one() / prefs.gamma;
    let s: F = weights.iter().map(|&w| w.powf(inv_g)).sum();
    let c = s.powf(prefs.gamma);
    Ok(c * u_hat + prefs.gamma / (F::one() - prefs.gamma) * (c - total))
}

/// U_t(x): aggregate utility under the date-t weights reached from theta0.
/// As t grows the weights collapse onto the most patient agents and U_t
/// converges to the reduced utility of that limit group.
pub fn nonstationary_utility<F: Scalar>(
    prefs: &LtcfParams<F>,
    profile: &DiscountProfile<F>,
    theta0: &WeightVector<F>,
    t: usize,
    x: F,
) -> Result<F> {
    check_curvature(prefs, profile)?;
    let theta_t = profile.weights_at(theta0, t)?;
    aggregate_utility(prefs, &theta_t, x)
}

/// Tolerance for consumption fluctuations of the aggregate, together with
/// each agent's tcf at the assigned share. The individual values are the
/// sharing slopes times the aggregate value, so they sum to it.
pub fn tcf_aggregate<F: Scalar>(
    prefs: &LtcfParams<F>,
    theta: &WeightVector<F>,
    x: F,
) -> Result<(F, Vec<F>)> {
    require_shareable(prefs)?;
    let reduced = prefs.reduced(theta.len())?;
    let total = reduced.tcf(x)?;
    let a = curvature_adjusted(theta, prefs.gamma);
    let per_agent = a.into_iter().map(|ai| ai * total).collect();
    Ok((total, per_agent))
}

fn check_curvature<F: Scalar>(prefs: &LtcfParams<F>, profile: &DiscountProfile<F>) -> Result<()> {
    if prefs.gamma != profile.gamma() {
        return Err(ModelError::InvalidParameter(format!(
            "curvature mismatch: utility has gamma {}, discount profile has gamma {}",
            prefs.gamma,
            profile.gamma()
        )));
    }
    Ok(())
}

fn check_aggregate_domain<F: Scalar>(reduced: &LtcfParams<F>, x: F) -> Result<()> {
    let floor = reduced.consumption_floor();
    let ok = if reduced.strict_floor() {
        x > floor
    } else {
        x >= floor
    };
    if !ok {
        return Err(ModelError::DomainViolation {
            x: x.to_f64().unwrap_or(f64::NAN),
            bound: floor.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Solve the split by bisection on the multiplier. Zero-weight agents are
/// pinned to the floor first; the remainder is allocated so that
/// theta_i u'(s_i) is equalized. Geometric bracket growth, then geometric
/// bisection, stopping when the resource gap is below tolerance.
pub fn static_oracle<F: Scalar>(
    prefs: &LtcfParams<F>,
    theta: &WeightVector<F>,
    x: F,
) -> Result<OracleOutcome<F>> {
    require_shareable(prefs)?;
    let n = theta.len();
    check_aggregate_domain(&prefs.reduced(n)?, x)?;

    let floor = prefs.consumption_floor();
    let positive: Vec<usize> = (0..n).filter(|&i| theta[i] > F::zero()).collect();
    if positive.is_empty() {
        return Err(ModelError::AllZeroWeights);
    }
    let pinned = scalar::<F>((n - positive.len()) as f64) * floor;
    let remainder = x - pinned;

    let gap = |lambda: F| -> Result<F> {
        let mut used = F::zero();
        for &i in &positive {
            used += prefs.inverse_marginal(lambda / theta[i])?;
        }
        Ok(used - remainder)
    };

    // gap is decreasing in lambda; grow the bracket geometrically until it
    // straddles zero.
    let four = scalar::<F>(4.0);
    let mut lo = F::one();
    let mut hi = F::one();
    let mut g_lo = gap(lo)?;
    let mut g_hi = g_lo;
    let mut grew = 0usize;
    while g_lo < F::zero() {
        lo = lo / four;
        g_lo = gap(lo)?;
        grew += 1;
        if grew > 600 {
            return Err(ModelError::BracketFailure {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
                gap_lo: g_lo.to_f64().unwrap_or(f64::NAN),
                gap_hi: g_hi.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    while g_hi > F::zero() {
        hi = hi * four;
        g_hi = gap(hi)?;
        grew += 1;
        if grew > 600 {
            return Err(ModelError::BracketFailure {
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
                gap_lo: g_lo.to_f64().unwrap_or(f64::NAN),
                gap_hi: g_hi.to_f64().unwrap_or(f64::NAN),
            });
        }
    }

    let tol = F::validation_tol() * F::one().max(x.abs());
    let mut lambda = (lo * hi).sqrt();
    let mut g = gap(lambda)?;
    let mut iterations = 0usize;
    while g.abs() > tol {
        if g > F::zero() {
            lo = lambda;
        } else {
            hi = lambda;
        }
        let next = (lo * hi).sqrt();
        if next == lambda || !(lo < hi) {
            // interval exhausted at this precision
            break;
        }
        lambda = next;
        g = gap(lambda)?;
        iterations += 1;
        if iterations > 500 {
            break;
        }
    }
    if g.abs() > tol * scalar::<F>(1e3) {
        return Err(ModelError::NonConvergence {
            iterations,
            sup_diff: g.abs().to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut shares = vec![floor; n];
    for &i in &positive {
        shares[i] = prefs.inverse_marginal(lambda / theta[i])?;
    }
    let resource_gap = shares.iter().copied().sum::<F>() - x;
    Ok(OracleOutcome {
        shares,
        lambda,
        resource_gap,
        iterations,
    })
}
