//! Comparison regime with time-homogeneous utility weights: the averaged
//! discount-factor plan, the continuation-utility box program with its
//! dictatorship classification, per-pivot stationary plans with transfer
//! accounting, the constant-weight sharing-ratio condition, and the
//! re-planning witness showing the regime is not recursive.

use crate::dp::{value_iteration, Grid};
use crate::error::{ModelError, Result};
use crate::scalar::{scalar, Scalar};
use crate::sharing::{aggregate_scale, aggregate_shift};
use crate::solver::{
    consumption_reserve, divergence_report, simulate_path, solve_reduced, PolicyTable,
    ReplanReport, SolverConfig,
};
use crate::utility::LtcfParams;
use crate::weights::{DiscountProfile, WeightVector};

const MAX_VI_ITER: usize = 50_000;

/// Primitives for the constant-weight regime: the fixed weights, the
/// continuation-utility boxes [0, z_max_i], and the shared solver knobs.
/// The embedded solver config's initial weights always equal `theta_bar`;
/// the constructors enforce that and `validate` re-checks it.
#[derive(Debug, Clone)]
pub struct ConstWeightConfig<F> {
    pub theta_bar: WeightVector<F>,
    pub z_max: Vec<F>,
    pub solver: SolverConfig<F>,
}

impl<F: Scalar> ConstWeightConfig<F> {
    pub fn new(
        theta_bar: WeightVector<F>,
        z_max: Vec<F>,
        mut solver: SolverConfig<F>,
    ) -> Result<Self> {
        solver.theta0 = theta_bar.clone();
        let cfg = ConstWeightConfig {
            theta_bar,
            z_max,
            solver,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Boxes sized from the model itself: agent i's value of owning the
    /// whole technology from the maximum sustainable stock under its own
    /// discount factor, floored at 1 so a negative-utility calibration
    /// never collapses a box to nothing.
    pub fn with_default_bounds(
        theta_bar: WeightVector<F>,
        mut solver: SolverConfig<F>,
    ) -> Result<Self> {
        solver.theta0 = theta_bar.clone();
        solver.validate_core(false)?;
        let grid = Grid::uniform(solver.k_min, solver.tech.k_max, solver.grid_size);
        let f_vals: Vec<F> = grid.pts.iter().map(|&k| solver.tech.output(k)).collect();
        let prefs = solver.prefs;
        let reserve = consumption_reserve(&prefs);
        let stage = move |x: F| prefs.stage_value(x);
        let mut z_max = Vec::with_capacity(theta_bar.len());
        for &d_i in solver.discounts.delta() {
            let tol = solver.tolerance * (F::one() - d_i);
            let (out, _) = value_iteration(&grid, &f_vals, reserve, d_i, &stage, tol, MAX_VI_ITER)?;
            let sup = *out.value.last().expect("grid is nonempty");
            z_max.push(sup.max(F::one()));
        }
        Self::new(theta_bar, z_max, solver)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate_core(false)?;
        if self.solver.theta0.as_slice() != self.theta_bar.as_slice() {
            return Err(ModelError::InvalidParameter(
                "embedded solver weights must equal theta_bar".into(),
            ));
        }
        if self.z_max.len() != self.theta_bar.len() {
            return Err(ModelError::InvalidParameter(format!(
                "{} continuation bounds for {} agents",
                self.z_max.len(),
                self.theta_bar.len()
            )));
        }
        for (i, &z) in self.z_max.iter().enumerate() {
            if !(z > F::zero()) || !z.is_finite() {
                return Err(ModelError::InvalidParameter(format!(
                    "continuation bound {i} must be positive and finite, got {z}"
                )));
            }
        }
        // A zero weight pins that agent to the consumption floor; with a
        // positive shift the floor is not admissible, so the aggregate
        // stage utility the plans below maximize would not be attainable.
        if self.solver.prefs.phi > F::zero() {
            for (agent, &w) in self.theta_bar.iter().enumerate() {
                if w == F::zero() {
                    return Err(ModelError::InteriorityViolation {
                        agent,
                        share: 0.0,
                        bound: self
                            .solver
                            .prefs
                            .consumption_floor()
                            .to_f64()
                            .unwrap_or(f64::NAN),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Stationary plan under a single constant discount factor, with the
/// constant-weight aggregate utility as the stage payoff.
fn stationary_plan<F: Scalar>(cfg: &ConstWeightConfig<F>, discount: F) -> Result<PolicyTable<F>> {
    let s = &cfg.solver;
    let red = s.prefs.reduced(cfg.theta_bar.len())?;
    let scale = aggregate_scale(&s.prefs, &cfg.theta_bar)?;
    let shift = aggregate_shift(&s.prefs, &cfg.theta_bar)?;
    let grid = Grid::uniform(s.k_min, s.tech.k_max, s.grid_size);
    let f_vals: Vec<F> = grid.pts.iter().map(|&k| s.tech.output(k)).collect();
    let reserve = consumption_reserve(&red);
    let stage = move |x: F| scale * red.stage_value(x) + shift;
    let tol = s.tolerance * (F::one() - discount);
    let (out, stats) =
        value_iteration(&grid, &f_vals, reserve, discount, &stage, tol, MAX_VI_ITER)?;
    Ok(PolicyTable::stationary(grid, out.savings, out.value, stats))
}

/// Plan that discounts the constant-weight aggregate utility by the
/// weighted average factor sum_i theta_bar_i delta_i.
pub fn egalitarian_solve<F: Scalar>(cfg: &ConstWeightConfig<F>) -> Result<PolicyTable<F>> {
    cfg.validate()?;
    let delta_bar = cfg.solver.discounts.mu(&cfg.theta_bar)?;
    stationary_plan(cfg, delta_bar)
}

/// Solution of the continuation-utility box program for a pivot agent.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<F> {
    pub z_star: Vec<F>,
    /// 1-based indices of the agents whose continuation utility sits at the
    /// top of its box.
    pub active_agents: Vec<usize>,
    /// The pivot's factor alone drives the aggregate dynamics.
    pub dictatorial: bool,
    /// The objective had a flat direction among the agents more patient
    /// than the pivot, so the reported maximizer is one of many. Nothing is
    /// chosen silently: flat coordinates stay at zero.
    pub degenerate: bool,
    pub objective_value: F,
    /// Objective coefficient theta_bar_j (delta_j - delta_pivot) for each
    /// agent j more patient than the pivot, in agent order.
    pub coefficients: Vec<F>,
}

/// Maximize sum_j theta_bar_j (delta_j - delta_pivot) z_j over the boxes
/// [0, z_max_j], j running over agents more patient than the 1-based
/// `pivot`; everyone from the pivot onward is left at zero. Strictly
/// positive coefficients push their coordinates to the top of the box, so
/// the optimum is a vertex whenever no coefficient vanishes.
pub fn continuation_lp<F: Scalar>(
    cfg: &ConstWeightConfig<F>,
    pivot: usize,
) -> Result<LpSolution<F>> {
    cfg.validate()?;
    let n = cfg.theta_bar.len();
    if pivot == 0 || pivot > n {
        return Err(ModelError::InvalidParameter(format!(
            "pivot agent must lie in 1..={n}, got {pivot}"
        )));
    }
    let delta = cfg.solver.discounts.delta();
    let d_pivot = delta[pivot - 1];
    let mut z_star = vec![F::zero(); n];
    let mut coefficients = Vec::with_capacity(pivot - 1);
    let mut active_agents = Vec::new();
    let mut objective_value = F::zero();
    let mut degenerate = false;
    for j in 0..pivot - 1 {
        let coef = cfg.theta_bar[j] * (delta[j] - d_pivot);
        if coef > F::zero() {
            z_star[j] = cfg.z_max[j];
            active_agents.push(j + 1);
            objective_value += coef * cfg.z_max[j];
        } else {
            degenerate = true;
        }
        coefficients.push(coef);
    }
    Ok(LpSolution {
        z_star,
        active_agents,
        dictatorial: !degenerate,
        degenerate,
        objective_value,
        coefficients,
    })
}

/// A pivot agent's stationary plan together with the box program backing it
/// and the promised-utility transfer it owes the more patient agents.
#[derive(Debug, Clone)]
pub struct DictatorSolution<F> {
    pub table: PolicyTable<F>,
    pub lp: LpSolution<F>,
    /// sum_j theta_bar_j delta_j z_star_j over the pivot's seniors. An
    /// additive constant in the collective objective: reported, never
    /// folded into the values, because it cannot move any argmax.
    pub transfer: F,
}

/// Stationary plan discounting by the 1-based pivot agent's own factor,
/// with the continuation utilities of the more patient agents promised at
/// their box solution.
pub fn dictator_solve<F: Scalar>(
    cfg: &ConstWeightConfig<F>,
    pivot: usize,
) -> Result<DictatorSolution<F>> {
    let lp = continuation_lp(cfg, pivot)?;
    let delta = cfg.solver.discounts.delta();
    let table = stationary_plan(cfg, delta[pivot - 1])?;
    let mut transfer = F::zero();
    for j in 0..pivot - 1 {
        transfer += cfg.theta_bar[j] * delta[j] * lp.z_star[j];
    }
    Ok(DictatorSolution {
        table,
        lp,
        transfer,
    })
}

/// Consumption the constant-weight optimum implies for 1-based agent `j`
/// at date t, given pivot agent i's consumption: the weighted discounted
/// marginal utilities must be equal, so
/// u'(x_j) = (theta_i/theta_j)(delta_i/delta_j)^t u'(x_i), inverted in
/// closed form. Requires j more patient than i; the implied consumption
/// must land in the admissible domain or the condition has no interior
/// solution at this date.
pub fn sharing_ratio_condition<F: Scalar>(
    t: usize,
    i: usize,
    j: usize,
    theta_bar: &WeightVector<F>,
    d: &DiscountProfile<F>,
    x_bar_i: F,
    prefs: &LtcfParams<F>,
) -> Result<F> {
    let n = theta_bar.len();
    if n != d.n_agents() {
        return Err(ModelError::InvalidParameter(format!(
            "weight vector has {n} components but profile has {} agents",
            d.n_agents()
        )));
    }
    if j == 0 || i > n || j >= i {
        return Err(ModelError::OrderingViolation(format!(
            "need a more patient agent j < i within 1..={n}, got j={j}, i={i}"
        )));
    }
    let (ti, tj) = (theta_bar[i - 1], theta_bar[j - 1]);
    if !(ti > F::zero()) || !(tj > F::zero()) {
        return Err(ModelError::NoInteriorSolution(format!(
            "agents {j} and {i} must both carry positive weight"
        )));
    }
    let delta = d.delta();
    let growth = (delta[i - 1] / delta[j - 1]).powf(scalar::<F>(t as f64));
    let m_j = ti / tj * growth * prefs.marginal(x_bar_i)?;
    let x_j = prefs.inverse_marginal(m_j)?;
    let admissible = if prefs.strict_floor() {
        x_j > prefs.consumption_floor()
    } else {
        x_j >= F::zero()
    };
    if !admissible {
        return Err(ModelError::NoInteriorSolution(format!(
            "implied consumption {x_j} for agent {j} at date {t} leaves the admissible domain"
        )));
    }
    Ok(x_j)
}

/// Demonstrate that the constant-weight recipe is not recursive: solve the
/// date-0 problem, walk the path to `t_prime`, then re-solve from the
/// reached capital while resetting the weights to `theta_bar` instead of
/// carrying the evolved state. The re-planned path abandons the original
/// one; carrying the weights (see the solver's replan check) keeps it.
pub fn inconsistency_witness<F: Scalar>(
    cfg: &ConstWeightConfig<F>,
    k0: F,
    t_prime: usize,
) -> Result<ReplanReport<F>> {
    cfg.validate()?;
    // the full plan is solved from theta_bar, so weights must be positive
    cfg.solver.validate()?;
    if t_prime == 0 || 2 * t_prime > cfg.solver.horizon {
        return Err(ModelError::InvalidParameter(format!(
            "re-planning date must satisfy 0 < t' <= horizon / 2, got t' = {t_prime} \
             with horizon {}",
            cfg.solver.horizon
        )));
    }
    let table = solve_reduced(&cfg.solver)?;
    let traj = simulate_path(&cfg.solver, &table, k0)?;

    let mut replanned = cfg.solver.clone();
    replanned.horizon = cfg.solver.horizon - t_prime;
    let table2 = solve_reduced(&replanned)?;
    let traj2 = simulate_path(&replanned, &table2, traj.capital[t_prime])?;

    let threshold = cfg.solver.tech.k_max * scalar::<F>(1e-6);
    Ok(divergence_report(
        &traj.capital[t_prime..],
        &traj2.capital,
        threshold,
    ))
}
