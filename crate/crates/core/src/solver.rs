use crate::dp::{sweep_period, value_iteration, Grid, ValueIterationStats};
use crate::error::{ModelError, Result};
use crate::scalar::{scalar, Scalar};
use crate::sharing::{aggregate_scale, aggregate_shift, sharing_rule};
use crate::technology::Technology;
use crate::utility::{LtcfMode, LtcfParams};
use crate::weights::{DiscountProfile, WeightVector};

/// What the planner assumes happens after the explicit horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMode {
    /// Terminal value is the stationary problem of the most patient agent,
    /// solved by value iteration. By the terminal date the planner's weights
    /// have concentrated there anyway, so this tail is asymptotically the
    /// right one and long horizons make its error negligible.
    DictatorContinuation,
    /// Terminal value is consuming all terminal output: a hard stop.
    Zero,
}

#[derive(Debug, Clone)]
pub struct SolverConfig<F> {
    pub prefs: LtcfParams<F>,
    pub tech: Technology<F>,
    pub discounts: DiscountProfile<F>,
    pub theta0: WeightVector<F>,
    pub grid_size: usize,
    pub k_min: F,
    pub horizon: usize,
    pub tail_mode: TailMode,
    /// Sup-norm tolerance scale for the tail value iteration; the actual
    /// stopping rule multiplies this by (1 - delta).
    pub tolerance: F,
}

impl<F: Scalar> SolverConfig<F> {
    pub fn validate(&self) -> Result<()> {
        self.validate_core(true)
    }

    /// The constant-weight regime reuses this config but legitimately runs
    /// at simplex vertices, so weight positivity is optional there.
    pub(crate) fn validate_core(&self, require_positive_weights: bool) -> Result<()> {
        if self.prefs.mode == LtcfMode::Exponential {
            return Err(ModelError::InvalidParameter(
                "solver requires the power or log utility family".into(),
            ));
        }
        if self.prefs.gamma != self.discounts.gamma() {
            return Err(ModelError::InvalidParameter(format!(
                "curvature mismatch: utility gamma {} vs discount profile gamma {}",
                self.prefs.gamma,
                self.discounts.gamma()
            )));
        }
        if self.theta0.len() != self.discounts.n_agents() {
            return Err(ModelError::InvalidParameter(format!(
                "initial weights have {} components for {} agents",
                self.theta0.len(),
                self.discounts.n_agents()
            )));
        }
        if require_positive_weights {
            for (i, &w) in self.theta0.iter().enumerate() {
                if !(w > F::zero()) {
                    return Err(ModelError::InvalidParameter(format!(
                        "initial weight {i} must be strictly positive, got {w}"
                    )));
                }
            }
        }
        if self.grid_size < 64 {
            return Err(ModelError::InvalidParameter(format!(
                "grid size must be at least 64, got {}",
                self.grid_size
            )));
        }
        if self.horizon < 10 {
            return Err(ModelError::InvalidParameter(format!(
                "horizon must be at least 10, got {}",
                self.horizon
            )));
        }
        if !(self.k_min > F::zero()) || !(self.k_min < self.tech.k_max) {
            return Err(ModelError::InvalidParameter(format!(
                "k_min must lie in (0, k_max = {}), got {}",
                self.tech.k_max, self.k_min
            )));
        }
        if !(self.tolerance > F::zero()) || !self.tolerance.is_finite() {
            return Err(ModelError::InvalidParameter(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        let red = self.prefs.reduced(self.theta0.len())?;
        let reserve = consumption_reserve(&red);
        if self.tech.output(self.k_min) - self.k_min <= reserve {
            return Err(ModelError::EmptyFeasibleSet {
                period: 0,
                capital: self.k_min.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }
}

/// Consumption kept strictly inside the utility domain when savings bounds
/// are computed. Zero when the floor itself is admissible.
pub(crate) fn consumption_reserve<F: Scalar>(red: &LtcfParams<F>) -> F {
    if red.strict_floor() {
        let floor = red.consumption_floor();
        floor + F::validation_tol() * (F::one() + floor.abs())
    } else {
        F::zero()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodPolicy<F> {
    pub savings: Vec<F>,
    pub value: Vec<F>,
}

/// Savings policies and values on the capital grid, one entry per period
/// before the horizon plus the terminal data.
#[derive(Debug, Clone)]
pub struct PolicyTable<F> {
    mesh: Grid<F>,
    pub periods: Vec<PeriodPolicy<F>>,
    pub tail_value: Vec<F>,
    pub tail_policy: Vec<F>,
    pub tail_stats: Option<ValueIterationStats<F>>,
    pub tail_mode: TailMode,
    pub horizon: usize,
}

impl<F: Scalar> PolicyTable<F> {
    pub fn grid(&self) -> &[F] {
        &self.mesh.pts
    }

    /// Table for a stationary problem: no finite-horizon periods, the whole
    /// policy lives in the tail.
    pub(crate) fn stationary(
        mesh: Grid<F>,
        savings: Vec<F>,
        value: Vec<F>,
        stats: ValueIterationStats<F>,
    ) -> Self {
        PolicyTable {
            mesh,
            periods: Vec::new(),
            tail_value: value,
            tail_policy: savings,
            tail_stats: Some(stats),
            tail_mode: TailMode::DictatorContinuation,
            horizon: 0,
        }
    }

    /// Savings choice at date t and capital k, linearly interpolated.
    /// Dates at or past the horizon use the tail rule.
    pub fn policy_at(&self, t: usize, k: F) -> F {
        if t < self.horizon {
            self.mesh.interp(&self.periods[t].savings, k)
        } else {
            match self.tail_mode {
                TailMode::DictatorContinuation => self.mesh.interp(&self.tail_policy, k),
                TailMode::Zero => F::zero(),
            }
        }
    }

    pub fn value_at(&self, t: usize, k: F) -> F {
        if t < self.horizon {
            self.mesh.interp(&self.periods[t].value, k)
        } else {
            self.mesh.interp(&self.tail_value, k)
        }
    }
}

/// Solve with the reduced utility and the effective one-step factors: the
/// collective problem rewritten as a single as-if agent whose discounting
/// varies over time.
pub fn solve_reduced<F: Scalar>(cfg: &SolverConfig<F>) -> Result<PolicyTable<F>> {
    cfg.validate()?;
    let t_len = cfg.horizon;
    let seq = cfg.discounts.discount_sequences(&cfg.theta0, t_len)?;
    let scales = vec![F::one(); t_len + 1];
    let shifts = vec![F::zero(); t_len + 1];
    backward_solve(cfg, &scales, &shifts, &seq.mu_hat[..t_len])
}

/// Solve with the date-t aggregate utilities U_t and the raw one-step
/// factors mu(theta_t). Mathematically the same problem as `solve_reduced`
/// up to per-period affine transformations of the objective, so the two
/// policies should coincide; offered separately precisely so that the
/// equivalence can be checked numerically.
pub fn solve_raw<F: Scalar>(cfg: &SolverConfig<F>) -> Result<PolicyTable<F>> {
    cfg.validate()?;
    let t_len = cfg.horizon;
    let seq = cfg.discounts.discount_sequences(&cfg.theta0, t_len)?;
    let mut scales = Vec::with_capacity(t_len + 1);
    let mut shifts = Vec::with_capacity(t_len + 1);
    for t in 0..=t_len {
        let theta_t = cfg.discounts.weights_at(&cfg.theta0, t)?;
        scales.push(aggregate_scale(&cfg.prefs, &theta_t)?);
        shifts.push(aggregate_shift(&cfg.prefs, &theta_t)?);
    }
    backward_solve(cfg, &scales, &shifts, &seq.mu[..t_len])
}

fn backward_solve<F: Scalar>(
    cfg: &SolverConfig<F>,
    scales: &[F],
    shifts: &[F],
    ratios: &[F],
) -> Result<PolicyTable<F>> {
    let red = cfg.prefs.reduced(cfg.theta0.len())?;
    let grid = Grid::uniform(cfg.k_min, cfg.tech.k_max, cfg.grid_size);
    let f_vals: Vec<F> = grid.pts.iter().map(|&k| cfg.tech.output(k)).collect();
    let x_reserve = consumption_reserve(&red);
    let t_len = cfg.horizon;

    let (tail_value, tail_policy, tail_stats) = match cfg.tail_mode {
        TailMode::Zero => {
            let v: Vec<F> = f_vals
                .iter()
                .map(|&f| scales[t_len] * red.stage_value(f) + shifts[t_len])
                .collect();
            (v, vec![F::zero(); grid.len()], None)
        }
        TailMode::DictatorContinuation => {
            let d0 = cfg.discounts.delta()[0];
            let tol = cfg.tolerance * (F::one() - d0);
            let stage = |x: F| red.stage_value(x);
            let (out, stats) = value_iteration(&grid, &f_vals, x_reserve, d0, &stage, tol, 50_000)?;
            // additive shift dropped: it moves values, never the argmax
            let v = out.value.iter().map(|&v| scales[t_len] * v).collect();
            (v, out.savings, Some(stats))
        }
    };

    let mut periods: Vec<PeriodPolicy<F>> = Vec::with_capacity(t_len);
    let mut v_next = tail_value.clone();
    for t in (0..t_len).rev() {
        let sc = scales[t];
        let sh = shifts[t];
        let stage = move |x: F| sc * red.stage_value(x) + sh;
        let out = sweep_period(
            &grid, &f_vals, x_reserve, &v_next, ratios[t], &stage, t, true,
        )?;
        v_next.copy_from_slice(&out.value);
        periods.push(PeriodPolicy {
            savings: out.savings,
            value: out.value,
        });
    }
    periods.reverse();

    Ok(PolicyTable {
        mesh: grid,
        periods,
        tail_value,
        tail_policy,
        tail_stats,
        tail_mode: cfg.tail_mode,
        horizon: t_len,
    })
}

/// Realized path of the collective plan from initial capital k0: stocks,
/// aggregate consumption, weights, per-agent shares, the discounting data,
/// and one-step optimality residuals.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord<F> {
    pub capital: Vec<F>,
    pub consumption: Vec<F>,
    pub weights: Vec<WeightVector<F>>,
    pub shares: Vec<Vec<F>>,
    pub beta: Vec<F>,
    pub beta_hat: Vec<F>,
    pub mu: Vec<F>,
    pub mu_hat: Vec<F>,
    /// 1 - mu_hat_t u'(x_{t+1}) f'(k_{t+1}) / u'(x_t), with u the reduced
    /// utility. None where the savings choice was at a bound, where the
    /// first-order condition does not apply, and always None at the horizon.
    pub euler_residuals: Vec<Option<F>>,
}

pub fn simulate_path<F: Scalar>(
    cfg: &SolverConfig<F>,
    table: &PolicyTable<F>,
    k0: F,
) -> Result<TrajectoryRecord<F>> {
    cfg.validate()?;
    if table.horizon != cfg.horizon || table.grid().len() != cfg.grid_size {
        return Err(ModelError::InvalidParameter(
            "policy table does not match the supplied configuration".into(),
        ));
    }
    // k0 below the grid floor is tolerated: output still funds feasible
    // savings and the policy lookup clamps to the lowest node.
    if !(k0 > F::zero()) || !(k0 <= cfg.tech.k_max) {
        return Err(ModelError::PathEscapedGrid {
            period: 0,
            capital: k0.to_f64().unwrap_or(f64::NAN),
        });
    }
    let t_len = cfg.horizon;
    let red = cfg.prefs.reduced(cfg.theta0.len())?;
    let x_reserve = consumption_reserve(&red);
    let seq = cfg.discounts.discount_sequences(&cfg.theta0, t_len)?;

    let mut capital = Vec::with_capacity(t_len + 1);
    let mut consumption = Vec::with_capacity(t_len + 1);
    capital.push(k0);
    for t in 0..t_len {
        let k = capital[t];
        let f = cfg.tech.output(k);
        let y_cap = (f - x_reserve).min(cfg.tech.k_max);
        if y_cap < cfg.k_min {
            return Err(ModelError::PathEscapedGrid {
                period: t,
                capital: k.to_f64().unwrap_or(f64::NAN),
            });
        }
        let y_raw = table.policy_at(t, k);
        let y = y_raw.max(cfg.k_min).min(y_cap);
        consumption.push(f - y);
        capital.push(y);
    }
    // terminal consumption follows the tail rule
    let k_t = capital[t_len];
    let f_t = cfg.tech.output(k_t);
    let x_t = match cfg.tail_mode {
        TailMode::Zero => f_t,
        TailMode::DictatorContinuation => {
            let y = table
                .policy_at(t_len, k_t)
                .max(cfg.k_min)
                .min((f_t - x_reserve).min(cfg.tech.k_max));
            f_t - y
        }
    };
    consumption.push(x_t);

    let mut weights = Vec::with_capacity(t_len + 1);
    let mut shares = Vec::with_capacity(t_len + 1);
    for t in 0..=t_len {
        let theta_t = cfg.discounts.weights_at(&cfg.theta0, t)?;
        let split = sharing_rule(&cfg.prefs, &theta_t, consumption[t])?;
        weights.push(theta_t);
        shares.push(split.shares);
    }

    let mut record = TrajectoryRecord {
        capital,
        consumption,
        weights,
        shares,
        beta: seq.beta,
        beta_hat: seq.beta_hat,
        mu: seq.mu,
        mu_hat: seq.mu_hat,
        euler_residuals: Vec::new(),
    };
    record.euler_residuals = euler_residuals(cfg, &record)?;
    Ok(record)
}

/// Normalized one-step optimality residuals along a path:
/// 1 - mu_hat_t u'(x_{t+1}) f'(k_{t+1}) / u'(x_t) with u the reduced
/// utility. Zero at machine scale on an exactly optimal interior path.
/// None where the savings choice sits on a bound, and always None at the
/// final date. The path need not come from `simulate_path`; hand-built or
/// perturbed paths are legitimate inputs, which is the point of the op.
pub fn euler_residuals<F: Scalar>(
    cfg: &SolverConfig<F>,
    traj: &TrajectoryRecord<F>,
) -> Result<Vec<Option<F>>> {
    let n = traj.capital.len();
    if n < 2 || traj.consumption.len() != n {
        return Err(ModelError::InvalidParameter(
            "trajectory must carry capital and consumption of equal length >= 2".into(),
        ));
    }
    let t_len = n - 1;
    let red = cfg.prefs.reduced(cfg.theta0.len())?;
    let x_reserve = consumption_reserve(&red);
    let seq = cfg.discounts.discount_sequences(&cfg.theta0, t_len)?;
    let bound_slack = scalar::<F>(1e-9) * (cfg.tech.k_max - cfg.k_min);

    let mut euler = Vec::with_capacity(t_len + 1);
    for t in 0..t_len {
        let f = cfg.tech.output(traj.capital[t]);
        let y = traj.capital[t + 1];
        let y_cap = (f - x_reserve).min(cfg.tech.k_max);
        let at_bound = (y - cfg.k_min).abs() <= bound_slack || (y_cap - y).abs() <= bound_slack;
        if at_bound {
            euler.push(None);
            continue;
        }
        let m_now = red.marginal(traj.consumption[t])?;
        let m_next = red.marginal(traj.consumption[t + 1])?;
        let fp = cfg.tech.marginal_product(traj.capital[t + 1]);
        euler.push(Some(F::one() - seq.mu_hat[t] * m_next * fp / m_now));
    }
    euler.push(None);
    Ok(euler)
}

/// Outcome of re-solving at a later date with the weights reached by then
/// treated as the new initial condition.
#[derive(Debug, Clone)]
pub struct ReplanReport<F> {
    pub max_divergence: F,
    /// First date offset at which the re-planned stock differs from the
    /// original by more than a grid-scale tolerance.
    pub first_disagreement: Option<usize>,
    pub divergence: Vec<F>,
}

/// Re-solve at date t_prime carrying the evolved weight state theta_{t'}
/// over as the new initial condition. The collective problem is recursive
/// in (capital, weights), so the re-solved path must reproduce the original
/// tail up to numerics; with a single discount factor the reproduction is
/// exact. Resetting the weights to their original values instead is what
/// breaks the path, and that experiment lives with the constant-weights
/// analysis.
pub fn replan_check<F: Scalar>(
    cfg: &SolverConfig<F>,
    traj: &TrajectoryRecord<F>,
    t_prime: usize,
) -> Result<ReplanReport<F>> {
    if traj.capital.len() != cfg.horizon + 1 {
        return Err(ModelError::InvalidParameter(
            "trajectory does not match the supplied configuration".into(),
        ));
    }
    if t_prime == 0 || 2 * t_prime > cfg.horizon {
        return Err(ModelError::InvalidParameter(format!(
            "re-planning date must satisfy 0 < t' <= horizon / 2, got t' = {t_prime} \
             with horizon {}",
            cfg.horizon
        )));
    }
    let mut cfg2 = cfg.clone();
    cfg2.theta0 = traj.weights[t_prime].clone();
    cfg2.horizon = cfg.horizon - t_prime;
    let table2 = solve_reduced(&cfg2)?;
    let traj2 = simulate_path(&cfg2, &table2, traj.capital[t_prime])?;

    let threshold = cfg.tech.k_max * scalar::<F>(1e-6);
    Ok(divergence_report(
        &traj.capital[t_prime..],
        &traj2.capital,
        threshold,
    ))
}

/// Elementwise distance between an original capital tail and a re-planned
/// path starting at the same date.
pub(crate) fn divergence_report<F: Scalar>(
    original_tail: &[F],
    replanned: &[F],
    threshold: F,
) -> ReplanReport<F> {
    debug_assert_eq!(original_tail.len(), replanned.len());
    let mut divergence = Vec::with_capacity(replanned.len());
    let mut max_div = F::zero();
    let mut first = None;
    for (s, (&a, &b)) in original_tail.iter().zip(replanned).enumerate() {
        let d = (b - a).abs();
        if d > max_div {
            max_div = d;
        }
        if first.is_none() && d > threshold {
            first = Some(s);
        }
        divergence.push(d);
    }
    ReplanReport {
        max_divergence: max_div,
        first_disagreement: first,
        divergence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn single_agent_log(grid_size: usize, horizon: usize) -> SolverConfig<f64> {
        SolverConfig {
            prefs: LtcfParams::log_limit(1.0, 0.0).unwrap(),
            tech: Technology::new(1.0, 0.36).unwrap(),
            discounts: DiscountProfile::new(vec![0.95], 1.0).unwrap(),
            theta0: WeightVector::new(vec![1.0]).unwrap(),
            grid_size,
            k_min: 0.02,
            horizon,
            tail_mode: TailMode::DictatorContinuation,
            tolerance: 1e-10,
        }
    }

    #[test]
    fn log_single_agent_reproduces_the_known_savings_rule() {
        // with log utility and full depreciation the exact policy is
        // y = a delta f(k)
        let cfg = single_agent_log(256, 40);
        let table = solve_reduced(&cfg).unwrap();
        let rate = 0.36 * 0.95;
        let k_max = cfg.tech.k_max;
        for &k in table.grid() {
            if k < 0.1 * k_max || k > 0.95 * k_max {
                continue;
            }
            let want = rate * cfg.tech.output(k);
            let got = table.policy_at(0, k);
            assert_relative_eq!(got, want, max_relative = 2e-3);
        }
    }

    #[test]
    fn simulated_path_approaches_the_stationary_stock() {
        let cfg = single_agent_log(256, 40);
        let table = solve_reduced(&cfg).unwrap();
        let traj = simulate_path(&cfg, &table, 0.05).unwrap();
        let k_star = (0.36f64 * 0.95).powf(1.0 / 0.64);
        assert!((traj.capital[30] - k_star).abs() < 1e-3);
        assert_eq!(traj.capital.len(), 41);
        assert_eq!(traj.consumption.len(), 41);
        // interior optimality holds along the path
        for t in 1..30 {
            let r = traj.euler_residuals[t].expect("interior");
            assert!(r.abs() < 5e-3, "t={t}: residual {r}");
        }
        assert!(traj.euler_residuals[40].is_none());
    }

    fn two_agent_config(tail: TailMode) -> SolverConfig<f64> {
        SolverConfig {
            prefs: LtcfParams::new(2.0, 1.0, -0.02).unwrap(),
            tech: Technology::new(1.0, 0.36).unwrap(),
            discounts: DiscountProfile::new(vec![0.9, 0.8], 2.0).unwrap(),
            theta0: WeightVector::new(vec![0.5, 0.5]).unwrap(),
            grid_size: 128,
            k_min: 0.05,
            horizon: 20,
            tail_mode: tail,
            tolerance: 1e-10,
        }
    }

    #[test]
    fn reduced_and_raw_forms_pick_the_same_policy() {
        let cfg = two_agent_config(TailMode::Zero);
        let reduced = solve_reduced(&cfg).unwrap();
        let raw = solve_raw(&cfg).unwrap();
        let mut worst = 0.0f64;
        for t in 0..cfg.horizon {
            for i in 0..cfg.grid_size {
                let d = (reduced.periods[t].savings[i] - raw.periods[t].savings[i]).abs();
                worst = worst.max(d);
            }
        }
        // the two value recursions agree analytically; the argmax of a
        // quadratic amplifies last-ulp objective noise to ~sqrt(eps)
        assert!(worst <= 1e-7 * cfg.tech.k_max, "policies differ by {worst}");
    }

    #[test]
    fn zero_tail_consumes_terminal_output() {
        let cfg = two_agent_config(TailMode::Zero);
        let table = solve_reduced(&cfg).unwrap();
        let traj = simulate_path(&cfg, &table, 0.3).unwrap();
        let t = cfg.horizon;
        assert_relative_eq!(traj.consumption[t], cfg.tech.output(traj.capital[t]));
        // shares line up with the sharing rule applied to the path
        let split = sharing_rule(&cfg.prefs, &traj.weights[5], traj.consumption[5]).unwrap();
        assert_eq!(split.shares, traj.shares[5]);
    }

    #[test]
    fn replanning_is_exact_without_heterogeneity() {
        let cfg = single_agent_log(128, 24);
        let table = solve_reduced(&cfg).unwrap();
        let traj = simulate_path(&cfg, &table, 0.08).unwrap();
        let report = replan_check(&cfg, &traj, 12).unwrap();
        assert_eq!(report.max_divergence, 0.0);
        assert!(report.first_disagreement.is_none());
    }

    #[test]
    fn carried_weights_keep_the_plan_recursive() {
        // heterogeneous factors, but the re-planner inherits theta_{t'}:
        // the continuation problem is the same problem, so the path stays
        // put apart from rounding in the re-derived discount ratios
        let mut cfg = two_agent_config(TailMode::DictatorContinuation);
        cfg.horizon = 40;
        let table = solve_reduced(&cfg).unwrap();
        let traj = simulate_path(&cfg, &table, 0.3).unwrap();
        let report = replan_check(&cfg, &traj, 10).unwrap();
        assert!(
            report.max_divergence < 1e-7,
            "divergence {}",
            report.max_divergence
        );
        assert!(report.first_disagreement.is_none());
    }

    #[test]
    fn config_validation_catches_mistakes() {
        let ok = two_agent_config(TailMode::Zero);
        assert!(ok.validate().is_ok());

        let mut bad = ok.clone();
        bad.grid_size = 32;
        assert!(bad.validate().is_err());

        let mut bad = ok.clone();
        bad.horizon = 5;
        assert!(bad.validate().is_err());

        let mut bad = ok.clone();
        bad.k_min = 2.0;
        assert!(bad.validate().is_err());

        let mut bad = ok.clone();
        bad.prefs = LtcfParams::new(3.0, 1.0, -0.02).unwrap();
        assert!(bad.validate().is_err());

        let mut bad = ok.clone();
        bad.theta0 = WeightVector::new(vec![1.0, 0.0]).unwrap();
        assert!(bad.validate().is_err());

        let mut bad = ok;
        bad.tolerance = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn replan_preconditions() {
        let cfg = single_agent_log(128, 24);
        let table = solve_reduced(&cfg).unwrap();
        let traj = simulate_path(&cfg, &table, 0.08).unwrap();
        assert!(replan_check(&cfg, &traj, 0).is_err());
        assert!(replan_check(&cfg, &traj, 13).is_err());
    }

    /// Path built from the log/Cobb-Douglas closed form, no solver involved.
    fn analytic_log_path(cfg: &SolverConfig<f64>, k0: f64, t_len: usize) -> TrajectoryRecord<f64> {
        let delta = cfg.discounts.delta()[0];
        let rate = 0.36 * delta;
        let mut capital = vec![k0];
        let mut consumption = Vec::new();
        for t in 0..t_len {
            let f = cfg.tech.output(capital[t]);
            consumption.push((1.0 - rate) * f);
            capital.push(rate * f);
        }
        consumption.push((1.0 - rate) * cfg.tech.output(capital[t_len]));
        TrajectoryRecord {
            capital,
            consumption,
            weights: Vec::new(),
            shares: Vec::new(),
            beta: Vec::new(),
            beta_hat: Vec::new(),
            mu: Vec::new(),
            mu_hat: Vec::new(),
            euler_residuals: Vec::new(),
        }
    }

    #[test]
    fn residuals_vanish_on_the_exact_path() {
        let cfg = single_agent_log(128, 24);
        let traj = analytic_log_path(&cfg, 0.08, 12);
        let res = euler_residuals(&cfg, &traj).unwrap();
        assert_eq!(res.len(), 13);
        assert!(res[12].is_none());
        for t in 0..12 {
            let r = res[t].expect("interior");
            assert!(r.abs() <= 1e-6, "t={t}: residual {r}");
        }
    }

    #[test]
    fn residuals_flag_a_perturbed_path() {
        let cfg = single_agent_log(128, 24);
        let mut traj = analytic_log_path(&cfg, 0.08, 12);
        traj.consumption[6] *= 1.02;
        let res = euler_residuals(&cfg, &traj).unwrap();
        let worst = res.iter().flatten().fold(0.0f64, |acc, r| acc.max(r.abs()));
        assert!(worst > 1e-2, "perturbation went unnoticed: {worst}");
    }
}
