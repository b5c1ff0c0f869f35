//! Collective consumption-savings planning when agents discount the future
//! at different rates.
//!
//! A group shares one LTCF utility shape but not one discount factor. The
//! Pareto-efficient plan then behaves like a single agent whose utility
//! weights drift toward the most patient member period by period, and the
//! crate implements that machinery end to end:
//!
//! - [`utility`]: the LTCF family (power, log, exponential limits) with its
//!   derivatives, inverses, and tolerance index.
//! - [`technology`]: Cobb-Douglas production with its sustainable-stock cap.
//! - [`weights`]: simplex dynamics of the utility weights and the raw and
//!   effective discount sequences they generate.
//! - [`sharing`]: the linear optimal sharing rule, aggregate utility in
//!   closed form, and a bisection oracle cross-checking both.
//! - [`solver`]: finite-horizon backward induction for the collective plan,
//!   path simulation, optimality residuals, and the re-planning check.
//! - [`axioms`]: certificates for stationarity, time invariance, and time
//!   consistency of the collective preferences, plus impatience measures.
//! - [`constant_weights`]: the frozen-weight comparison regime with its box
//!   program, dictatorial plans, and time-inconsistency witness.
//! - [`closed_form`]: analytic savings rules used as test oracles.
//!
//! Everything is generic over the floating-point scalar through [`Scalar`];
//! the `*F64` aliases fix the common choice.

pub mod axioms;
pub mod closed_form;
pub mod constant_weights;
mod dp;
mod error;
mod scalar;
pub mod sharing;
pub mod solver;
pub mod technology;
pub mod utility;
pub mod weights;

pub use dp::ValueIterationStats;
pub use error::{ModelError, Result};
pub use scalar::Scalar;

pub use axioms::{
    check_axioms, impatience_gap, marginal_impatience_profile, mrs, pure_rate, AxiomVerdict,
    AxiomWitness, TemporalPayment,
};
pub use closed_form::{
    brock_mirman_policy, brock_mirman_rate, brock_mirman_steady_state, log_savings_profile,
    LogSavingsOracle,
};
pub use constant_weights::{
    continuation_lp, dictator_solve, egalitarian_solve, inconsistency_witness,
    sharing_ratio_condition, ConstWeightConfig, DictatorSolution, LpSolution,
};
pub use sharing::{
    aggregate_scale, aggregate_shift, aggregate_utility, aggregate_utility_raw,
    nonstationary_utility, sharing_rule, static_oracle, tcf_aggregate, OracleOutcome,
    SharingOutcome,
};
pub use solver::{
    euler_residuals, replan_check, simulate_path, solve_raw, solve_reduced, PeriodPolicy,
    PolicyTable, ReplanReport, SolverConfig, TailMode, TrajectoryRecord,
};
pub use technology::Technology;
pub use utility::{LtcfMode, LtcfParams};
pub use weights::{DiscountProfile, DiscountSequence, WeightVector};

pub type LtcfParamsF64 = LtcfParams<f64>;
pub type TechnologyF64 = Technology<f64>;
pub type WeightVectorF64 = WeightVector<f64>;
pub type DiscountProfileF64 = DiscountProfile<f64>;
pub type DiscountSequenceF64 = DiscountSequence<f64>;
pub type SharingOutcomeF64 = SharingOutcome<f64>;
pub type SolverConfigF64 = SolverConfig<f64>;
pub type PolicyTableF64 = PolicyTable<f64>;
pub type TrajectoryRecordF64 = TrajectoryRecord<f64>;
pub type ReplanReportF64 = ReplanReport<f64>;
pub type AxiomVerdictF64 = AxiomVerdict<f64>;
pub type ConstWeightConfigF64 = ConstWeightConfig<f64>;
pub type LpSolutionF64 = LpSolution<f64>;
pub type DictatorSolutionF64 = DictatorSolution<f64>;
