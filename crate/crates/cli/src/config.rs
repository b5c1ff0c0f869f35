//! The JSON run configuration: one document, schema-checked on load, with
//! every violation reported by field path. The strict checks live here so
//! bad input exits with status 2 before any solving starts.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use collective_ramsey::{
    DiscountProfileF64, LtcfParamsF64, SolverConfigF64, TailMode, TechnologyF64, WeightVectorF64,
};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub agents: AgentsBlock,
    pub preferences: PreferencesBlock,
    pub technology: TechnologyBlock,
    pub solver: SolverBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axioms: Option<AxiomsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsBlock {
    pub n: usize,
    pub delta: Vec<f64>,
    pub theta0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferencesBlock {
    pub gamma: f64,
    pub eta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologyBlock {
    #[serde(rename = "A")]
    pub productivity: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub grid_size: usize,
    pub k_min: f64,
    #[serde(rename = "T")]
    pub horizon: usize,
    #[serde(default)]
    pub tail_mode: TailModeChoice,
    pub tolerance: f64,
    /// Initial capital for simulated paths; only the commands that walk a
    /// path need it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailModeChoice {
    #[default]
    Dictator,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomsBlock {
    /// Number of sampled payment tuples.
    #[serde(default = "default_cases")]
    pub cases: usize,
    /// Dates and delays are drawn from 0..=max_date (delays from 1..=).
    #[serde(default = "default_max_date")]
    pub max_date: usize,
}

fn default_cases() -> usize {
    40
}

fn default_max_date() -> usize {
    4
}

impl Default for AxiomsBlock {
    fn default() -> Self {
        AxiomsBlock {
            cases: default_cases(),
            max_date: default_max_date(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareBlock {
    /// Re-planning date for the divergence contrast; defaults to a quarter
    /// of the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_prime: Option<usize>,
    /// Pivot agents for the continuation box program, 1-based; empty means
    /// every agent in turn.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pivots: Vec<usize>,
}

/// Core-typed view of a validated configuration. Initial weights may still
/// contain zeros here; the commands that need strictly positive weights
/// find out from the library, the ones that do not keep working.
pub struct CoreBundle {
    pub solver: SolverConfigF64,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        cfg.to_core()?;
        Ok(cfg)
    }

    pub fn to_core(&self) -> Result<CoreBundle, ConfigError> {
        let a = &self.agents;
        if a.n == 0 {
            return Err(bad("agents.n: must be at least 1"));
        }
        if a.delta.len() != a.n {
            return Err(bad(format!(
                "agents.delta: expected {} entries, got {}",
                a.n,
                a.delta.len()
            )));
        }
        if a.theta0.len() != a.n {
            return Err(bad(format!(
                "agents.theta0: expected {} entries, got {}",
                a.n,
                a.theta0.len()
            )));
        }
        for (i, &d) in a.delta.iter().enumerate() {
            if !d.is_finite() || d <= 0.0 || d >= 1.0 {
                return Err(bad(format!(
                    "agents.delta[{i}]: must lie in (0, 1), got {d}"
                )));
            }
        }
        for i in 1..a.delta.len() {
            if a.delta[i] >= a.delta[i - 1] {
                return Err(bad(format!(
                    "agents.delta: factors must be strictly decreasing; delta[{i}] = {} does \
                     not fall below delta[{}] = {}",
                    a.delta[i],
                    i - 1,
                    a.delta[i - 1]
                )));
            }
        }
        for (i, &w) in a.theta0.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(bad(format!(
                    "agents.theta0[{i}]: must be finite and nonnegative, got {w}"
                )));
            }
        }
        let sum: f64 = a.theta0.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(bad(format!("agents.theta0: must sum to 1, got {sum}")));
        }

        let p = &self.preferences;
        let prefs = LtcfParamsF64::new(p.gamma, p.eta, p.phi)
            .map_err(|e| bad(format!("preferences: {e}")))?;
        let tech = TechnologyF64::new(self.technology.productivity, self.technology.a)
            .map_err(|e| bad(format!("technology: {e}")))?;
        let discounts = DiscountProfileF64::new(a.delta.clone(), p.gamma)
            .map_err(|e| bad(format!("agents.delta: {e}")))?;
        let theta0 = WeightVectorF64::new(a.theta0.clone())
            .map_err(|e| bad(format!("agents.theta0: {e}")))?;

        let s = &self.solver;
        if s.grid_size < 2 {
            return Err(bad(format!(
                "solver.grid_size: need at least 2 nodes, got {}",
                s.grid_size
            )));
        }
        if !s.k_min.is_finite() || s.k_min <= 0.0 || s.k_min >= tech.k_max {
            return Err(bad(format!(
                "solver.k_min: must lie in (0, {}), got {}",
                tech.k_max, s.k_min
            )));
        }
        if s.horizon == 0 {
            return Err(bad("solver.T: horizon must be at least 1"));
        }
        if !s.tolerance.is_finite() || s.tolerance <= 0.0 {
            return Err(bad(format!(
                "solver.tolerance: must be positive, got {}",
                s.tolerance
            )));
        }
        if let Some(k0) = s.k0 {
            if !k0.is_finite() || k0 <= 0.0 || k0 > tech.k_max {
                return Err(bad(format!(
                    "solver.k0: must lie in (0, {}], got {k0}",
                    tech.k_max
                )));
            }
        }

        if let Some(ax) = &self.axioms {
            if ax.cases == 0 {
                return Err(bad("axioms.cases: must be at least 1"));
            }
            if ax.max_date == 0 {
                return Err(bad("axioms.max_date: must be at least 1"));
            }
        }
        if let Some(c) = &self.compare {
            if let Some(tp) = c.t_prime {
                if tp == 0 || 2 * tp > s.horizon {
                    return Err(bad(format!(
                        "compare.t_prime: must satisfy 1 <= t' <= T/2 = {}, got {tp}",
                        s.horizon / 2
                    )));
                }
            } else if s.horizon < 2 {
                return Err(bad("compare: re-planning needs solver.T of at least 2"));
            }
            for (j, &piv) in c.pivots.iter().enumerate() {
                if piv == 0 || piv > a.n {
                    return Err(bad(format!(
                        "compare.pivots[{j}]: agent index must lie in 1..={}, got {piv}",
                        a.n
                    )));
                }
            }
        }

        let tail_mode = match s.tail_mode {
            TailModeChoice::Dictator => TailMode::DictatorContinuation,
            TailModeChoice::Zero => TailMode::Zero,
        };
        Ok(CoreBundle {
            solver: SolverConfigF64 {
                prefs,
                tech,
                discounts,
                theta0,
                grid_size: s.grid_size,
                k_min: s.k_min,
                horizon: s.horizon,
                tail_mode,
                tolerance: s.tolerance,
            },
        })
    }

    /// Initial capital, required by the path-walking commands.
    pub fn k0(&self) -> Result<f64, ConfigError> {
        self.solver
            .k0
            .ok_or_else(|| bad("solver.k0: required to simulate a path"))
    }
}
