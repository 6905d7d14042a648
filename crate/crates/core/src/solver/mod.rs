//! Deciding constraint systems.
//!
//! [`solve`] runs a conflict-driven clause-learning search in which OR
//! constraints are watched clauses, XOR constraints are handled by an
//! incremental Gauss-Jordan propagator and linear constraints by counting
//! propagators. [`check`] evaluates an assignment against a system without
//! touching any of that machinery, and [`export_cnf`] writes a plain DIMACS
//! instance for external solvers.

mod card;
mod cdcl;
mod check;
mod cnf;
mod heap;
mod lit;
mod xor;

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::encoder::ConstraintSystem;
use crate::{Error, Result};

pub use check::{check, first_violation};
pub use cnf::{export_cnf, parse_dimacs, CnfExport};

/// A total 0/1 valuation of a system's variables, indexed by variable id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Self {
        Self { values }
    }

    pub fn zeros(num_vars: usize) -> Self {
        Self {
            values: vec![false; num_vars],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, var: usize) -> bool {
        self.values[var]
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.values[var] = value;
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat(Assignment),
    Unsat,
    Unknown,
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
    pub learned: u64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub verdict: Verdict,
    pub stats: SolverStats,
}

impl SolveResult {
    /// JSON record of the verdict and statistics.
    pub fn stats_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Record<'a> {
            format_version: u32,
            verdict: &'a str,
            stats: SolverStats,
        }
        Ok(serde_json::to_string(&Record {
            format_version: crate::FORMAT_VERSION,
            verdict: self.verdict.label(),
            stats: self.stats,
        })?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartPolicy {
    /// Luby sequence scaled by `unit` conflicts.
    Luby { unit: u64 },
    /// Intervals `first, first·factor, first·factor², ...`.
    Geometric { first: u64, factor: f64 },
    Never,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnedPolicy {
    /// Periodically drop the half of the learned clauses with the worst
    /// literal-block distance.
    Lbd { first_reduce: u64, increment: u64 },
    KeepAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Wall-clock budget in seconds.
    pub time_budget: f64,
    /// Seeds the tie-breaking noise of the branching heuristic.
    pub seed: u64,
    pub restarts: RestartPolicy,
    pub learned: LearnedPolicy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_budget: 60.0,
            seed: 0,
            restarts: RestartPolicy::Luby { unit: 30 },
            learned: LearnedPolicy::Lbd {
                first_reduce: 2000,
                increment: 300,
            },
        }
    }
}

impl SolverConfig {
    pub fn with_budget(time_budget: f64) -> Self {
        Self {
            time_budget,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Looks up a named preset: `default`, `geometric`, `no-restarts`,
    /// `keep-learned`.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        Ok(match name {
            "default" | "luby" => base,
            "geometric" => Self {
                restarts: RestartPolicy::Geometric {
                    first: 100,
                    factor: 1.5,
                },
                ..base
            },
            "no-restarts" => Self {
                restarts: RestartPolicy::Never,
                ..base
            },
            "keep-learned" => Self {
                learned: LearnedPolicy::KeepAll,
                ..base
            },
            other => return Err(Error::param(format!("unknown solver preset {other:?}"))),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_budget > 0.0) || !self.time_budget.is_finite() {
            return Err(Error::param(format!(
                "time budget must be positive and finite, got {}",
                self.time_budget
            )));
        }
        Ok(())
    }

    fn budget(&self) -> Duration {
        Duration::from_secs_f64(self.time_budget)
    }
}

/// Decides `cs` within `cfg.time_budget` seconds.
///
/// A `Sat` verdict carries a total assignment that has been re-verified with
/// [`check`]; `Unknown` is returned only when the budget runs out.
pub fn solve(cs: &ConstraintSystem, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    cs.validate()?;
    let result = cdcl::Search::new(cs, cfg).run();
    if let Verdict::Sat(a) = &result.verdict {
        if !check(cs, a)? {
            let i = first_violation(cs, a).unwrap_or(usize::MAX);
            return Err(Error::Validation(format!(
                "solver model violates constraint {i}"
            )));
        }
    }
    Ok(result)
}
