//! Independent evaluation of an assignment against a constraint system.
//!
//! Deliberately shares nothing with the search code: each constraint is
//! evaluated directly from its definition.

use crate::encoder::{Constraint, ConstraintSystem};
use crate::{Error, Result};

use super::Assignment;

/// `true` iff every constraint of `cs` holds under `a`.
pub fn check(cs: &ConstraintSystem, a: &Assignment) -> Result<bool> {
    if a.len() != cs.num_vars() {
        return Err(Error::param(format!(
            "assignment covers {} variables, system has {}",
            a.len(),
            cs.num_vars()
        )));
    }
    Ok(cs.constraints().iter().all(|c| holds(c, a)))
}

/// Index of the first violated constraint, if any.
pub fn first_violation(cs: &ConstraintSystem, a: &Assignment) -> Option<usize> {
    cs.constraints().iter().position(|c| !holds(c, a))
}

fn holds(c: &Constraint, a: &Assignment) -> bool {
    match c {
        Constraint::Or { lits } => lits.iter().any(|l| a.get(l.var) == l.positive),
        Constraint::Xor { vars, parity } => {
            let ones = vars.iter().filter(|&&v| a.get(v)).count();
            (ones % 2 == 1) == *parity
        }
        Constraint::Linear { vars, cmp, bound } => {
            let sum = vars.iter().filter(|&&v| a.get(v)).count() as i64;
            cmp.holds(sum, *bound)
        }
    }
}
