//! Plain CNF export.
//!
//! XOR constraints of width up to three are expanded directly; wider ones are
//! split into a chain of width-3 parities over fresh variables. Linear
//! constraints go through a sequential counter. Variable `i` of the system
//! is CNF variable `i + 1`; auxiliaries follow.

use std::fmt::Write as _;

use crate::encoder::{Cmp, Constraint, ConstraintSystem, Lit, VarKind};
use crate::{Error, Result, FORMAT_VERSION};

use super::Assignment;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfExport {
    /// The DIMACS document.
    pub text: String,
    /// `var_map[v]` is the CNF variable number of system variable `v`.
    pub var_map: Vec<u64>,
    pub num_vars: u64,
    pub num_clauses: usize,
}

impl CnfExport {
    /// Restricts a model of the CNF (indexed by CNF variable number minus
    /// one) to the original variables.
    pub fn map_model(&self, cnf_model: &[bool]) -> Result<Assignment> {
        if cnf_model.len() as u64 != self.num_vars {
            return Err(Error::param(format!(
                "model has {} values, CNF has {} variables",
                cnf_model.len(),
                self.num_vars
            )));
        }
        Ok(Assignment::new(
            self.var_map.iter().map(|&c| cnf_model[(c - 1) as usize]).collect(),
        ))
    }
}

struct Builder {
    next_var: i64,
    clauses: Vec<Vec<i64>>,
}

impl Builder {
    fn fresh(&mut self) -> i64 {
        self.next_var += 1;
        self.next_var
    }

    /// Forbids every assignment of `vars` whose parity differs from `parity`.
    fn xor_direct(&mut self, vars: &[i64], parity: bool) {
        let w = vars.len();
        for bits in 0u32..(1 << w) {
            if (bits.count_ones() % 2 == 1) == parity {
                continue;
            }
            let clause = vars
                .iter()
                .enumerate()
                .map(|(i, &v)| if bits >> i & 1 == 1 { -v } else { v })
                .collect();
            self.clauses.push(clause);
        }
    }

    fn xor(&mut self, vars: &[i64], parity: bool) {
        if vars.len() <= 3 {
            self.xor_direct(vars, parity);
            return;
        }
        let mut acc = vars[0];
        for &v in &vars[1..vars.len() - 2] {
            let t = self.fresh();
            self.xor_direct(&[acc, v, t], false);
            acc = t;
        }
        let tail = &vars[vars.len() - 2..];
        self.xor_direct(&[acc, tail[0], tail[1]], parity);
    }

    /// Sequential counter for `Σ lits ≤ k`.
    fn at_most(&mut self, lits: &[i64], k: i64) {
        let n = lits.len();
        if k < 0 {
            self.clauses.push(Vec::new());
            return;
        }
        if k as usize >= n {
            return;
        }
        if k == 0 {
            for &l in lits {
                self.clauses.push(vec![-l]);
            }
            return;
        }
        let k = k as usize;
        // s[i][j]: at least j + 1 of the first i + 1 literals are true.
        let s: Vec<Vec<i64>> = (0..n - 1)
            .map(|_| (0..k).map(|_| self.fresh()).collect())
            .collect();
        self.clauses.push(vec![-lits[0], s[0][0]]);
        for &r in &s[0][1..] {
            self.clauses.push(vec![-r]);
        }
        for i in 1..n - 1 {
            let x = lits[i];
            self.clauses.push(vec![-x, s[i][0]]);
            self.clauses.push(vec![-s[i - 1][0], s[i][0]]);
            for j in 1..k {
                self.clauses.push(vec![-x, -s[i - 1][j - 1], s[i][j]]);
                self.clauses.push(vec![-s[i - 1][j], s[i][j]]);
            }
            self.clauses.push(vec![-x, -s[i - 1][k - 1]]);
        }
        self.clauses.push(vec![-lits[n - 1], -s[n - 2][k - 1]]);
    }
}

fn dimacs(l: Lit) -> i64 {
    let v = l.var as i64 + 1;
    if l.positive {
        v
    } else {
        -v
    }
}

pub fn export_cnf(cs: &ConstraintSystem) -> CnfExport {
    let n = cs.num_vars();
    let mut b = Builder {
        next_var: n as i64,
        clauses: Vec::new(),
    };
    for c in cs.constraints() {
        match c {
            Constraint::Or { lits } => b.clauses.push(lits.iter().map(|&l| dimacs(l)).collect()),
            Constraint::Xor { vars, parity } => {
                let vs: Vec<i64> = vars.iter().map(|&v| v as i64 + 1).collect();
                b.xor(&vs, *parity);
            }
            Constraint::Linear { vars, cmp, bound } => {
                let pos: Vec<i64> = vars.iter().map(|&v| v as i64 + 1).collect();
                let neg: Vec<i64> = pos.iter().map(|&v| -v).collect();
                let len = vars.len() as i64;
                if matches!(cmp, Cmp::Le | Cmp::Eq) {
                    b.at_most(&pos, *bound);
                }
                if matches!(cmp, Cmp::Ge | Cmp::Eq) {
                    b.at_most(&neg, len - bound);
                }
            }
        }
    }

    let mut text = String::new();
    let _ = writeln!(text, "c format_version: {FORMAT_VERSION}");
    for (v, kind) in cs.variables().iter().enumerate() {
        let _ = writeln!(text, "c var {} {}", v + 1, describe(kind));
    }
    let _ = writeln!(text, "p cnf {} {}", b.next_var, b.clauses.len());
    for clause in &b.clauses {
        for l in clause {
            let _ = write!(text, "{l} ");
        }
        text.push_str("0\n");
    }
    CnfExport {
        text,
        var_map: (1..=n as u64).collect(),
        num_vars: b.next_var as u64,
        num_clauses: b.clauses.len(),
    }
}

fn describe(kind: &VarKind) -> String {
    match *kind {
        VarKind::Activator { q, s } => format!("a {q} {s}"),
        VarKind::Pauli { s } => format!("p {s}"),
        VarKind::Same { s1, s2 } => format!("same {s1} {s2}"),
        VarKind::Even { s1, s2 } => format!("even {s1} {s2}"),
        VarKind::Both { q, s1, s2 } => format!("both {q} {s1} {s2}"),
        VarKind::XType { q, s } => format!("x {q} {s}"),
        VarKind::ZType { q, s } => format!("z {q} {s}"),
        VarKind::Free { index } => format!("free {index}"),
    }
}

/// Reads a DIMACS document back as a system of OR constraints over free
/// variables.
pub fn parse_dimacs(text: &str) -> Result<ConstraintSystem> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    let mut current = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let nums: Vec<usize> = rest
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header: {line}"))))
                .collect::<Result<_>>()?;
            if nums.len() != 2 {
                return Err(Error::Parse(format!("bad header: {line}")));
            }
            header = Some((nums[0], nums[1]));
            continue;
        }
        let (nv, _) = header.ok_or_else(|| Error::Parse("clause before header".into()))?;
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::Parse(format!("bad literal {tok:?}")))?;
            if v == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if v.unsigned_abs() as usize > nv {
                    return Err(Error::Parse(format!("literal {v} exceeds {nv} variables")));
                }
                current.push(Lit {
                    var: (v.unsigned_abs() - 1) as usize,
                    positive: v > 0,
                });
            }
        }
    }
    let (nv, nc) = header.ok_or_else(|| Error::Parse("missing header".into()))?;
    if !current.is_empty() {
        return Err(Error::Parse("unterminated clause".into()));
    }
    if clauses.len() != nc {
        return Err(Error::Parse(format!(
            "header announces {nc} clauses, found {}",
            clauses.len()
        )));
    }
    let mut cs = ConstraintSystem::with_free_vars(nv);
    for mut lits in clauses {
        if lits.is_empty() {
            // The empty clause, as an unsatisfiable constant comparison.
            cs.push(Constraint::linear(Vec::new(), Cmp::Ge, 1), crate::encoder::Origin::External)?;
            continue;
        }
        lits.sort();
        lits.dedup();
        // Tautologies carry no information and duplicate variables are not
        // representable.
        if lits.windows(2).any(|w| w[0].var == w[1].var) {
            continue;
        }
        cs.push(Constraint::or(lits), crate::encoder::Origin::External)?;
    }
    Ok(cs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::Origin;
    use std::collections::BTreeSet;

    fn clauses_of(text: &str) -> Vec<Vec<i64>> {
        text.lines()
            .filter(|l| !l.starts_with('c') && !l.starts_with('p'))
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<i64>().unwrap())
                    .take_while(|&v| v != 0)
                    .collect()
            })
            .collect()
    }

    fn satisfied(clauses: &[Vec<i64>], bits: u64) -> bool {
        clauses.iter().all(|c| {
            c.iter().any(|&l| {
                let value = bits >> (l.unsigned_abs() - 1) & 1 == 1;
                value == (l > 0)
            })
        })
    }

    /// Original-variable projections of all CNF models.
    fn projected_models(e: &CnfExport, originals: usize) -> BTreeSet<u64> {
        let clauses = clauses_of(&e.text);
        (0u64..1 << e.num_vars)
            .filter(|&bits| satisfied(&clauses, bits))
            .map(|bits| bits & ((1 << originals) - 1))
            .collect()
    }

    #[test]
    fn single_clause_header() {
        let mut cs = ConstraintSystem::with_free_vars(2);
        cs.push(Constraint::or(vec![Lit::pos(0), Lit::neg(1)]), Origin::External)
            .unwrap();
        let e = export_cnf(&cs);
        assert!(e.text.contains("p cnf 2 1\n"));
        assert_eq!(clauses_of(&e.text), vec![vec![1, -2]]);
    }

    #[test]
    fn xor_width_three_is_direct() {
        let mut cs = ConstraintSystem::with_free_vars(3);
        cs.push(Constraint::xor(vec![0, 1, 2], true), Origin::External).unwrap();
        let e = export_cnf(&cs);
        assert_eq!(e.num_vars, 3);
        assert_eq!(e.num_clauses, 4);
        let models = projected_models(&e, 3);
        let odd: BTreeSet<u64> = (0..8).filter(|b: &u64| b.count_ones() % 2 == 1).collect();
        assert_eq!(models, odd);
    }

    #[test]
    fn wide_xor_chain_preserves_parity() {
        for w in 4..=7 {
            for parity in [false, true] {
                let mut cs = ConstraintSystem::with_free_vars(w);
                cs.push(Constraint::xor((0..w).collect(), parity), Origin::External)
                    .unwrap();
                let e = export_cnf(&cs);
                assert!(e.num_vars > w as u64);
                let expected: BTreeSet<u64> = (0..1u64 << w)
                    .filter(|b| (b.count_ones() % 2 == 1) == parity)
                    .collect();
                assert_eq!(projected_models(&e, w), expected);
            }
        }
    }

    #[test]
    fn at_least_two_of_five() {
        let mut cs = ConstraintSystem::with_free_vars(5);
        cs.push(Constraint::linear((0..5).collect(), Cmp::Ge, 2), Origin::External)
            .unwrap();
        let e = export_cnf(&cs);
        assert_eq!(projected_models(&e, 5).len(), 26);
    }

    #[test]
    fn linear_comparators_match_counting() {
        for cmp in [Cmp::Ge, Cmp::Le, Cmp::Eq] {
            for bound in -1..=6 {
                let mut cs = ConstraintSystem::with_free_vars(5);
                cs.push(Constraint::linear((0..5).collect(), cmp, bound), Origin::External)
                    .unwrap();
                let e = export_cnf(&cs);
                let expected: BTreeSet<u64> = (0..32u64)
                    .filter(|b| cmp.holds(b.count_ones() as i64, bound))
                    .collect();
                assert_eq!(projected_models(&e, 5), expected, "{cmp:?} {bound}");
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        let mut cs = ConstraintSystem::with_free_vars(4);
        cs.push(Constraint::xor(vec![0, 1, 2, 3], true), Origin::External).unwrap();
        cs.push(Constraint::linear(vec![0, 1, 2], Cmp::Le, 1), Origin::External)
            .unwrap();
        let e = export_cnf(&cs);
        let parsed = parse_dimacs(&e.text).unwrap();
        assert_eq!(parsed.num_vars() as u64, e.num_vars);
        assert_eq!(parsed.constraints().len(), e.num_clauses);
        assert!(parse_dimacs("p cnf 1 1\n2 0\n").is_err());
        assert!(parse_dimacs("1 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 0\n").is_err());
    }

    #[test]
    fn map_model_restricts_to_originals() {
        let mut cs = ConstraintSystem::with_free_vars(5);
        cs.push(Constraint::xor((0..5).collect(), true), Origin::External).unwrap();
        let e = export_cnf(&cs);
        let model: Vec<bool> = (0..e.num_vars).map(|i| i % 2 == 0).collect();
        let a = e.map_model(&model).unwrap();
        assert_eq!(a.values(), &[true, false, true, false, true]);
        assert!(e.map_model(&[true]).is_err());
    }
}
