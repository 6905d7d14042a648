//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng;
use stabcolor::encoder::{Cmp, Constraint, ConstraintSystem, Lit};
use stabcolor::{CssCode, ErasurePattern, VarKind};

/// A constraint over at most 32 variables, as bit masks.
#[derive(Clone, Debug)]
pub enum MaskConstraint {
    /// `neg` marks the negated literals.
    Or { mask: u32, neg: u32 },
    Xor { mask: u32, parity: bool },
    Linear { mask: u32, cmp: Cmp, bound: i64 },
}

impl MaskConstraint {
    pub fn holds(&self, x: u32) -> bool {
        match *self {
            MaskConstraint::Or { mask, neg } => (x ^ neg) & mask != 0,
            MaskConstraint::Xor { mask, parity } => ((x & mask).count_ones() % 2 == 1) == parity,
            MaskConstraint::Linear { mask, cmp, bound } => {
                let s = i64::from((x & mask).count_ones());
                match cmp {
                    Cmp::Ge => s >= bound,
                    Cmp::Le => s <= bound,
                    Cmp::Eq => s == bound,
                }
            }
        }
    }

    pub fn from_constraint(c: &Constraint) -> Self {
        let mask_of = |vs: &[usize]| vs.iter().fold(0u32, |m, &v| m | 1 << v);
        match c {
            Constraint::Or { lits } => MaskConstraint::Or {
                mask: lits.iter().fold(0, |m, l| m | 1 << l.var),
                neg: lits.iter().filter(|l| !l.positive).fold(0, |m, l| m | 1 << l.var),
            },
            Constraint::Xor { vars, parity } => MaskConstraint::Xor {
                mask: mask_of(vars),
                parity: *parity,
            },
            Constraint::Linear { vars, cmp, bound } => MaskConstraint::Linear {
                mask: mask_of(vars),
                cmp: *cmp,
                bound: *bound,
            },
        }
    }

    fn to_constraint(&self) -> Constraint {
        let vars = |mask: u32| (0..32).filter(|v| mask >> v & 1 == 1).collect::<Vec<usize>>();
        match *self {
            MaskConstraint::Or { mask, neg } => Constraint::or(
                vars(mask)
                    .into_iter()
                    .map(|v| if neg >> v & 1 == 1 { Lit::neg(v) } else { Lit::pos(v) })
                    .collect(),
            ),
            MaskConstraint::Xor { mask, parity } => Constraint::xor(vars(mask), parity),
            MaskConstraint::Linear { mask, cmp, bound } => Constraint::linear(vars(mask), cmp, bound),
        }
    }
}

/// A random mixed system over `num_vars` variables.
pub struct RandomSystem {
    pub num_vars: usize,
    pub constraints: Vec<MaskConstraint>,
}

impl RandomSystem {
    pub fn sample(rng: &mut impl Rng, max_vars: usize) -> Self {
        let num_vars = rng.gen_range(1..=max_vars);
        let count = rng.gen_range(1..=2 * num_vars + 2);
        let all: Vec<usize> = (0..num_vars).collect();
        let constraints = (0..count)
            .map(|_| {
                let width = rng.gen_range(1..=num_vars.min(6));
                let vs: Vec<usize> = all.choose_multiple(rng, width).copied().collect();
                let mask = vs.iter().fold(0u32, |m, &v| m | 1 << v);
                match rng.gen_range(0..3) {
                    0 => MaskConstraint::Or {
                        mask,
                        neg: vs.iter().filter(|_| rng.gen()).fold(0, |m, &v| m | 1 << v),
                    },
                    1 => MaskConstraint::Xor {
                        mask,
                        parity: rng.gen(),
                    },
                    _ => MaskConstraint::Linear {
                        mask,
                        cmp: [Cmp::Ge, Cmp::Le, Cmp::Eq][rng.gen_range(0..3)],
                        bound: rng.gen_range(0..=width as i64),
                    },
                }
            })
            .collect();
        Self {
            num_vars,
            constraints,
        }
    }

    pub fn to_system(&self) -> ConstraintSystem {
        let mut cs = ConstraintSystem::with_free_vars(self.num_vars);
        for c in &self.constraints {
            cs.push(c.to_constraint(), stabcolor::encoder::Origin::External)
                .expect("valid constraint");
        }
        cs
    }

    /// Exhaustive search over all assignments.
    pub fn brute_force_sat(&self) -> bool {
        (0u32..1 << self.num_vars).any(|x| self.constraints.iter().all(|c| c.holds(x)))
    }
}

/// Whether the colored support graph commutes: every stabilizer pair has the
/// same Pauli type or an even number of commonly active qubits.
pub fn coloring_commutes(
    active: &BTreeMap<(usize, usize), bool>,
    pauli: &BTreeMap<usize, bool>,
) -> bool {
    let stabs: Vec<usize> = pauli.keys().copied().collect();
    for (i, &s1) in stabs.iter().enumerate() {
        for &s2 in &stabs[i + 1..] {
            if pauli[&s1] == pauli[&s2] {
                continue;
            }
            let overlap = active
                .iter()
                .filter(|(&(q, s), &on)| s == s1 && on && active.get(&(q, s2)) == Some(&true))
                .count();
            if overlap % 2 == 1 {
                return false;
            }
        }
    }
    true
}

/// Whether every auxiliary variable of a commutation system carries the value
/// its definition prescribes, given the activators and Pauli types.
pub fn auxiliaries_consistent(kinds: &[VarKind], x: u32) -> bool {
    let bit = |v: usize| x >> v & 1 == 1;
    let mut active = BTreeMap::new();
    let mut pauli = BTreeMap::new();
    for (v, k) in kinds.iter().enumerate() {
        match *k {
            VarKind::Activator { q, s } => {
                active.insert((q, s), bit(v));
            }
            VarKind::Pauli { s } => {
                pauli.insert(s, bit(v));
            }
            _ => {}
        }
    }
    kinds.iter().enumerate().all(|(v, k)| match *k {
        VarKind::Same { s1, s2 } => bit(v) == (pauli[&s1] == pauli[&s2]),
        VarKind::Even { s1, s2 } => {
            let overlap = active
                .iter()
                .filter(|(&(q, s), &on)| s == s1 && on && active.get(&(q, s2)) == Some(&true))
                .count();
            bit(v) == (overlap % 2 == 0)
        }
        VarKind::Both { q, s1, s2 } => bit(v) == (active[&(q, s1)] && active[&(q, s2)]),
        _ => true,
    })
}

/// Splits a commutation-system assignment into activator and Pauli maps.
pub fn primary_parts(
    kinds: &[VarKind],
    x: u32,
) -> (BTreeMap<(usize, usize), bool>, BTreeMap<usize, bool>) {
    let mut active = BTreeMap::new();
    let mut pauli = BTreeMap::new();
    for (v, k) in kinds.iter().enumerate() {
        match *k {
            VarKind::Activator { q, s } => {
                active.insert((q, s), x >> v & 1 == 1);
            }
            VarKind::Pauli { s } => {
                pauli.insert(s, x >> v & 1 == 1);
            }
            _ => {}
        }
    }
    (active, pauli)
}

/// Rows of a check matrix as bit masks over at most 64 qubits.
pub fn row_masks(rows: &[String]) -> Vec<u64> {
    rows.iter()
        .map(|r| {
            r.bytes()
                .enumerate()
                .filter(|&(_, b)| b == b'1')
                .fold(0u64, |m, (i, _)| m | 1 << i)
        })
        .collect()
}

fn matrix_masks(code: &CssCode, x_type: bool) -> Vec<u64> {
    let h = if x_type { code.hx() } else { code.hz() };
    row_masks(&h.to_bitstrings())
}

/// Whether every X row has even overlap with every Z row.
pub fn masks_commute(code: &CssCode) -> bool {
    let xs = matrix_masks(code, true);
    let zs = matrix_masks(code, false);
    xs.iter()
        .all(|x| zs.iter().all(|z| (x & z).count_ones() % 2 == 0))
}

/// Every element of the row space, by enumeration of row combinations.
fn row_space(rows: &[u64]) -> HashSet<u64> {
    let mut span = HashSet::from([0u64]);
    for &r in rows {
        let shifted: Vec<u64> = span.iter().map(|&v| v ^ r).collect();
        span.extend(shifted);
    }
    span
}

/// Brute-force class counter for one code.
pub struct ClassCounter {
    n: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    x_span: HashSet<u64>,
    z_span: HashSet<u64>,
}

impl ClassCounter {
    pub fn new(code: &CssCode) -> Self {
        assert!(code.n() <= 64);
        let xs = matrix_masks(code, true);
        let zs = matrix_masks(code, false);
        Self {
            n: code.n(),
            x_span: row_space(&xs),
            z_span: row_space(&zs),
            xs,
            zs,
        }
    }

    /// Operators of one type on the erasure that commute with the other
    /// type's checks, divided by the stabilizers of that type inside the
    /// erasure; returned as a base-2 logarithm.
    fn sector(e: u64, dual: &[u64], span: &HashSet<u64>) -> u32 {
        let mut logicals = 0u64;
        let mut sub = e;
        loop {
            if dual.iter().all(|d| (sub & d).count_ones() % 2 == 0) {
                logicals += 1;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & e;
        }
        let stabs = span.iter().filter(|&&v| v & !e == 0).count() as u64;
        assert_eq!(logicals % stabs, 0);
        let ratio = logicals / stabs;
        assert!(ratio.is_power_of_two());
        ratio.trailing_zeros()
    }

    pub fn log2(&self, e: &ErasurePattern) -> u32 {
        let mask = (0..self.n)
            .filter(|&q| e.is_erased(q))
            .fold(0u64, |m, q| m | 1 << q);
        Self::sector(mask, &self.zs, &self.x_span) + Self::sector(mask, &self.xs, &self.z_span)
    }

    /// Exact failure probability at erasure rate `p`, summing over every
    /// pattern.
    pub fn exact_failure(&self, p: f64) -> f64 {
        assert!(self.n <= 20);
        (0u64..1 << self.n)
            .map(|bits| {
                let e = ErasurePattern::from_indices(self.n, (0..self.n).filter(|q| bits >> q & 1 == 1));
                let w = bits.count_ones() as i32;
                let g = f64::from(self.log2(&e));
                p.powi(w) * (1.0 - p).powi(self.n as i32 - w) * (1.0 - (-g).exp2())
            })
            .sum()
    }
}

/// The `[[9,1,3]]` Shor code.
pub fn shor() -> CssCode {
    let hx = ["111111000", "000111111"];
    let hz = [
        "110000000", "011000000", "000110000", "000011000", "000000110", "000000011",
    ];
    code_from(9, &hx, &hz)
}

/// The `[[7,1,3]]` Steane code.
pub fn steane() -> CssCode {
    let h = ["1010101", "0110011", "0001111"];
    code_from(7, &h, &h)
}

pub fn code_from(n: usize, hx: &[&str], hz: &[&str]) -> CssCode {
    let rows = |r: &[&str]| r.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    CssCode::new(
        n,
        stabcolor::BitMatrix::from_bitstrings(n, &rows(hx)).unwrap(),
        stabcolor::BitMatrix::from_bitstrings(n, &rows(hz)).unwrap(),
    )
    .unwrap()
}
