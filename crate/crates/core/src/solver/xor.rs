//! Incremental Gauss-Jordan propagation for XOR constraints.
//!
//! XOR constraints are grouped into connected components (constraints sharing
//! variables). Each component is a dense bit matrix kept in reduced row
//! echelon form: every row owns one basic column that appears in no other
//! row. A row watches its basic column and one unassigned non-basic column.
//!
//! * When a watched non-basic variable is assigned the row looks for another
//!   unassigned non-basic column. If there is none, the basic variable is
//!   implied (or checked, if already assigned).
//! * When a basic variable is assigned the row pivots onto an unassigned
//!   non-basic column, eliminating that column from every other row, so basic
//!   variables stay unassigned for as long as possible.
//!
//! Row operations are never undone on backtracking: the matrix stays an
//! equivalent system, and watches only need to name unassigned variables or
//! be the most recent assignment of a fully assigned row.

use super::cdcl::{Conflict, Trail};
use super::lit::{LBool, Var, L};

const NONE: u32 = u32::MAX;

struct Component {
    /// Column -> solver variable.
    vars: Vec<Var>,
    words: usize,
    rows: Vec<u64>,
    rhs: Vec<bool>,
    basic: Vec<u32>,
    basic_row: Vec<u32>,
    watch: Vec<u32>,
    watchers: Vec<Vec<u32>>,
    /// Deduplicates rows listed twice in one watcher list.
    seen: Vec<u32>,
    epoch: u32,
}

/// Outcome of building the engine: the XOR part alone may already be
/// contradictory.
pub(super) enum Build {
    Ok(XorEngine),
    Unsat,
}

pub(super) struct XorEngine {
    comps: Vec<Component>,
    /// Per variable: `(component, column)` or `NONE` in the first slot.
    loc: Vec<(u32, u32)>,
}

impl XorEngine {
    /// `xors` are `(variables, parity)` with distinct variables.
    pub fn build(num_vars: usize, xors: &[(Vec<Var>, bool)]) -> Build {
        // Union-find over variables to split the system into components.
        let mut parent: Vec<usize> = (0..num_vars).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (vars, _) in xors {
            for w in vars.windows(2) {
                let (a, b) = (find(&mut parent, w[0] as usize), find(&mut parent, w[1] as usize));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }

        let mut comp_of_root = vec![NONE; num_vars];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (i, (vars, parity)) in xors.iter().enumerate() {
            if vars.is_empty() {
                if *parity {
                    return Build::Unsat;
                }
                continue;
            }
            let root = find(&mut parent, vars[0] as usize);
            if comp_of_root[root] == NONE {
                comp_of_root[root] = members.len() as u32;
                members.push(Vec::new());
            }
            members[comp_of_root[root] as usize].push(i);
        }

        let mut loc = vec![(NONE, NONE); num_vars];
        let mut comps = Vec::with_capacity(members.len());
        for rows in members {
            let ci = comps.len() as u32;
            let mut vars: Vec<Var> = Vec::new();
            for &r in &rows {
                for &v in &xors[r].0 {
                    if loc[v as usize].0 == NONE {
                        loc[v as usize] = (ci, vars.len() as u32);
                        vars.push(v);
                    }
                }
            }
            let ncols = vars.len();
            let words = ncols.div_ceil(64);
            let mut dense = vec![0u64; rows.len() * words];
            let mut rhs = Vec::with_capacity(rows.len());
            for (k, &r) in rows.iter().enumerate() {
                for &v in &xors[r].0 {
                    let c = loc[v as usize].1 as usize;
                    dense[k * words + c / 64] |= 1 << (c % 64);
                }
                rhs.push(xors[r].1);
            }
            match Component::reduce(vars, words, dense, rhs) {
                Some(c) => comps.push(c),
                None => return Build::Unsat,
            }
        }
        Build::Ok(XorEngine { comps, loc })
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    /// Sets up watches and emits the implications of single-variable rows.
    /// Called once before search.
    pub fn init(&mut self, trail: &mut Trail) -> Result<(), Conflict> {
        for comp in &mut self.comps {
            for r in 0..comp.rhs.len() {
                comp.settle(r as u32, trail)?;
            }
        }
        Ok(())
    }

    /// Processes the assignment of `var`.
    pub fn on_assign(&mut self, var: Var, trail: &mut Trail) -> Result<(), Conflict> {
        let (ci, col) = self.loc[var as usize];
        if ci == NONE {
            return Ok(());
        }
        self.comps[ci as usize].on_assign(col, trail)
    }
}

impl Component {
    /// Gauss-Jordan elimination. Pivots prefer the column with the fewest
    /// occurrences, which keeps rows sparse when a system already has a
    /// private variable per row. Returns `None` on `0 = 1`.
    fn reduce(vars: Vec<Var>, words: usize, dense: Vec<u64>, rhs_in: Vec<bool>) -> Option<Self> {
        let ncols = vars.len();
        let nrows_in = rhs_in.len();
        let mut occurrences = vec![0u32; ncols];
        for r in 0..nrows_in {
            for c in iter_bits(&dense[r * words..(r + 1) * words]) {
                occurrences[c] += 1;
            }
        }

        let mut rows: Vec<u64> = Vec::with_capacity(dense.len());
        let mut rhs: Vec<bool> = Vec::new();
        let mut basic: Vec<u32> = Vec::new();
        let mut basic_row = vec![NONE; ncols];
        let mut scratch = vec![0u64; words];
        for r in 0..nrows_in {
            scratch.copy_from_slice(&dense[r * words..(r + 1) * words]);
            let mut parity = rhs_in[r];
            // Eliminate existing pivots from the incoming row.
            for k in 0..basic.len() {
                let c = basic[k] as usize;
                if scratch[c / 64] >> (c % 64) & 1 == 1 {
                    for w in 0..words {
                        scratch[w] ^= rows[k * words + w];
                    }
                    parity ^= rhs[k];
                }
            }
            let Some(pivot) = iter_bits(&scratch).min_by_key(|&c| (occurrences[c], c)) else {
                if parity {
                    return None;
                }
                continue;
            };
            let k_new = basic.len();
            // Eliminate the new pivot from earlier rows.
            for k in 0..k_new {
                if rows[k * words + pivot / 64] >> (pivot % 64) & 1 == 1 {
                    for w in 0..words {
                        rows[k * words + w] ^= scratch[w];
                    }
                    rhs[k] ^= parity;
                }
            }
            rows.extend_from_slice(&scratch);
            rhs.push(parity);
            basic.push(pivot as u32);
            basic_row[pivot] = k_new as u32;
        }
        let nrows = basic.len();
        Some(Component {
            vars,
            words,
            rows,
            rhs,
            basic,
            basic_row,
            watch: vec![NONE; nrows],
            watchers: vec![Vec::new(); ncols],
            seen: vec![0; nrows],
            epoch: 0,
        })
    }

    #[inline]
    fn row(&self, r: u32) -> &[u64] {
        &self.rows[r as usize * self.words..(r as usize + 1) * self.words]
    }

    #[inline]
    fn has(&self, r: u32, c: u32) -> bool {
        self.rows[r as usize * self.words + c as usize / 64] >> (c % 64) & 1 == 1
    }

    #[inline]
    fn value(&self, c: u32, trail: &Trail) -> LBool {
        trail.var_value(self.vars[c as usize])
    }

    /// An unassigned non-basic column of row `r` other than `skip`.
    fn free_nonbasic(&self, r: u32, skip: u32, trail: &Trail) -> Option<u32> {
        let b = self.basic[r as usize];
        iter_bits(self.row(r))
            .map(|c| c as u32)
            .find(|&c| c != b && c != skip && self.value(c, trail) == LBool::Undef)
    }

    /// Makes `c` the watched non-basic column of row `r`.
    fn set_watch(&mut self, r: u32, c: u32) {
        if self.watch[r as usize] != c {
            self.watch[r as usize] = c;
            self.watchers[c as usize].push(r);
        }
    }

    /// Re-establishes the watch of row `r` after its content changed, and
    /// propagates or checks the row if it has no free non-basic column.
    fn settle(&mut self, r: u32, trail: &mut Trail) -> Result<(), Conflict> {
        let w = self.watch[r as usize];
        let b = self.basic[r as usize];
        if w != NONE && w != b && self.has(r, w) && self.value(w, trail) == LBool::Undef {
            return Ok(());
        }
        if let Some(c) = self.free_nonbasic(r, NONE, trail) {
            self.set_watch(r, c);
            return Ok(());
        }
        // Every non-basic column is assigned: watch the latest of them.
        let latest = iter_bits(self.row(r))
            .map(|c| c as u32)
            .filter(|&c| c != b)
            .max_by_key(|&c| trail.pos(self.vars[c as usize]));
        if let Some(c) = latest {
            self.set_watch(r, c);
        }
        self.resolve(r, trail)
    }

    /// All non-basic columns of `r` are assigned: imply or check the basic.
    fn resolve(&self, r: u32, trail: &mut Trail) -> Result<(), Conflict> {
        let b = self.basic[r as usize];
        let mut parity = self.rhs[r as usize];
        let mut reason = Vec::with_capacity(8);
        reason.push(L(0));
        for c in iter_bits(self.row(r)).map(|c| c as u32) {
            if c == b {
                continue;
            }
            let v = self.vars[c as usize];
            let val = trail.var_value(v) == LBool::True;
            parity ^= val;
            reason.push(L::new(v, !val));
        }
        let bv = self.vars[b as usize];
        match trail.var_value(bv) {
            LBool::Undef => {
                reason[0] = L::new(bv, parity);
                trail.enqueue_explained(reason);
                Ok(())
            }
            val => {
                if (val == LBool::True) == parity {
                    Ok(())
                } else {
                    reason[0] = L::new(bv, parity);
                    Err(Conflict::Lits(reason))
                }
            }
        }
    }

    fn on_assign(&mut self, col: u32, trail: &mut Trail) -> Result<(), Conflict> {
        let r = self.basic_row[col as usize];
        if r != NONE {
            return self.basic_assigned(r, col, trail);
        }
        let list = std::mem::take(&mut self.watchers[col as usize]);
        let mut keep = Vec::with_capacity(list.len());
        let mut result = Ok(());
        self.epoch = self.epoch.wrapping_add(1);
        for (i, &r) in list.iter().enumerate() {
            if self.watch[r as usize] != col || self.seen[r as usize] == self.epoch {
                continue;
            }
            self.seen[r as usize] = self.epoch;
            if let Some(c) = self.free_nonbasic(r, col, trail) {
                self.watch[r as usize] = c;
                self.watchers[c as usize].push(r);
                continue;
            }
            keep.push(r);
            if let Err(e) = self.resolve(r, trail) {
                keep.extend(
                    list[i + 1..]
                        .iter()
                        .copied()
                        .filter(|&r| self.watch[r as usize] == col),
                );
                result = Err(e);
                break;
            }
        }
        let slot = &mut self.watchers[col as usize];
        keep.append(slot);
        *slot = keep;
        result
    }

    /// The basic column `col` of row `r` was assigned: pivot `r` onto a free
    /// non-basic column, or check the row if none is left.
    fn basic_assigned(&mut self, r: u32, col: u32, trail: &mut Trail) -> Result<(), Conflict> {
        let Some(new_basic) = self.free_nonbasic(r, NONE, trail) else {
            return self.resolve(r, trail);
        };
        let words = self.words;
        let (wi, bit) = (new_basic as usize / 64, 1u64 << (new_basic % 64));
        let pivot_row: Vec<u64> = self.row(r).to_vec();
        let pivot_rhs = self.rhs[r as usize];
        let mut touched = Vec::new();
        for r2 in 0..self.rhs.len() {
            if r2 as u32 != r && self.rows[r2 * words + wi] & bit != 0 {
                for (w, &p) in pivot_row.iter().enumerate() {
                    self.rows[r2 * words + w] ^= p;
                }
                self.rhs[r2] ^= pivot_rhs;
                touched.push(r2 as u32);
            }
        }
        self.basic_row[col as usize] = NONE;
        self.basic_row[new_basic as usize] = r;
        self.basic[r as usize] = new_basic;
        if self.watch[r as usize] == new_basic {
            self.watch[r as usize] = NONE;
        }
        // Every touched row must get a valid watch again, even after a
        // conflict, so the first error is reported only at the end.
        let mut result = self.settle(r, trail);
        for r2 in touched {
            let settled = self.settle(r2, trail);
            if result.is_ok() {
                result = settled;
            }
        }
        result
    }
}

fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(i, &w)| {
        let mut x = w;
        std::iter::from_fn(move || {
            if x == 0 {
                return None;
            }
            let t = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(i * 64 + t)
        })
    })
}
