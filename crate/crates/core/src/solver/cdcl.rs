//! Conflict-driven clause learning search.
//!
//! Standard machinery: two watched literals per clause, first-UIP learning
//! with recursive minimization, VSIDS branching with phase saving, restarts
//! and LBD-based clause database reduction. Cardinality and XOR propagators
//! hook into the same trail and provide reason clauses on demand.

use std::time::Instant;

use rand::Rng;

use super::card::CardEngine;
use super::heap::VarHeap;
use super::lit::{LBool, Var, L};
use super::xor::{Build, XorEngine};
use super::{Assignment, LearnedPolicy, RestartPolicy, SolveResult, SolverConfig, SolverStats, Verdict};
use crate::encoder::{Cmp, Constraint, ConstraintSystem, VarKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(super) enum Reason {
    Decision,
    Clause(u32),
    Card(u32),
    /// Index into the explanation store.
    Explained(u32),
}

#[derive(Debug)]
pub(super) enum Conflict {
    Clause(u32),
    Lits(Vec<L>),
}

/// Assignment state shared by all propagators.
pub(super) struct Trail {
    value: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Reason>,
    position: Vec<u32>,
    lits: Vec<L>,
    lim: Vec<usize>,
    explanations: Vec<Vec<L>>,
    expl_lim: Vec<usize>,
}

impl Trail {
    fn new(num_vars: usize) -> Self {
        Self {
            value: vec![LBool::Undef; num_vars],
            level: vec![0; num_vars],
            reason: vec![Reason::Decision; num_vars],
            position: vec![0; num_vars],
            lits: Vec::with_capacity(num_vars),
            lim: Vec::new(),
            explanations: Vec::new(),
            expl_lim: Vec::new(),
        }
    }

    #[inline]
    pub fn var_value(&self, v: Var) -> LBool {
        self.value[v as usize]
    }

    #[inline]
    pub fn lit_value(&self, l: L) -> LBool {
        self.value[l.var() as usize].negate_if(!l.is_positive())
    }

    #[inline]
    pub fn pos(&self, v: Var) -> u32 {
        self.position[v as usize]
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.lim.len() as u32
    }

    pub fn enqueue(&mut self, l: L, reason: Reason) {
        let v = l.var() as usize;
        debug_assert_eq!(self.value[v], LBool::Undef);
        self.value[v] = LBool::from_bool(l.is_positive());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.position[v] = self.lits.len() as u32;
        self.lits.push(l);
    }

    /// Enqueues `expl[0]` with the clause `expl` as its reason.
    pub fn enqueue_explained(&mut self, expl: Vec<L>) {
        let l = expl[0];
        let id = self.explanations.len() as u32;
        self.explanations.push(expl);
        self.enqueue(l, Reason::Explained(id));
    }
}

struct Clause {
    lits: Vec<L>,
    learnt: bool,
    lbd: u32,
    activity: f32,
    deleted: bool,
}

#[derive(Clone, Copy)]
struct Watch {
    cref: u32,
    blocker: L,
}

pub(super) struct Search<'a> {
    cfg: &'a SolverConfig,
    trail: Trail,
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watch>>,
    cards: CardEngine,
    xors: Option<XorEngine>,
    qhead: usize,
    card_head: usize,
    xor_head: usize,
    activity: Vec<f64>,
    var_inc: f64,
    clause_inc: f32,
    heap: VarHeap,
    phase: Vec<bool>,
    seen: Vec<bool>,
    learnts: Vec<u32>,
    unsat: bool,
    stats: SolverStats,
}

const VAR_DECAY: f64 = 0.95;
const CLAUSE_DECAY: f32 = 0.999;

impl<'a> Search<'a> {
    pub fn new(cs: &ConstraintSystem, cfg: &'a SolverConfig) -> Self {
        let n = cs.num_vars();
        let mut s = Search {
            cfg,
            trail: Trail::new(n),
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            cards: CardEngine::new(n),
            xors: None,
            qhead: 0,
            card_head: 0,
            xor_head: 0,
            activity: vec![0.0; n],
            var_inc: 1.0,
            clause_inc: 1.0,
            heap: VarHeap::new(n),
            phase: vec![false; n],
            seen: vec![false; n],
            learnts: Vec::new(),
            unsat: false,
            stats: SolverStats::default(),
        };

        // Activators and Pauli variables determine everything else; start
        // them ahead of the auxiliaries. The seed only breaks ties.
        let mut rng = crate::rng::rng_from_seed(cfg.seed);
        for (v, kind) in cs.variables().iter().enumerate() {
            let base = match kind {
                VarKind::Pauli { .. } => 2.0,
                VarKind::Activator { .. } => 1.0,
                _ => 0.0,
            };
            s.activity[v] = base + rng.gen::<f64>() * 1e-3;
            if matches!(kind, VarKind::Pauli { .. }) {
                s.phase[v] = rng.gen();
            }
        }
        for v in 0..n {
            s.heap.insert(v as Var, &s.activity);
        }

        let mut units = Vec::new();
        let mut xor_rows = Vec::new();
        for c in cs.constraints() {
            match c {
                Constraint::Or { lits } => {
                    let lits: Vec<L> = lits.iter().map(|&l| L::from(l)).collect();
                    if lits.is_empty() {
                        s.unsat = true;
                    } else if lits.len() == 1 {
                        units.push(lits[0]);
                    } else {
                        s.attach_clause(lits, false, 0);
                    }
                }
                Constraint::Xor { vars, parity } => {
                    xor_rows.push((vars.iter().map(|&v| v as Var).collect::<Vec<_>>(), *parity));
                }
                Constraint::Linear { vars, cmp, bound } => {
                    let len = vars.len() as i64;
                    let pos: Vec<L> = vars.iter().map(|&v| L::new(v as Var, true)).collect();
                    let neg: Vec<L> = vars.iter().map(|&v| L::new(v as Var, false)).collect();
                    // Σx ≥ k, and Σx ≤ k as Σ¬x ≥ len - k.
                    let add = |lits: Vec<L>, k: i64, s: &mut Search| {
                        if k > len {
                            s.unsat = true;
                        } else if k > 0 {
                            s.cards.add(lits, k as u32);
                        }
                    };
                    match cmp {
                        Cmp::Ge => add(pos, *bound, &mut s),
                        Cmp::Le => add(neg, len - bound, &mut s),
                        Cmp::Eq => {
                            add(pos, *bound, &mut s);
                            add(neg, len - bound, &mut s);
                        }
                    }
                }
            }
        }
        match XorEngine::build(n, &xor_rows) {
            Build::Ok(engine) if engine.is_empty() => {}
            Build::Ok(engine) => s.xors = Some(engine),
            Build::Unsat => s.unsat = true,
        }
        if s.unsat {
            return s;
        }
        // The XOR engine settles its rows against an empty trail; everything
        // enqueued from here on reaches it through the propagation loop.
        if let Some(x) = s.xors.as_mut() {
            if x.init(&mut s.trail).is_err() {
                s.unsat = true;
                return s;
            }
        }

        for l in units {
            match s.trail.lit_value(l) {
                LBool::Undef => s.trail.enqueue(l, Reason::Decision),
                LBool::False => {
                    s.unsat = true;
                    return s;
                }
                LBool::True => {}
            }
        }
        if s.cards.initial_units(&mut s.trail).is_err() {
            s.unsat = true;
            return s;
        }
        s
    }

    fn attach_clause(&mut self, lits: Vec<L>, learnt: bool, lbd: u32) -> u32 {
        debug_assert!(lits.len() >= 2);
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].idx()].push(Watch {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].idx()].push(Watch {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause {
            lits,
            learnt,
            lbd,
            activity: 0.0,
            deleted: false,
        });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    pub fn run(mut self) -> SolveResult {
        let start = Instant::now();
        let deadline = start + self.cfg.budget();
        let verdict = if self.unsat {
            Verdict::Unsat
        } else {
            self.search(deadline)
        };
        self.stats.wall_time_s = start.elapsed().as_secs_f64();
        SolveResult {
            verdict,
            stats: self.stats,
        }
    }

    fn search(&mut self, deadline: Instant) -> Verdict {
        let mut restart_idx = 0u64;
        let mut next_restart = self.restart_interval(restart_idx);
        let mut conflicts_since_restart = 0u64;
        let mut next_reduce = match self.cfg.learned {
            LearnedPolicy::Lbd { first_reduce, .. } => first_reduce,
            LearnedPolicy::KeepAll => u64::MAX,
        };
        let mut reductions = 0u64;

        loop {
            match self.propagate() {
                Some(conflict) => {
                    self.stats.conflicts += 1;
                    conflicts_since_restart += 1;
                    if self.trail.decision_level() == 0 {
                        return Verdict::Unsat;
                    }
                    let (learnt, back_level, lbd) = self.analyze(conflict);
                    self.backtrack(back_level);
                    if learnt.len() == 1 {
                        self.trail.enqueue(learnt[0], Reason::Decision);
                    } else {
                        let first = learnt[0];
                        let cref = self.attach_clause(learnt, true, lbd);
                        self.bump_clause(cref);
                        self.trail.enqueue(first, Reason::Clause(cref));
                    }
                    self.stats.learned += 1;
                    self.var_inc /= VAR_DECAY;
                    self.clause_inc /= CLAUSE_DECAY;

                    if self.stats.conflicts.is_multiple_of(32) && Instant::now() >= deadline {
                        return Verdict::Unknown;
                    }
                }
                None => {
                    if conflicts_since_restart >= next_restart {
                        restart_idx += 1;
                        next_restart = self.restart_interval(restart_idx);
                        conflicts_since_restart = 0;
                        self.stats.restarts += 1;
                        self.backtrack(0);
                        continue;
                    }
                    if self.stats.conflicts >= next_reduce {
                        reductions += 1;
                        if let LearnedPolicy::Lbd { first_reduce, increment } = self.cfg.learned {
                            next_reduce = self.stats.conflicts + first_reduce + increment * reductions;
                        }
                        self.reduce_db();
                    }
                    let Some(v) = self.pick_branch() else {
                        let values = self
                            .trail
                            .value
                            .iter()
                            .map(|&v| v == LBool::True)
                            .collect();
                        return Verdict::Sat(Assignment::new(values));
                    };
                    self.stats.decisions += 1;
                    if self.stats.decisions.is_multiple_of(1024) && Instant::now() >= deadline {
                        return Verdict::Unknown;
                    }
                    self.trail.lim.push(self.trail.lits.len());
                    self.trail.expl_lim.push(self.trail.explanations.len());
                    self.trail
                        .enqueue(L::new(v, self.phase[v as usize]), Reason::Decision);
                }
            }
        }
    }

    fn restart_interval(&self, i: u64) -> u64 {
        match self.cfg.restarts {
            RestartPolicy::Luby { unit } => unit * luby(i),
            RestartPolicy::Geometric { first, factor } => {
                (first as f64 * factor.powi(i.min(60) as i32)).min(1e15) as u64
            }
            RestartPolicy::Never => u64::MAX,
        }
    }

    fn pick_branch(&mut self) -> Option<Var> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.trail.var_value(v) == LBool::Undef {
                return Some(v);
            }
        }
        None
    }

    /// Runs all propagators to fixpoint. Clauses first; each theory
    /// propagator consumes the trail with its own cursor.
    fn propagate(&mut self) -> Option<Conflict> {
        loop {
            if self.qhead < self.trail.lits.len() {
                let p = self.trail.lits[self.qhead];
                self.qhead += 1;
                self.stats.propagations += 1;
                if let Some(c) = self.propagate_clauses(p) {
                    return Some(c);
                }
                continue;
            }
            if self.card_head < self.trail.lits.len() {
                let p = self.trail.lits[self.card_head];
                self.card_head += 1;
                if let Err(c) = self.cards.on_true(p, &mut self.trail) {
                    return Some(c);
                }
                continue;
            }
            if self.xor_head < self.trail.lits.len() {
                let p = self.trail.lits[self.xor_head];
                self.xor_head += 1;
                if let Some(x) = self.xors.as_mut() {
                    if let Err(c) = x.on_assign(p.var(), &mut self.trail) {
                        return Some(c);
                    }
                }
                continue;
            }
            return None;
        }
    }

    fn propagate_clauses(&mut self, p: L) -> Option<Conflict> {
        let false_lit = !p;
        let mut ws = std::mem::take(&mut self.watches[false_lit.idx()]);
        let mut i = 0;
        let mut j = 0;
        let mut conflict = None;
        'next: while i < ws.len() {
            let w = ws[i];
            i += 1;
            if self.trail.lit_value(w.blocker) == LBool::True {
                ws[j] = w;
                j += 1;
                continue;
            }
            let clause = &mut self.clauses[w.cref as usize];
            if clause.deleted {
                continue;
            }
            if clause.lits[0] == false_lit {
                clause.lits.swap(0, 1);
            }
            let first = clause.lits[0];
            let watch = Watch {
                cref: w.cref,
                blocker: first,
            };
            if first != w.blocker && self.trail.lit_value(first) == LBool::True {
                ws[j] = watch;
                j += 1;
                continue;
            }
            for k in 2..clause.lits.len() {
                let l = clause.lits[k];
                if self.trail.lit_value(l) != LBool::False {
                    clause.lits.swap(1, k);
                    self.watches[l.idx()].push(watch);
                    continue 'next;
                }
            }
            ws[j] = watch;
            j += 1;
            if self.trail.lit_value(first) == LBool::False {
                conflict = Some(Conflict::Clause(w.cref));
                while i < ws.len() {
                    ws[j] = ws[i];
                    i += 1;
                    j += 1;
                }
            } else {
                self.trail.enqueue(first, Reason::Clause(w.cref));
            }
        }
        ws.truncate(j);
        self.watches[false_lit.idx()] = ws;
        conflict
    }

    /// Literals of the reason of `v`, the implied literal first.
    fn reason_lits(&self, v: Var) -> Vec<L> {
        match self.trail.reason[v as usize] {
            Reason::Decision => Vec::new(),
            Reason::Clause(c) => self.clauses[c as usize].lits.clone(),
            Reason::Card(c) => {
                let implied = L::new(v, self.trail.var_value(v) == LBool::True);
                self.cards.explain(c, implied, &self.trail)
            }
            Reason::Explained(e) => self.trail.explanations[e as usize].clone(),
        }
    }

    fn analyze(&mut self, conflict: Conflict) -> (Vec<L>, u32, u32) {
        let current = self.trail.decision_level();
        let mut learnt: Vec<L> = vec![L(0)];
        let mut path = 0usize;
        let mut idx = self.trail.lits.len();
        let mut lits = match conflict {
            Conflict::Clause(c) => {
                self.bump_clause(c);
                self.clauses[c as usize].lits.clone()
            }
            Conflict::Lits(l) => l,
        };
        let mut skip_first = false;
        let uip = loop {
            for &q in lits.iter().skip(usize::from(skip_first)) {
                let v = q.var() as usize;
                if !self.seen[v] && self.trail.level[v] > 0 {
                    self.bump_var(q.var());
                    self.seen[v] = true;
                    if self.trail.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail.lits[idx].var() as usize] {
                    break;
                }
            }
            let p = self.trail.lits[idx];
            self.seen[p.var() as usize] = false;
            path -= 1;
            if path == 0 {
                break p;
            }
            if let Reason::Clause(c) = self.trail.reason[p.var() as usize] {
                self.bump_clause(c);
            }
            lits = self.reason_lits(p.var());
            debug_assert_eq!(lits[0], p);
            skip_first = true;
        };
        learnt[0] = !uip;

        // Recursive minimization.
        let abstract_levels = learnt[1..]
            .iter()
            .fold(0u64, |acc, l| acc | 1 << (self.trail.level[l.var() as usize] % 64));
        let mut cleared: Vec<Var> = learnt[1..].iter().map(|l| l.var()).collect();
        let mut kept = vec![learnt[0]];
        for &l in &learnt[1..] {
            if matches!(self.trail.reason[l.var() as usize], Reason::Decision)
                || !self.redundant(l, abstract_levels, &mut cleared)
            {
                kept.push(l);
            }
        }
        for v in cleared {
            self.seen[v as usize] = false;
        }
        let mut learnt = kept;

        let mut back_level = 0;
        if learnt.len() > 1 {
            let (max_i, _) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .max_by_key(|(_, l)| self.trail.level[l.var() as usize])
                .unwrap();
            learnt.swap(1, max_i);
            back_level = self.trail.level[learnt[1].var() as usize];
        }
        let mut levels: Vec<u32> = learnt.iter().map(|l| self.trail.level[l.var() as usize]).collect();
        levels.sort_unstable();
        levels.dedup();
        (learnt, back_level, levels.len() as u32)
    }

    /// Whether `l` is implied by the other literals of the learnt clause.
    fn redundant(&mut self, l: L, abstract_levels: u64, cleared: &mut Vec<Var>) -> bool {
        let mut stack = vec![l];
        let top = cleared.len();
        while let Some(p) = stack.pop() {
            let reason = self.reason_lits(p.var());
            for &q in reason.iter().skip(1) {
                let v = q.var() as usize;
                if self.seen[v] || self.trail.level[v] == 0 {
                    continue;
                }
                let is_decision = matches!(self.trail.reason[v], Reason::Decision);
                if !is_decision && abstract_levels & (1 << (self.trail.level[v] % 64)) != 0 {
                    self.seen[v] = true;
                    stack.push(q);
                    cleared.push(q.var());
                } else {
                    for &c in &cleared[top..] {
                        self.seen[c as usize] = false;
                    }
                    cleared.truncate(top);
                    return false;
                }
            }
        }
        true
    }

    fn backtrack(&mut self, level: u32) {
        if self.trail.decision_level() <= level {
            return;
        }
        let start = self.trail.lim[level as usize];
        for i in (start..self.trail.lits.len()).rev() {
            let l = self.trail.lits[i];
            let v = l.var();
            if i < self.card_head {
                self.cards.undo(l);
            }
            self.trail.value[v as usize] = LBool::Undef;
            self.phase[v as usize] = l.is_positive();
            self.heap.insert(v, &self.activity);
        }
        self.trail.lits.truncate(start);
        let expl = self.trail.expl_lim[level as usize];
        self.trail.explanations.truncate(expl);
        self.trail.lim.truncate(level as usize);
        self.trail.expl_lim.truncate(level as usize);
        self.qhead = self.qhead.min(start);
        self.card_head = self.card_head.min(start);
        self.xor_head = self.xor_head.min(start);
    }

    fn bump_var(&mut self, v: Var) {
        let a = &mut self.activity[v as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in &mut self.activity {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increased(v, &self.activity);
    }

    fn bump_clause(&mut self, c: u32) {
        let clause = &mut self.clauses[c as usize];
        if !clause.learnt {
            return;
        }
        clause.activity += self.clause_inc;
        if clause.activity > 1e20 {
            for &l in &self.learnts {
                self.clauses[l as usize].activity *= 1e-20;
            }
            self.clause_inc *= 1e-20;
        }
    }

    fn locked(&self, cref: u32) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        self.trail.lit_value(first) == LBool::True
            && self.trail.reason[first.var() as usize] == Reason::Clause(cref)
    }

    fn reduce_db(&mut self) {
        let mut candidates: Vec<u32> = self
            .learnts
            .iter()
            .copied()
            .filter(|&c| self.clauses[c as usize].lbd > 2 && !self.locked(c))
            .collect();
        candidates.sort_by(|&a, &b| {
            let (ca, cb) = (&self.clauses[a as usize], &self.clauses[b as usize]);
            cb.lbd
                .cmp(&ca.lbd)
                .then(ca.activity.total_cmp(&cb.activity))
                .then(a.cmp(&b))
        });
        let drop = candidates.len() / 2;
        for &c in &candidates[..drop] {
            let clause = &mut self.clauses[c as usize];
            clause.deleted = true;
            clause.lits = Vec::new();
        }
        self.learnts.retain(|&c| !self.clauses[c as usize].deleted);
        let clauses = &self.clauses;
        for ws in &mut self.watches {
            ws.retain(|w| !clauses[w.cref as usize].deleted);
        }
    }


}

/// The Luby sequence 1, 1, 2, 1, 1, 2, 4, ... (0-indexed).
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}
