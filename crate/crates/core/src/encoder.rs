//! Constraint encoding of CSS stabilizing edge coloring.
//!
//! Every support edge `{q, S}` gets an activator variable (edge is part of the
//! Tanner graph) and every stabilizer a Pauli variable (`1` = X type, `0` = Z
//! type). For each pair of stabilizers sharing at least one candidate qubit,
//! three auxiliaries tie the commutation condition together:
//!
//! * `same(S, S')` equals `1` iff both stabilizers have the same type,
//! * `even(S, S')` equals `1` iff the active overlap has even size,
//! * `both(q, S, S')` equals `1` iff both edges at `q` are active,
//!
//! and the pair commutes iff `same ∨ even`. Optional degree and balancing
//! bounds are added by [`add_degree_and_balance`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graphgen::SupportGraph;
use crate::{Error, Result, FORMAT_VERSION};

pub type VarId = usize;

/// What a boolean variable stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarKind {
    Activator { q: usize, s: usize },
    Pauli { s: usize },
    Same { s1: usize, s2: usize },
    Even { s1: usize, s2: usize },
    Both { q: usize, s1: usize, s2: usize },
    XType { q: usize, s: usize },
    ZType { q: usize, s: usize },
    /// A variable without graph meaning, used by hand-built systems.
    Free { index: usize },
}

/// A variable with a polarity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i64", try_from = "i64")]
pub struct Lit {
    pub var: VarId,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: VarId) -> Self {
        Lit {
            var,
            positive: true,
        }
    }

    pub fn neg(var: VarId) -> Self {
        Lit {
            var,
            positive: false,
        }
    }

    /// Truth value of the literal when its variable takes `value`.
    pub fn eval(self, value: bool) -> bool {
        value == self.positive
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "¬x{}", self.var)
        }
    }
}

impl From<Lit> for i64 {
    fn from(l: Lit) -> i64 {
        let v = l.var as i64 + 1;
        if l.positive {
            v
        } else {
            -v
        }
    }
}

impl TryFrom<i64> for Lit {
    type Error = String;

    fn try_from(v: i64) -> std::result::Result<Self, String> {
        if v == 0 {
            return Err("literal 0 is not allowed".into());
        }
        Ok(Lit {
            var: (v.unsigned_abs() - 1) as usize,
            positive: v > 0,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

impl Cmp {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Ge => lhs >= rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Constraint {
    /// At least one literal true.
    Or { lits: Vec<Lit> },
    /// XOR of the variables equals `parity`.
    Xor { vars: Vec<VarId>, parity: bool },
    /// `Σ vars  cmp  bound`, all coefficients `+1`.
    Linear { vars: Vec<VarId>, cmp: Cmp, bound: i64 },
}

impl Constraint {
    pub fn or(lits: Vec<Lit>) -> Self {
        Constraint::Or { lits }
    }

    pub fn xor(vars: Vec<VarId>, parity: bool) -> Self {
        Constraint::Xor { vars, parity }
    }

    pub fn linear(vars: Vec<VarId>, cmp: Cmp, bound: i64) -> Self {
        Constraint::Linear { vars, cmp, bound }
    }

    pub fn width(&self) -> usize {
        match self {
            Constraint::Or { lits } => lits.len(),
            Constraint::Xor { vars, .. } | Constraint::Linear { vars, .. } => vars.len(),
        }
    }

    pub fn vars(&self) -> Vec<VarId> {
        match self {
            Constraint::Or { lits } => lits.iter().map(|l| l.var).collect(),
            Constraint::Xor { vars, .. } | Constraint::Linear { vars, .. } => vars.clone(),
        }
    }
}

/// Which rule of the encoding produced a constraint. The index identifies the
/// group a constraint belongs to (pair, edge, qubit, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "rule", content = "index", rename_all = "snake_case")]
pub enum Origin {
    Commute(usize),
    SameType(usize),
    EvenOverlap(usize),
    BothActive(VarId),
    XTypeDef(usize),
    ZTypeDef(usize),
    QubitXBound(usize),
    QubitZBound(usize),
    StabilizerDegree(usize),
    Balance,
    External,
}

impl Origin {
    pub fn category(self) -> Category {
        match self {
            Origin::Commute(_) => Category::Commute,
            Origin::SameType(_) => Category::SameType,
            Origin::EvenOverlap(_) => Category::EvenOverlap,
            Origin::BothActive(_) => Category::BothActive,
            Origin::XTypeDef(_) => Category::XTypeDef,
            Origin::ZTypeDef(_) => Category::ZTypeDef,
            Origin::QubitXBound(_) => Category::QubitXBound,
            Origin::QubitZBound(_) => Category::QubitZBound,
            Origin::StabilizerDegree(_) => Category::StabilizerDegree,
            Origin::Balance => Category::Balance,
            Origin::External => Category::External,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Commute,
    SameType,
    EvenOverlap,
    BothActive,
    XTypeDef,
    ZTypeDef,
    QubitXBound,
    QubitZBound,
    StabilizerDegree,
    Balance,
    External,
}

/// Degree and balancing requirements on top of commutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingParams {
    /// Minimum number of active X-type and of active Z-type edges per qubit.
    pub delta_q: u32,
    /// Minimum active edges per stabilizer.
    pub delta_s: u32,
    /// Maximum active edges per stabilizer; `None` is unbounded.
    pub max_s: Option<u32>,
    /// Require exactly `⌊m/2⌋` X-type stabilizers.
    pub balancing: bool,
}

impl Default for EncodingParams {
    fn default() -> Self {
        Self::commutation_only()
    }
}

impl EncodingParams {
    pub fn commutation_only() -> Self {
        Self {
            delta_q: 0,
            delta_s: 0,
            max_s: None,
            balancing: false,
        }
    }

    /// Minimum qubit degree only (`δ_s = 0`, `Δ_s = ∞`, no balancing).
    pub fn qubit_degree(delta_q: u32) -> Self {
        Self {
            delta_q,
            ..Self::commutation_only()
        }
    }

    /// The sparse regime: `δ_q = 3, δ_s = 6, Δ_s = 20` with balancing.
    pub fn ldpc() -> Self {
        Self {
            delta_q: 3,
            delta_s: 6,
            max_s: Some(20),
            balancing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(max) = self.max_s {
            if self.delta_s > max {
                return Err(Error::param(format!(
                    "delta_s = {} exceeds Delta_s = {max}",
                    self.delta_s
                )));
            }
        }
        Ok(())
    }

    pub fn is_commutation_only(&self) -> bool {
        *self == Self::commutation_only()
    }
}

/// Auxiliary variables of one stabilizer pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairVars {
    pub s1: usize,
    pub s2: usize,
    pub same: VarId,
    pub even: VarId,
    /// `(q, both(q, s1, s2))` for every shared qubit, ascending in `q`.
    pub both: Vec<(usize, VarId)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    graph: Option<SupportGraph>,
    params: EncodingParams,
    variables: Vec<VarKind>,
    constraints: Vec<Constraint>,
    origins: Vec<Origin>,
    pairs: Vec<PairVars>,
    x_type_base: Option<VarId>,
}

impl ConstraintSystem {
    /// An empty system over `num_vars` free variables.
    pub fn with_free_vars(num_vars: usize) -> Self {
        Self {
            graph: None,
            params: EncodingParams::commutation_only(),
            variables: (0..num_vars).map(|index| VarKind::Free { index }).collect(),
            constraints: Vec::new(),
            origins: Vec::new(),
            pairs: Vec::new(),
            x_type_base: None,
        }
    }

    pub fn graph(&self) -> Option<&SupportGraph> {
        self.graph.as_ref()
    }

    pub fn params(&self) -> &EncodingParams {
        &self.params
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[VarKind] {
        &self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn origins(&self) -> &[Origin] {
        &self.origins
    }

    pub fn pairs(&self) -> &[PairVars] {
        &self.pairs
    }

    /// Activator of the `e`-th edge in canonical order.
    pub fn activator(&self, edge: usize) -> VarId {
        edge
    }

    pub fn pauli(&self, s: usize) -> VarId {
        let g = self.graph.as_ref().expect("graph-backed system");
        g.edge_count() + s
    }

    pub fn x_type(&self, edge: usize) -> Option<VarId> {
        self.x_type_base.map(|b| b + 2 * edge)
    }

    pub fn z_type(&self, edge: usize) -> Option<VarId> {
        self.x_type_base.map(|b| b + 2 * edge + 1)
    }

    pub fn new_var(&mut self, kind: VarKind) -> VarId {
        self.variables.push(kind);
        self.variables.len() - 1
    }

    /// Appends a constraint after checking it is well formed.
    pub fn push(&mut self, constraint: Constraint, origin: Origin) -> Result<()> {
        validate_constraint(&constraint, self.num_vars())?;
        self.constraints.push(constraint);
        self.origins.push(origin);
        Ok(())
    }

    fn push_trusted(&mut self, constraint: Constraint, origin: Origin) {
        debug_assert!(validate_constraint(&constraint, self.num_vars()).is_ok());
        self.constraints.push(constraint);
        self.origins.push(origin);
    }

    /// Adds `out = a ∧ b` as three clauses.
    fn define_and(&mut self, out: Lit, a: Lit, b: Lit, origin: Origin) {
        self.push_trusted(Constraint::or(vec![!out, a]), origin);
        self.push_trusted(Constraint::or(vec![!out, b]), origin);
        self.push_trusted(Constraint::or(vec![out, !a, !b]), origin);
    }

    /// Checks every structural invariant; used before solving.
    pub fn validate(&self) -> Result<()> {
        if self.constraints.len() != self.origins.len() {
            return Err(Error::Structure("origin table out of sync".into()));
        }
        for c in &self.constraints {
            validate_constraint(c, self.num_vars())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SystemDoc {
            format_version: FORMAT_VERSION,
            params: self.params,
            num_vars: self.variables.len(),
            variables: self.variables.clone(),
            constraints: self
                .constraints
                .iter()
                .zip(&self.origins)
                .map(|(c, &origin)| TaggedConstraint {
                    origin,
                    constraint: c.clone(),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    /// Reads a system written by [`ConstraintSystem::to_json`]. The graph
    /// link is not stored in the document, so the result is graph-free.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SystemDoc = serde_json::from_str(text)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported system format_version {}",
                doc.format_version
            )));
        }
        if doc.num_vars != doc.variables.len() {
            return Err(Error::Parse("num_vars does not match variable list".into()));
        }
        let mut cs = ConstraintSystem {
            graph: None,
            params: doc.params,
            variables: doc.variables,
            constraints: Vec::new(),
            origins: Vec::new(),
            pairs: Vec::new(),
            x_type_base: None,
        };
        for t in doc.constraints {
            cs.push(t.constraint, t.origin)?;
        }
        Ok(cs)
    }
}

#[derive(Serialize, Deserialize)]
struct SystemDoc {
    format_version: u32,
    params: EncodingParams,
    num_vars: usize,
    variables: Vec<VarKind>,
    constraints: Vec<TaggedConstraint>,
}

#[derive(Serialize, Deserialize)]
struct TaggedConstraint {
    origin: Origin,
    #[serde(flatten)]
    constraint: Constraint,
}

fn validate_constraint(c: &Constraint, num_vars: usize) -> Result<()> {
    let vars = c.vars();
    // An empty sum is a constant comparison; clause and parity lists must be non-empty.
    if vars.is_empty() && !matches!(c, Constraint::Linear { .. }) {
        return Err(Error::Structure("constraint with no variables".into()));
    }
    if let Some(v) = vars.iter().find(|&&v| v >= num_vars) {
        return Err(Error::Structure(format!(
            "variable {v} out of range ({num_vars} variables)"
        )));
    }
    let distinct: BTreeSet<_> = vars.iter().collect();
    if distinct.len() != vars.len() {
        return Err(Error::Structure(format!(
            "duplicate variable in constraint {c:?}"
        )));
    }
    Ok(())
}

/// Encodes the commutation constraints of every stabilizer pair that shares
/// at least one candidate qubit.
///
/// Variable ids: activators `0..E` in edge order, Pauli variables `E..E+m`,
/// then per pair (lexicographic `s1 < s2`) `same`, `even`, and one `both` per
/// shared qubit.
pub fn encode_commutation(g: &SupportGraph) -> ConstraintSystem {
    let mut cs = ConstraintSystem {
        graph: Some(g.clone()),
        params: EncodingParams::commutation_only(),
        variables: Vec::new(),
        constraints: Vec::new(),
        origins: Vec::new(),
        pairs: Vec::new(),
        x_type_base: None,
    };
    for &(q, s) in g.edges() {
        cs.new_var(VarKind::Activator { q, s });
    }
    for s in 0..g.m() {
        cs.new_var(VarKind::Pauli { s });
    }

    let adj = g.stabilizer_neighbors();
    for s1 in 0..g.m() {
        for s2 in s1 + 1..g.m() {
            let shared = sorted_intersection(&adj[s1], &adj[s2]);
            if shared.is_empty() {
                continue;
            }
            let pair = cs.pairs.len();
            let same = cs.new_var(VarKind::Same { s1, s2 });
            let even = cs.new_var(VarKind::Even { s1, s2 });
            let both: Vec<(usize, VarId)> = shared
                .iter()
                .map(|&q| (q, cs.new_var(VarKind::Both { q, s1, s2 })))
                .collect();

            cs.push_trusted(
                Constraint::or(vec![Lit::pos(same), Lit::pos(even)]),
                Origin::Commute(pair),
            );
            // same ⊕ p(S) ⊕ p(S') = 1
            cs.push_trusted(
                Constraint::xor(vec![same, cs.pauli(s1), cs.pauli(s2)], true),
                Origin::SameType(pair),
            );
            // even ⊕ (⊕ both) = 1
            let mut vars = vec![even];
            vars.extend(both.iter().map(|&(_, b)| b));
            cs.push_trusted(Constraint::xor(vars, true), Origin::EvenOverlap(pair));
            for &(q, b) in &both {
                let a1 = g.edge_index(q, s1).expect("shared qubit edge");
                let a2 = g.edge_index(q, s2).expect("shared qubit edge");
                cs.define_and(
                    Lit::pos(b),
                    Lit::pos(cs.activator(a1)),
                    Lit::pos(cs.activator(a2)),
                    Origin::BothActive(b),
                );
            }
            cs.pairs.push(PairVars {
                s1,
                s2,
                same,
                even,
                both,
            });
        }
    }
    cs
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Adds qubit-degree, stabilizer-degree and balancing constraints to a
/// commutation-only system.
///
/// Degree bounds larger than what the graph offers are encoded as is; the
/// instance is then unsatisfiable and the solver reports it.
pub fn add_degree_and_balance(
    mut cs: ConstraintSystem,
    params: EncodingParams,
) -> Result<ConstraintSystem> {
    params.validate()?;
    if !cs.params.is_commutation_only() {
        return Err(Error::param("system already carries degree constraints"));
    }
    let g = cs
        .graph
        .clone()
        .ok_or_else(|| Error::param("degree constraints need a graph-backed system"))?;
    cs.params = params;

    if params.delta_q > 0 {
        let base = cs.num_vars();
        cs.x_type_base = Some(base);
        for (e, &(q, s)) in g.edges().iter().enumerate() {
            let x = cs.new_var(VarKind::XType { q, s });
            let z = cs.new_var(VarKind::ZType { q, s });
            debug_assert_eq!((x, z), (base + 2 * e, base + 2 * e + 1));
        }
        for (e, &(_, s)) in g.edges().iter().enumerate() {
            let a = Lit::pos(cs.activator(e));
            let p = Lit::pos(cs.pauli(s));
            let x = cs.x_type(e).unwrap();
            let z = cs.z_type(e).unwrap();
            cs.define_and(Lit::pos(x), a, p, Origin::XTypeDef(e));
            cs.define_and(Lit::pos(z), a, !p, Origin::ZTypeDef(e));
        }
        let mut per_qubit: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
        for (e, &(q, _)) in g.edges().iter().enumerate() {
            per_qubit[q].push(e);
        }
        let bound = i64::from(params.delta_q);
        for (q, edges) in per_qubit.iter().enumerate() {
            let xs: Vec<VarId> = edges.iter().map(|&e| cs.x_type(e).unwrap()).collect();
            let zs: Vec<VarId> = edges.iter().map(|&e| cs.z_type(e).unwrap()).collect();
            cs.push_trusted(Constraint::linear(xs, Cmp::Ge, bound), Origin::QubitXBound(q));
            cs.push_trusted(Constraint::linear(zs, Cmp::Ge, bound), Origin::QubitZBound(q));
        }
    }

    if params.delta_s > 0 || params.max_s.is_some() {
        let mut per_stab: Vec<Vec<usize>> = vec![Vec::new(); g.m()];
        for (e, &(_, s)) in g.edges().iter().enumerate() {
            per_stab[s].push(e);
        }
        for (s, edges) in per_stab.iter().enumerate() {
            let vars: Vec<VarId> = edges.iter().map(|&e| cs.activator(e)).collect();
            if params.delta_s > 0 {
                cs.push_trusted(
                    Constraint::linear(vars.clone(), Cmp::Ge, i64::from(params.delta_s)),
                    Origin::StabilizerDegree(s),
                );
            }
            if let Some(max) = params.max_s {
                if (max as usize) < vars.len() {
                    cs.push_trusted(
                        Constraint::linear(vars, Cmp::Le, i64::from(max)),
                        Origin::StabilizerDegree(s),
                    );
                }
            }
        }
    }

    if params.balancing {
        let vars: Vec<VarId> = (0..g.m()).map(|s| cs.pauli(s)).collect();
        cs.push_trusted(
            Constraint::linear(vars, Cmp::Eq, (g.m() / 2) as i64),
            Origin::Balance,
        );
    }
    Ok(cs)
}

/// Commutation constraints plus whatever `params` asks for.
pub fn encode(g: &SupportGraph, params: EncodingParams) -> Result<ConstraintSystem> {
    let cs = encode_commutation(g);
    if params.is_commutation_only() {
        return Ok(cs);
    }
    add_degree_and_balance(cs, params)
}

/// Per-category tally of one rule of the encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CategoryCount {
    /// Number of constraint groups (one per pair, edge, qubit, ...).
    pub groups: usize,
    /// Number of emitted constraints.
    pub constraints: usize,
    /// Mean group weight. For `EvenOverlap` the weight is the number of shared
    /// qubits; otherwise it is the number of distinct variables in the group.
    pub mean_weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub or: usize,
    pub xor: usize,
    pub linear: usize,
    /// OR clause count keyed by clause width.
    pub or_by_width: BTreeMap<usize, usize>,
    pub xor_mean_width: f64,
    pub linear_mean_width: f64,
    pub categories: BTreeMap<Category, CategoryCount>,
}

/// Counts constraints by type and by originating rule.
pub fn constraint_census(cs: &ConstraintSystem) -> Census {
    let mut census = Census::default();
    let (mut xor_width, mut lin_width) = (0usize, 0usize);
    let mut groups: BTreeMap<Origin, BTreeSet<VarId>> = BTreeMap::new();
    let mut per_category: BTreeMap<Category, usize> = BTreeMap::new();

    for (c, &origin) in cs.constraints.iter().zip(&cs.origins) {
        match c {
            Constraint::Or { lits } => {
                census.or += 1;
                *census.or_by_width.entry(lits.len()).or_default() += 1;
            }
            Constraint::Xor { vars, .. } => {
                census.xor += 1;
                xor_width += vars.len();
            }
            Constraint::Linear { vars, .. } => {
                census.linear += 1;
                lin_width += vars.len();
            }
        }
        *per_category.entry(origin.category()).or_default() += 1;
        groups.entry(origin).or_default().extend(c.vars());
    }
    if census.xor > 0 {
        census.xor_mean_width = xor_width as f64 / census.xor as f64;
    }
    if census.linear > 0 {
        census.linear_mean_width = lin_width as f64 / census.linear as f64;
    }

    let mut weights: BTreeMap<Category, (usize, usize)> = BTreeMap::new();
    for (origin, vars) in &groups {
        let weight = match origin {
            Origin::EvenOverlap(pair) => cs.pairs[*pair].both.len(),
            _ => vars.len(),
        };
        let entry = weights.entry(origin.category()).or_default();
        entry.0 += 1;
        entry.1 += weight;
    }
    for (cat, (count, weight)) in weights {
        census.categories.insert(
            cat,
            CategoryCount {
                groups: count,
                constraints: per_category[&cat],
                mean_weight: weight as f64 / count as f64,
            },
        );
    }
    census
}
