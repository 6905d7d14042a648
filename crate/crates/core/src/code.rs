//! CSS codes read off satisfying colorings.

use serde::{Deserialize, Serialize};

use crate::encoder::EncodingParams;
use crate::gf2::{rank_gf2, BitMatrix};
use crate::graphgen::SupportGraph;
use crate::solver::Assignment;
use crate::{Error, Result, FORMAT_VERSION};

/// A CSS code given by its X-type and Z-type check matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssCode {
    n: usize,
    hx: BitMatrix,
    hz: BitMatrix,
}

impl CssCode {
    pub fn new(n: usize, hx: BitMatrix, hz: BitMatrix) -> Result<Self> {
        if hx.cols() != n || hz.cols() != n {
            return Err(Error::param(format!(
                "check matrices have {} and {} columns, expected {n}",
                hx.cols(),
                hz.cols()
            )));
        }
        Ok(Self { n, hx, hz })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hx(&self) -> &BitMatrix {
        &self.hx
    }

    pub fn hz(&self) -> &BitMatrix {
        &self.hz
    }

    /// Number of logical qubits, `n - rank(hx) - rank(hz)`.
    pub fn k(&self) -> usize {
        self.n - rank_gf2(&self.hx) - rank_gf2(&self.hz)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&CodeDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CodeDoc = serde_json::from_str(text)?;
        Self::try_from(doc)
    }

    /// Deterministic text used for content hashing.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&CodeDoc::from(self)).expect("code serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub(crate) struct CodeDoc {
    format_version: u32,
    n: usize,
    hx: Vec<String>,
    hz: Vec<String>,
}

impl From<&CssCode> for CodeDoc {
    fn from(c: &CssCode) -> Self {
        CodeDoc {
            format_version: FORMAT_VERSION,
            n: c.n,
            hx: c.hx.to_bitstrings(),
            hz: c.hz.to_bitstrings(),
        }
    }
}

impl TryFrom<CodeDoc> for CssCode {
    type Error = Error;

    fn try_from(doc: CodeDoc) -> Result<Self> {
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported code format_version {}",
                doc.format_version
            )));
        }
        let hx = BitMatrix::from_bitstrings(doc.n, &doc.hx)?;
        let hz = BitMatrix::from_bitstrings(doc.n, &doc.hz)?;
        CssCode::new(doc.n, hx, hz)
    }
}

impl Serialize for CssCode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CodeDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CssCode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = CodeDoc::deserialize(d)?;
        CssCode::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// Summary parameters of a code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeStats {
    pub n: usize,
    pub m_x: usize,
    pub m_z: usize,
    pub rank_x: usize,
    pub rank_z: usize,
    pub k: usize,
    pub rate: f64,
    /// Nonzero entries of `hx` and `hz` over `m * n`.
    pub density: f64,
    /// `qubit_degree_hist[d]`: qubits acted on by exactly `d` generators.
    pub qubit_degree_hist: Vec<usize>,
    /// `stabilizer_degree_hist[w]`: generators of weight exactly `w`.
    pub stabilizer_degree_hist: Vec<usize>,
    pub mean_stabilizer_degree: f64,
}

/// Reads the code off a satisfying assignment of the system built from `g`.
///
/// Stabilizer `s` becomes a row of `hx` when its Pauli variable is true and a
/// row of `hz` otherwise; rows keep the stabilizer order and inactive
/// generators stay as zero rows.
pub fn extract_code(g: &SupportGraph, a: &Assignment) -> Result<CssCode> {
    let e = g.edge_count();
    if a.len() < e + g.m() {
        return Err(Error::param(format!(
            "assignment has {} values, graph needs at least {}",
            a.len(),
            e + g.m()
        )));
    }
    let mut supports = vec![Vec::new(); g.m()];
    for (i, &(q, s)) in g.edges().iter().enumerate() {
        if a.get(i) {
            supports[s].push(q);
        }
    }
    let (mut xs, mut zs) = (Vec::new(), Vec::new());
    for (s, support) in supports.into_iter().enumerate() {
        if a.get(e + s) {
            xs.push(support);
        } else {
            zs.push(support);
        }
    }
    let code = CssCode::new(
        g.n(),
        BitMatrix::from_row_supports(g.n(), &xs),
        BitMatrix::from_row_supports(g.n(), &zs),
    )?;
    if !check_commutation(&code) {
        return Err(Error::Validation(
            "assignment yields anticommuting generators".into(),
        ));
    }
    Ok(code)
}

/// Whether every X generator commutes with every Z generator.
pub fn check_commutation(c: &CssCode) -> bool {
    c.hx
        .mul_transpose(&c.hz)
        .map(|p| p.is_zero())
        .unwrap_or(false)
}

fn histogram(values: &[usize]) -> Vec<usize> {
    let mut h = vec![0; values.iter().max().map_or(0, |&m| m + 1)];
    for &v in values {
        h[v] += 1;
    }
    h
}

pub fn stats(c: &CssCode) -> CodeStats {
    let n = c.n;
    let (m_x, m_z) = (c.hx.rows(), c.hz.rows());
    let m = m_x + m_z;
    let rank_x = rank_gf2(&c.hx);
    let rank_z = rank_gf2(&c.hz);
    let k = n - rank_x - rank_z;
    let ones = c.hx.count_ones() + c.hz.count_ones();
    let qubit_degrees: Vec<usize> = c
        .hx
        .col_weights()
        .iter()
        .zip(c.hz.col_weights())
        .map(|(x, z)| x + z)
        .collect();
    let mut row_weights = c.hx.row_weights();
    row_weights.extend(c.hz.row_weights());
    CodeStats {
        n,
        m_x,
        m_z,
        rank_x,
        rank_z,
        k,
        rate: if n == 0 { 0.0 } else { k as f64 / n as f64 },
        density: if m * n == 0 {
            0.0
        } else {
            ones as f64 / (m * n) as f64
        },
        qubit_degree_hist: histogram(&qubit_degrees),
        stabilizer_degree_hist: histogram(&row_weights),
        mean_stabilizer_degree: if m == 0 { 0.0 } else { ones as f64 / m as f64 },
    }
}

/// Checks the degree bounds of `params` on a code: every qubit has at least
/// `delta_q` X-type and `delta_q` Z-type generators, and every generator
/// weight lies in `[delta_s, max_s]`; with balancing, exactly `⌊m/2⌋`
/// generators are X-type. Returns a description of the first
/// violation.
pub fn degree_violation(c: &CssCode, params: &EncodingParams) -> Option<String> {
    let dq = params.delta_q as usize;
    for (label, h) in [("X", &c.hx), ("Z", &c.hz)] {
        if let Some((q, w)) = h.col_weights().into_iter().enumerate().find(|&(_, w)| w < dq) {
            return Some(format!("qubit {q} has {w} {label}-type generators, needs {dq}"));
        }
        for (r, w) in h.row_weights().into_iter().enumerate() {
            let max = params.max_s.map_or(usize::MAX, |m| m as usize);
            if w < params.delta_s as usize || w > max {
                return Some(format!("{label} generator {r} has weight {w}"));
            }
        }
    }
    if params.balancing {
        let m = c.hx.rows() + c.hz.rows();
        if c.hx.rows() != m / 2 {
            return Some(format!("{} X-type generators out of {m}", c.hx.rows()));
        }
    }
    None
}

/// Writes a matrix in the alist sparse format: dimensions, maximum column
/// and row weights, the weight lists, then 1-based column and row
/// adjacency lists padded with zeros.
pub fn to_alist(h: &BitMatrix) -> String {
    let cols: Vec<Vec<usize>> = {
        let t = h.transpose();
        (0..t.rows()).map(|c| t.row_support(c)).collect()
    };
    let rows: Vec<Vec<usize>> = (0..h.rows()).map(|r| h.row_support(r)).collect();
    let max_c = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_r = rows.iter().map(Vec::len).max().unwrap_or(0);
    let join = |v: &mut dyn Iterator<Item = usize>| {
        v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let mut out = format!("{} {}\n{} {}\n", h.cols(), h.rows(), max_c, max_r);
    out += &join(&mut cols.iter().map(Vec::len));
    out.push('\n');
    out += &join(&mut rows.iter().map(Vec::len));
    out.push('\n');
    for (lists, width) in [(&cols, max_c), (&rows, max_r)] {
        for l in lists {
            let mut it = l.iter().map(|&x| x + 1).chain(std::iter::repeat(0)).take(width);
            out += &join(&mut it);
            out.push('\n');
        }
    }
    out
}

pub fn from_alist(text: &str) -> Result<BitMatrix> {
    let bad = |what: &str| Error::Parse(format!("alist: {what}"));
    let mut nums = text.split_whitespace().map(|t| {
        t.parse::<usize>()
            .map_err(|_| Error::Parse(format!("alist: bad number {t:?}")))
    });
    let mut next = || nums.next().unwrap_or_else(|| Err(bad("truncated")));
    let (n_cols, n_rows) = (next()?, next()?);
    let (max_c, max_r) = (next()?, next()?);
    let col_w: Vec<usize> = (0..n_cols).map(|_| next()).collect::<Result<_>>()?;
    let row_w: Vec<usize> = (0..n_rows).map(|_| next()).collect::<Result<_>>()?;
    let mut h = BitMatrix::zeros(n_rows, n_cols);
    for (c, &w) in col_w.iter().enumerate() {
        for i in 0..max_c {
            let r = next()?;
            match (i < w, r) {
                (true, r) if (1..=n_rows).contains(&r) => h.set(r - 1, c, true),
                (false, 0) => {}
                _ => return Err(bad("column list inconsistent with weights")),
            }
        }
    }
    for (r, &w) in row_w.iter().enumerate() {
        let mut seen = 0;
        for i in 0..max_r {
            let c = next()?;
            match (i < w, c) {
                (true, c) if (1..=n_cols).contains(&c) && h.get(r, c - 1) => seen += 1,
                (false, 0) => {}
                _ => return Err(bad("row list inconsistent with column lists")),
            }
        }
        if seen != w || h.row_support(r).len() != w {
            return Err(bad("row weight mismatch"));
        }
    }
    Ok(h)
}
