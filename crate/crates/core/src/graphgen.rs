//! Random bipartite support graphs.
//!
//! Qubits are indexed `0..n`, stabilizer generators `0..m`. An edge `(q, s)`
//! marks that generator `s` may act on qubit `q`; the solver later decides
//! which of these candidate edges become part of the Tanner graph.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{rng_from_seed, RngSpec};
use crate::{Error, Result, FORMAT_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportGraph {
    n: usize,
    m: usize,
    gamma: f64,
    seed: u64,
    /// Sorted row-major: by qubit, then by stabilizer.
    edges: Vec<(usize, usize)>,
}

impl SupportGraph {
    /// Builds a graph from an explicit edge list. The list is sorted into
    /// canonical order; duplicates and out-of-range endpoints are rejected.
    pub fn from_edges(
        n: usize,
        m: usize,
        mut edges: Vec<(usize, usize)>,
        gamma: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::param(format!("gamma {gamma} outside [0, 1]")));
        }
        if let Some(&(q, s)) = edges.iter().find(|&&(q, s)| q >= n || s >= m) {
            return Err(Error::param(format!(
                "edge ({q}, {s}) out of range for n={n}, m={m}"
            )));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::param(format!("duplicate edge {:?}", w[0])));
        }
        Ok(Self {
            n,
            m,
            gamma,
            seed,
            edges,
        })
    }

    /// The complete bipartite graph `K_{n,m}`.
    pub fn complete(n: usize, m: usize) -> Self {
        let edges = (0..n).flat_map(|q| (0..m).map(move |s| (q, s))).collect();
        Self {
            n,
            m,
            gamma: 1.0,
            seed: 0,
            edges,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, q: usize, s: usize) -> bool {
        self.edges.binary_search(&(q, s)).is_ok()
    }

    /// Position of `(q, s)` in the canonical edge order.
    pub fn edge_index(&self, q: usize, s: usize) -> Option<usize> {
        self.edges.binary_search(&(q, s)).ok()
    }

    /// Qubit neighbourhoods of every stabilizer, each list ascending.
    pub fn stabilizer_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m];
        for &(q, s) in &self.edges {
            adj[s].push(q);
        }
        adj
    }

    /// Stabilizer neighbourhoods of every qubit, each list ascending.
    pub fn qubit_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(q, s) in &self.edges {
            adj[q].push(s);
        }
        adj
    }

    /// Qubits adjacent to both `s1` and `s2`, ascending.
    pub fn shared_qubits(&self, s1: usize, s2: usize) -> Result<Vec<usize>> {
        if s1 >= self.m || s2 >= self.m {
            return Err(Error::param(format!(
                "stabilizer index out of range: ({s1}, {s2}) with m={}",
                self.m
            )));
        }
        if s1 == s2 {
            return Err(Error::param("shared_qubits needs two distinct stabilizers"));
        }
        Ok((0..self.n)
            .filter(|&q| self.has_edge(q, s1) && self.has_edge(q, s2))
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&GraphDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text)?;
        if doc.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported graph format_version {}",
                doc.format_version
            )));
        }
        let graph = Self::from_edges(doc.n, doc.m, doc.edges, doc.gamma, doc.seed)?;
        Ok(graph)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    format_version: u32,
    n: usize,
    m: usize,
    gamma: f64,
    seed: u64,
    edges: Vec<(usize, usize)>,
}

impl From<&SupportGraph> for GraphDoc {
    fn from(g: &SupportGraph) -> Self {
        GraphDoc {
            format_version: FORMAT_VERSION,
            n: g.n,
            m: g.m,
            gamma: g.gamma,
            seed: g.seed,
            edges: g.edges.clone(),
        }
    }
}

/// Samples `G(n, m, gamma)`: every qubit-stabilizer pair is an edge
/// independently with probability `gamma`.
///
/// One uniform draw is consumed per pair in row-major order whatever the value
/// of `gamma`, so two calls sharing `rng` but with `gamma <= gamma'` give
/// nested edge sets.
pub fn sample_support_graph(n: usize, m: usize, gamma: f64, rng: RngSpec) -> Result<SupportGraph> {
    sample_with_seed(n, m, gamma, rng.seed())
}

/// Same as [`sample_support_graph`] but keyed directly by the 64-bit seed
/// recorded in a graph, so a stored graph can be regenerated.
pub fn sample_with_seed(n: usize, m: usize, gamma: f64, seed: u64) -> Result<SupportGraph> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::param(format!("gamma {gamma} outside [0, 1]")));
    }
    if n == 0 || m == 0 {
        return Err(Error::param("n and m must be positive"));
    }
    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::new();
    for q in 0..n {
        for s in 0..m {
            let u: f64 = rng.gen();
            if u < gamma {
                edges.push((q, s));
            }
        }
    }
    Ok(SupportGraph {
        n,
        m,
        gamma,
        seed,
        edges,
    })
}
