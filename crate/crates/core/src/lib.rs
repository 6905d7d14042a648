//! Discovery of random sparse CSS stabilizer codes.
//!
//! A random bipartite support graph over qubits and stabilizer generators is
//! turned into a boolean constraint system (activator and Pauli variables plus
//! auxiliaries). Any satisfying assignment colors the support graph into the
//! Tanner graph of a commuting CSS code. The crate contains the sampler, the
//! encoder, a self-contained CDCL solver with native XOR and cardinality
//! reasoning, GF(2) code analysis, an exact erasure-channel decoder analysis,
//! and the experiment harness driving phase sweeps.

pub mod code;
pub mod encoder;
pub mod erasure;
mod error;
pub mod gf2;
pub mod graphgen;
pub mod harness;
pub mod rng;
pub mod solver;

pub use code::{CodeStats, CssCode};
pub use encoder::{Constraint, ConstraintSystem, EncodingParams, Lit, VarKind};
pub use erasure::{DecodingReport, ErasurePattern};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVec};
pub use graphgen::SupportGraph;
pub use rng::RngSpec;
pub use solver::{Assignment, SolveResult, SolverConfig, Verdict};

/// Version tag written into every persisted document.
pub const FORMAT_VERSION: u32 = 1;
