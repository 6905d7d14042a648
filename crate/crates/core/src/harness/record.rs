use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::code::{check_commutation, degree_violation, stats, CodeStats, CssCode};
use crate::encoder::EncodingParams;
use crate::solver::SolverStats;
use crate::{Error, Result, FORMAT_VERSION};

/// Where a code came from. Wall time is deliberately absent so that records
/// are reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub graph_seed: u64,
    pub master_seed: u64,
    pub stream_id: u64,
    pub sample: u64,
    pub params: EncodingParams,
    pub solver_seed: u64,
    pub decisions: u64,
    pub conflicts: u64,
    pub propagations: u64,
    pub restarts: u64,
}

impl Provenance {
    pub fn solver_stats(&mut self, s: &SolverStats) {
        self.decisions = s.decisions;
        self.conflicts = s.conflicts;
        self.propagations = s.propagations;
        self.restarts = s.restarts;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeRecord {
    pub format_version: u32,
    /// SHA-256 of the canonical JSON of code, stats and provenance.
    pub code_id: String,
    pub code: CssCode,
    pub stats: CodeStats,
    pub provenance: Provenance,
}

#[derive(Serialize)]
struct Hashed<'a> {
    code: &'a CssCode,
    stats: &'a CodeStats,
    provenance: &'a Provenance,
}

fn content_hash(code: &CssCode, stats: &CodeStats, provenance: &Provenance) -> String {
    let text = serde_json::to_string(&Hashed {
        code,
        stats,
        provenance,
    })
    .expect("record serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl CodeRecord {
    pub fn new(code: CssCode, provenance: Provenance) -> Self {
        let stats = stats(&code);
        let code_id = content_hash(&code, &stats, &provenance);
        Self {
            format_version: FORMAT_VERSION,
            code_id,
            code,
            stats,
            provenance,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.json", self.code_id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Parses and re-validates a record: commutation, the degree bounds it
    /// was generated under, recomputed statistics and the content hash.
    pub fn from_json(text: &str) -> Result<Self> {
        let rec: CodeRecord = serde_json::from_str(text)?;
        if rec.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported record format_version {}",
                rec.format_version
            )));
        }
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if !check_commutation(&self.code) {
            return Err(Error::Validation(format!(
                "record {} holds anticommuting generators",
                self.code_id
            )));
        }
        if let Some(v) = degree_violation(&self.code, &self.provenance.params) {
            return Err(Error::Validation(format!("record {}: {v}", self.code_id)));
        }
        if stats(&self.code) != self.stats {
            return Err(Error::Validation(format!(
                "record {}: stored statistics do not match the code",
                self.code_id
            )));
        }
        if content_hash(&self.code, &self.stats, &self.provenance) != self.code_id {
            return Err(Error::Validation(format!(
                "record {}: content hash mismatch",
                self.code_id
            )));
        }
        Ok(())
    }
}
