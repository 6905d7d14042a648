use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::CodeRecord;
use super::{fmt_f64, CSV_VERSION_LINE};
use crate::code::check_commutation;
use crate::erasure::{failure_rate, DecodingReport, Estimator};
use crate::rng::{hash_words, RngSpec};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingRow {
    pub code_id: String,
    pub n: usize,
    pub k: usize,
    pub report: DecodingReport,
}

/// Lowest failure rate among all codes of one size at one `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimumRow {
    pub n: usize,
    pub p: f64,
    pub code_id: String,
    pub failure_rate: f64,
    pub ci95: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingTable {
    /// Ordered by record, then by `p`.
    pub rows: Vec<DecodingRow>,
    /// Ordered by `n`, then by `p`.
    pub minima: Vec<MinimumRow>,
}

/// The stream a code's trials draw from. It depends on the code but not on
/// `p`, so patterns at different `p` are nested trial by trial.
fn code_stream(rng: RngSpec, code_id: &str) -> RngSpec {
    let words: Vec<u64> = code_id.bytes().map(u64::from).collect();
    rng.child(hash_words(&words))
}

/// Failure rates of every record at every `p`, plus the per-size minima.
pub fn run_decoding_benchmark(
    records: &[CodeRecord],
    p_grid: &[f64],
    trials: u64,
    rng: RngSpec,
    estimator: Estimator,
) -> Result<DecodingTable> {
    if let Some(r) = records.iter().find(|r| !check_commutation(&r.code)) {
        return Err(Error::Validation(format!(
            "record {} holds anticommuting generators",
            r.code_id
        )));
    }
    let jobs: Vec<(usize, f64)> = (0..records.len())
        .flat_map(|i| p_grid.iter().map(move |&p| (i, p)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, p)| {
            let r = &records[i];
            let report = failure_rate(&r.code, p, trials, code_stream(rng, &r.code_id), estimator)?;
            Ok(DecodingRow {
                code_id: r.code_id.clone(),
                n: r.stats.n,
                k: r.stats.k,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best: BTreeMap<(usize, u64), &DecodingRow> = BTreeMap::new();
    for row in &rows {
        let key = (row.n, row.report.p.to_bits());
        let better = best.get(&key).is_none_or(|b| {
            (row.report.failure_rate, &row.code_id) < (b.report.failure_rate, &b.code_id)
        });
        if better {
            best.insert(key, row);
        }
    }
    let mut minima: Vec<MinimumRow> = best
        .into_values()
        .map(|r| MinimumRow {
            n: r.n,
            p: r.report.p,
            code_id: r.code_id.clone(),
            failure_rate: r.report.failure_rate,
            ci95: r.report.ci95,
        })
        .collect();
    minima.sort_by(|a, b| (a.n, a.p).partial_cmp(&(b.n, b.p)).unwrap());
    Ok(DecodingTable { rows, minima })
}

impl DecodingTable {
    pub fn rows_csv(&self) -> String {
        let mut out =
            format!("{CSV_VERSION_LINE}\ncode_id,n,k,p,trials,failures,failure_rate,ci95\n");
        for r in &self.rows {
            let d = &r.report;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.code_id,
                r.n,
                r.k,
                fmt_f64(d.p),
                d.trials,
                fmt_f64(d.failures),
                fmt_f64(d.failure_rate),
                fmt_f64(d.ci95)
            );
        }
        out
    }

    pub fn minima_csv(&self) -> String {
        let mut out = format!("{CSV_VERSION_LINE}\nn,p,code_id,failure_rate,ci95\n");
        for m in &self.minima {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                m.n,
                fmt_f64(m.p),
                m.code_id,
                fmt_f64(m.failure_rate),
                fmt_f64(m.ci95)
            );
        }
        out
    }
}
