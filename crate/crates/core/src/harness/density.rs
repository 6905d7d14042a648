use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::record::CodeRecord;
use super::{fmt_f64, CSV_VERSION_LINE};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub n: usize,
    pub codes: usize,
    /// Mean density over all codes of this size.
    pub mean_density: f64,
    /// Smallest gamma at which a code of this size was found.
    pub min_gamma: f64,
}

/// Aggregates codes by qubit count: mean density of all codes and the
/// smallest gamma among them. Records are expected to come from the
/// satisfiable phase.
pub fn run_density_study(records: &[CodeRecord]) -> Result<Vec<DensityRow>> {
    if records.is_empty() {
        return Err(Error::param("density study needs at least one code record"));
    }
    let mut by_n: BTreeMap<usize, Vec<&CodeRecord>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.stats.n).or_default().push(r);
    }
    Ok(by_n
        .into_iter()
        .map(|(n, rs)| DensityRow {
            n,
            codes: rs.len(),
            mean_density: rs.iter().map(|r| r.stats.density).sum::<f64>() / rs.len() as f64,
            min_gamma: rs
                .iter()
                .map(|r| r.provenance.gamma)
                .fold(f64::INFINITY, f64::min),
        })
        .collect())
}

pub fn density_csv(rows: &[DensityRow]) -> String {
    let mut out = format!("{CSV_VERSION_LINE}\nn,codes,mean_density,min_gamma\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.n,
            r.codes,
            fmt_f64(r.mean_density),
            fmt_f64(r.min_gamma)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::tests::shor;
    use crate::encoder::EncodingParams;
    use crate::harness::Provenance;

    fn record(gamma: f64) -> CodeRecord {
        CodeRecord::new(
            shor(),
            Provenance {
                n: 9,
                m: 8,
                gamma,
                graph_seed: 0,
                master_seed: 0,
                stream_id: 0,
                sample: 0,
                params: EncodingParams::default(),
                solver_seed: 0,
                decisions: 0,
                conflicts: 0,
                propagations: 0,
                restarts: 0,
            },
        )
    }

    #[test]
    fn single_record() {
        let rows = run_density_study(&[record(0.4)]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!((rows[0].mean_density - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(rows[0].min_gamma, 0.4);
        assert!(run_density_study(&[]).is_err());
    }

    #[test]
    fn min_gamma_over_records() {
        let rows = run_density_study(&[record(0.6), record(0.45)]).unwrap();
        assert_eq!((rows[0].codes, rows[0].min_gamma), (2, 0.45));
        assert!(density_csv(&rows).ends_with("9,2,0.3333333333333333,0.45\n"));
    }
}
