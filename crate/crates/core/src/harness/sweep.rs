use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::record::{CodeRecord, Provenance};
use super::{csv_body, fmt_f64, read_text, write_atomic, CSV_VERSION_LINE};
use crate::code::{degree_violation, extract_code};
use crate::encoder::{encode, EncodingParams};
use crate::graphgen::sample_support_graph;
use crate::rng::{hash_words, RngSpec};
use crate::solver::{solve, SolverConfig, Verdict};
use crate::{Error, Result, FORMAT_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "version")]
    pub format_version: u32,
    pub qubit_counts: Vec<usize>,
    /// `m = ⌊n · ratio.0 / ratio.1⌋`.
    #[serde(default = "default_ratio")]
    pub ratio: (usize, usize),
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_step: f64,
    #[serde(default = "default_samples")]
    pub samples: u32,
    #[serde(default)]
    pub params: EncodingParams,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    pub master_seed: u64,
    /// Minimum fraction of decided instances for a pixel to be classified.
    #[serde(default = "default_solved_fraction")]
    pub min_solved_fraction: f64,
    pub output_dir: PathBuf,
    /// Stop after this many newly completed pixels, leaving the rest for a
    /// later run.
    #[serde(default)]
    pub stop_after: Option<usize>,
}

fn version() -> u32 {
    FORMAT_VERSION
}

fn default_ratio() -> (usize, usize) {
    (9, 10)
}

fn default_samples() -> u32 {
    10
}

fn default_solved_fraction() -> f64 {
    0.9
}

impl SweepConfig {
    /// The desk-scale defaults for the given grid: 9/10 ratio, 10 samples,
    /// 60 s budget, 90% solved threshold.
    pub fn new(qubit_counts: Vec<usize>, gamma: (f64, f64, f64), output_dir: PathBuf) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            qubit_counts,
            ratio: default_ratio(),
            gamma_min: gamma.0,
            gamma_max: gamma.1,
            gamma_step: gamma.2,
            samples: default_samples(),
            params: EncodingParams::default(),
            solver: SolverConfig::default(),
            workers: 0,
            master_seed: 0,
            min_solved_fraction: default_solved_fraction(),
            output_dir,
            stop_after: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported sweep config format_version {}",
                cfg.format_version
            )));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn m_for(&self, n: usize) -> usize {
        n * self.ratio.0 / self.ratio.1
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubit_counts.is_empty() || self.qubit_counts.contains(&0) {
            return Err(Error::param("qubit_counts must be non-empty and positive"));
        }
        if self.ratio.1 == 0 || self.qubit_counts.iter().any(|&n| self.m_for(n) == 0) {
            return Err(Error::param("ratio gives no stabilizers"));
        }
        if self.samples == 0 {
            return Err(Error::param("samples must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.min_solved_fraction) {
            return Err(Error::param("min_solved_fraction outside [0, 1]"));
        }
        gamma_grid(self.gamma_min, self.gamma_max, self.gamma_step)?;
        self.params.validate()?;
        self.solver.validate()
    }

    /// The part of the configuration that determines results; run controls
    /// (workers, stop_after) and the output location are cleared.
    fn snapshot(&self) -> Self {
        Self {
            workers: 0,
            stop_after: None,
            output_dir: PathBuf::new(),
            ..self.clone()
        }
    }
}

/// Grid points `min, min + step, ..., max`, rounded to 9 decimals so that
/// accumulated float error does not leak into file names and seeds.
pub fn gamma_grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&min) || !(0.0..=1.0).contains(&max) || min > max {
        return Err(Error::param(format!("bad gamma range [{min}, {max}]")));
    }
    if min == max {
        return Ok(vec![min]);
    }
    if !(step > 0.0) {
        return Err(Error::param(format!("bad gamma step {step}")));
    }
    let count = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((min + i as f64 * step) * 1e9).round() / 1e9)
        .collect())
}

/// Stream id of one instance: a hash of `(n, gamma, sample)`.
pub fn instance_stream(n: usize, gamma: f64, sample: u64) -> u64 {
    hash_words(&[n as u64, gamma.to_bits(), sample])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PixelClass {
    Satisfiable,
    Unsatisfiable,
    Unknown,
}

impl PixelClass {
    pub fn label(self) -> &'static str {
        match self {
            PixelClass::Satisfiable => "sat",
            PixelClass::Unsatisfiable => "unsat",
            PixelClass::Unknown => "unknown",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "sat" => PixelClass::Satisfiable,
            "unsat" => PixelClass::Unsatisfiable,
            "unknown" => PixelClass::Unknown,
            other => return Err(Error::Parse(format!("unknown pixel class {other:?}"))),
        })
    }
}

/// Unknown when fewer than `min_solved_fraction` of the instances were
/// decided; otherwise satisfiable iff strictly more Sat than Unsat.
pub fn classify(sat: u32, unsat: u32, unknown: u32, min_solved_fraction: f64) -> PixelClass {
    let total = sat + unsat + unknown;
    if total == 0 || ((sat + unsat) as f64) < min_solved_fraction * total as f64 {
        PixelClass::Unknown
    } else if sat > unsat {
        PixelClass::Satisfiable
    } else {
        PixelClass::Unsatisfiable
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PixelResult {
    pub n: usize,
    pub m: usize,
    pub gamma: f64,
    pub sat: u32,
    pub unsat: u32,
    pub unknown: u32,
    pub class: PixelClass,
}

impl PixelResult {
    pub fn sat_fraction(&self) -> f64 {
        self.sat as f64 / (self.sat + self.unsat + self.unknown) as f64
    }
}

/// Per-pixel progress file: the pixel plus the codes it produced.
#[derive(Serialize, Deserialize)]
struct PixelDoc {
    format_version: u32,
    pixel: PixelResult,
    code_ids: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    /// Completed pixels in grid order.
    pub pixels: Vec<PixelResult>,
    /// Whether every pixel of the grid is complete.
    pub complete: bool,
}

enum Instance {
    Sat(Box<CodeRecord>),
    Unsat,
    Unknown,
}

fn run_instance(cfg: &SweepConfig, n: usize, gamma: f64, sample: u64) -> Result<Instance> {
    let m = cfg.m_for(n);
    let stream_id = instance_stream(n, gamma, sample);
    let rng = RngSpec::new(cfg.master_seed, stream_id);
    let g = sample_support_graph(n, m, gamma, rng)?;
    let cs = encode(&g, cfg.params)?;
    let result = solve(&cs, &cfg.solver)?;
    Ok(match result.verdict {
        Verdict::Sat(a) => {
            let code = extract_code(&g, &a)?;
            if let Some(v) = degree_violation(&code, &cfg.params) {
                return Err(Error::Validation(format!(
                    "n={n} gamma={gamma} sample={sample}: {v}"
                )));
            }
            let mut provenance = Provenance {
                n,
                m,
                gamma,
                graph_seed: g.seed(),
                master_seed: cfg.master_seed,
                stream_id,
                sample,
                params: cfg.params,
                solver_seed: cfg.solver.seed,
                decisions: 0,
                conflicts: 0,
                propagations: 0,
                restarts: 0,
            };
            provenance.solver_stats(&result.stats);
            Instance::Sat(Box::new(CodeRecord::new(code, provenance)))
        }
        Verdict::Unsat => Instance::Unsat,
        Verdict::Unknown => Instance::Unknown,
    })
}

fn pixel_path(dir: &Path, n: usize, gamma: f64) -> PathBuf {
    dir.join("pixels").join(format!("n{n}_g{gamma}.json"))
}

fn run_pixel(cfg: &SweepConfig, n: usize, gamma: f64) -> Result<PixelDoc> {
    let outcomes: Vec<Result<Instance>> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|s| run_instance(cfg, n, gamma, s))
        .collect();
    let (mut sat, mut unsat, mut unknown) = (0, 0, 0);
    let mut code_ids = Vec::new();
    let codes = cfg.output_dir.join("codes");
    for outcome in outcomes {
        match outcome? {
            Instance::Sat(rec) => {
                sat += 1;
                write_atomic(&codes.join(rec.file_name()), &rec.to_json()?)?;
                code_ids.push(rec.code_id.clone());
            }
            Instance::Unsat => unsat += 1,
            Instance::Unknown => unknown += 1,
        }
    }
    Ok(PixelDoc {
        format_version: FORMAT_VERSION,
        pixel: PixelResult {
            n,
            m: cfg.m_for(n),
            gamma,
            sat,
            unsat,
            unknown,
            class: classify(sat, unsat, unknown, cfg.min_solved_fraction),
        },
        code_ids,
    })
}

fn pixel_csv(pixels: &[PixelResult]) -> String {
    let mut out = format!("{CSV_VERSION_LINE}\nn,m,gamma,sat,unsat,unknown,class\n");
    for p in pixels {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.n,
            p.m,
            fmt_f64(p.gamma),
            p.sat,
            p.unsat,
            p.unknown,
            p.class.label()
        );
    }
    out
}

/// Runs (or resumes) a phase sweep.
///
/// Layout under `output_dir`: `config.json` (the result-determining part of
/// the configuration), `pixels/` (one progress file per completed pixel),
/// `pixels.csv` and `codes/<code_id>.json`. Completed pixels are skipped, so
/// a rerun after an interruption produces the same files as an
/// uninterrupted run.
pub fn run_phase_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let snapshot_path = dir.join("config.json");
    let snapshot = cfg.snapshot().to_json()?;
    if snapshot_path.exists() {
        if read_text(&snapshot_path)? != snapshot {
            return Err(Error::Validation(format!(
                "{} holds a different sweep configuration",
                snapshot_path.display()
            )));
        }
    } else {
        write_atomic(&snapshot_path, &snapshot)?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;

    let gammas = gamma_grid(cfg.gamma_min, cfg.gamma_max, cfg.gamma_step)?;
    let mut pixels = Vec::new();
    let mut fresh = 0usize;
    let mut complete = true;
    for &n in &cfg.qubit_counts {
        for &gamma in &gammas {
            let path = pixel_path(dir, n, gamma);
            let doc = if path.exists() {
                serde_json::from_str::<PixelDoc>(&read_text(&path)?)?
            } else {
                if cfg.stop_after.is_some_and(|k| fresh >= k) {
                    complete = false;
                    continue;
                }
                let doc = pool.install(|| run_pixel(cfg, n, gamma))?;
                write_atomic(&path, &serde_json::to_string_pretty(&doc)?)?;
                fresh += 1;
                info!(
                    "n={n} gamma={gamma}: sat={} unsat={} unknown={}",
                    doc.pixel.sat, doc.pixel.unsat, doc.pixel.unknown
                );
                doc
            };
            pixels.push(doc.pixel);
        }
    }
    write_atomic(&dir.join("pixels.csv"), &pixel_csv(&pixels))?;
    Ok(SweepOutcome { pixels, complete })
}

/// Reads a pixel CSV written by [`run_phase_sweep`].
pub fn load_pixels(path: &Path) -> Result<Vec<PixelResult>> {
    let text = read_text(path)?;
    let body = csv_body(&text)?;
    let bad = |line: &str| Error::Parse(format!("bad pixel row {line:?}"));
    body.lines()
        .skip(1)
        .filter(|l| !l.is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(bad(line));
            }
            let num = |i: usize| f[i].parse::<u64>().map_err(|_| bad(line));
            Ok(PixelResult {
                n: num(0)? as usize,
                m: num(1)? as usize,
                gamma: f[2].parse().map_err(|_| bad(line))?,
                sat: num(3)? as u32,
                unsat: num(4)? as u32,
                unknown: num(5)? as u32,
                class: PixelClass::parse(f[6])?,
            })
        })
        .collect()
}

/// Loads and re-validates every record under `<sweep dir>/codes`, ordered by
/// `(n, gamma, sample)`.
pub fn load_records(sweep_dir: &Path) -> Result<Vec<CodeRecord>> {
    let codes = sweep_dir.join("codes");
    let mut out = BTreeMap::new();
    if !codes.exists() {
        return Ok(Vec::new());
    }
    let entries = fs::read_dir(&codes).map_err(|e| Error::io(&codes, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&codes, e))?.path();
        if path.extension().is_some_and(|x| x == "json") {
            let rec = CodeRecord::from_json(&read_text(&path)?)?;
            let p = &rec.provenance;
            out.insert((p.n, p.gamma.to_bits(), p.sample, rec.code_id.clone()), rec);
        }
    }
    Ok(out.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_rule() {
        assert_eq!(classify(6, 4, 0, 0.9), PixelClass::Satisfiable);
        assert_eq!(classify(5, 5, 0, 0.9), PixelClass::Unsatisfiable);
        assert_eq!(classify(5, 4, 1, 0.9), PixelClass::Satisfiable);
        assert_eq!(classify(5, 3, 2, 0.9), PixelClass::Unknown);
        assert_eq!(classify(0, 0, 10, 0.0), PixelClass::Unsatisfiable);
        assert_eq!(classify(0, 0, 0, 0.9), PixelClass::Unknown);
    }

    #[test]
    fn grid() {
        let g = gamma_grid(0.05, 0.95, 0.05).unwrap();
        assert_eq!(g.len(), 19);
        assert_eq!(g[2], 0.15);
        assert_eq!(*g.last().unwrap(), 0.95);
        assert_eq!(gamma_grid(1.0, 1.0, 0.0).unwrap(), vec![1.0]);
        assert!(gamma_grid(0.5, 0.4, 0.1).is_err());
        assert!(gamma_grid(0.1, 0.4, 0.0).is_err());
    }

    #[test]
    fn streams_are_distinct() {
        let a = instance_stream(20, 0.3, 0);
        assert_ne!(a, instance_stream(20, 0.3, 1));
        assert_ne!(a, instance_stream(20, 0.35, 0));
        assert_ne!(a, instance_stream(30, 0.3, 0));
        assert_eq!(a, instance_stream(20, 0.3, 0));
    }

    #[test]
    fn config_json_defaults() {
        let cfg = SweepConfig::from_json(
            r#"{"qubit_counts":[10],"gamma_min":0.1,"gamma_max":0.2,"gamma_step":0.1,
                "master_seed":1,"output_dir":"out"}"#,
        )
        .unwrap();
        assert_eq!(cfg.samples, 10);
        assert_eq!(cfg.m_for(20), 18);
        assert_eq!(cfg.solver.time_budget, 60.0);
        assert!(SweepConfig::from_json(r#"{"bogus":1}"#).is_err());
    }

    #[test]
    fn pixel_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let pixels = vec![PixelResult {
            n: 10,
            m: 9,
            gamma: 0.15,
            sat: 3,
            unsat: 6,
            unknown: 1,
            class: PixelClass::Unsatisfiable,
        }];
        let path = dir.path().join("p.csv");
        fs::write(&path, pixel_csv(&pixels)).unwrap();
        assert_eq!(load_pixels(&path).unwrap(), pixels);
    }

    fn small(dir: &Path, gamma: (f64, f64, f64), params: EncodingParams) -> SweepConfig {
        let mut cfg = SweepConfig::new(vec![8, 10], gamma, dir.to_path_buf());
        cfg.samples = 3;
        cfg.params = params;
        cfg.solver = SolverConfig::with_budget(10.0);
        cfg.master_seed = 42;
        cfg
    }

    #[test]
    fn empty_graphs_are_unsat_with_degree_bound() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_phase_sweep(&small(dir.path(), (0.0, 0.0, 0.0), EncodingParams::qubit_degree(3)))
            .unwrap();
        assert!(out.complete);
        assert!(out.pixels.iter().all(|p| p.class == PixelClass::Unsatisfiable));
    }

    #[test]
    fn complete_graphs_commutation_only_are_sat() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_phase_sweep(&small(dir.path(), (1.0, 1.0, 0.0), EncodingParams::commutation_only()))
            .unwrap();
        assert!(out.pixels.iter().all(|p| p.class == PixelClass::Satisfiable));
        assert_eq!(load_records(dir.path()).unwrap().len(), 6);
    }

    #[test]
    fn resume_matches_uninterrupted() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let params = EncodingParams::qubit_degree(1);
        let full = run_phase_sweep(&small(a.path(), (0.2, 0.6, 0.2), params)).unwrap();
        let mut partial = small(b.path(), (0.2, 0.6, 0.2), params);
        partial.stop_after = Some(2);
        let first = run_phase_sweep(&partial).unwrap();
        assert!(!first.complete);
        assert_eq!(first.pixels.len(), 2);
        partial.stop_after = None;
        let resumed = run_phase_sweep(&partial).unwrap();
        assert_eq!(resumed.pixels, full.pixels);
        let read = |d: &Path| fs::read(d.join("pixels.csv")).unwrap();
        assert_eq!(read(a.path()), read(b.path()));
        let ids = |d: &Path| {
            load_records(d)
                .unwrap()
                .into_iter()
                .map(|r| r.to_json().unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(ids(a.path()), ids(b.path()));
        // A different configuration must not silently reuse the directory.
        let mut other = small(b.path(), (0.2, 0.6, 0.2), params);
        other.master_seed = 7;
        assert!(run_phase_sweep(&other).is_err());
    }
}
