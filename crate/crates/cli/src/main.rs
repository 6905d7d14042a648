use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stabcolor::code::extract_code;
use stabcolor::encoder::{constraint_census, encode, ConstraintSystem, EncodingParams};
use stabcolor::erasure::{failure_rate, Estimator};
use stabcolor::graphgen::{sample_support_graph, SupportGraph};
use stabcolor::harness::{
    density_csv, instance_stream, load_records, run_decoding_benchmark,
    run_density_study, run_phase_sweep, CodeRecord, Provenance, SweepConfig,
};
use stabcolor::solver::{export_cnf, solve, SolverConfig, Verdict};
use stabcolor::{CssCode, Error, RngSpec};

const EXIT_NOT_FOUND: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(name = "stabcolor", version, about = "Find random sparse CSS codes by constraint solving")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random support graph.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a support graph as a constraint system.
    Encode {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a constraint system.
    Solve {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Verdict and statistics as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Satisfying assignment as a JSON array of booleans.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Sample, encode and solve one instance; write the code it yields.
    FindCode {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "code.json")]
        out: PathBuf,
    },
    /// Run or resume a phase sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Stop after this many new pixels.
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Density of the codes found by a sweep.
    Density {
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long, value_enum, default_value_t = Scope::MinGamma)]
        scope: Scope,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Erasure-channel failure rates of one code or of every code of a sweep.
    Decode {
        /// A code or code record JSON file.
        #[arg(long, conflicts_with = "sweep", required_unless_present = "sweep")]
        code: Option<PathBuf>,
        #[arg(long)]
        sweep: Option<PathBuf>,
        /// Erasure probabilities, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Exact)]
        estimator: EstimatorArg,
        /// CSV of per-code reports (sweep mode) or JSON reports (single code).
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of per-size minimum failure rates (sweep mode).
        #[arg(long)]
        minima: Option<PathBuf>,
    },
    /// Write a constraint system as DIMACS CNF.
    ExportCnf {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ParamArgs {
    /// JSON file with encoding parameters; flags below override it.
    #[arg(long = "params")]
    params_file: Option<PathBuf>,
    #[arg(long)]
    delta_q: Option<u32>,
    #[arg(long)]
    delta_s: Option<u32>,
    #[arg(long)]
    max_s: Option<u32>,
    #[arg(long)]
    balancing: bool,
}

impl ParamArgs {
    fn resolve(&self) -> Result<EncodingParams, Error> {
        let mut p = match &self.params_file {
            Some(path) => serde_json::from_str(&read(path)?)?,
            None => EncodingParams::default(),
        };
        if let Some(d) = self.delta_q {
            p.delta_q = d;
        }
        if let Some(d) = self.delta_s {
            p.delta_s = d;
        }
        if self.max_s.is_some() {
            p.max_s = self.max_s;
        }
        p.balancing |= self.balancing;
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct SolverArgs {
    /// JSON file with a solver configuration; flags below override it.
    #[arg(long = "solver-config")]
    solver_file: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    /// Time budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    solver_seed: Option<u64>,
}

impl SolverArgs {
    fn resolve(&self) -> Result<SolverConfig, Error> {
        let mut c = match (&self.solver_file, &self.preset) {
            (Some(path), _) => serde_json::from_str(&read(path)?)?,
            (None, Some(name)) => SolverConfig::preset(name)?,
            (None, None) => SolverConfig::default(),
        };
        if let Some(b) = self.budget {
            c.time_budget = b;
        }
        if let Some(s) = self.solver_seed {
            c.seed = s;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    /// Codes from the smallest gamma at which each size had a code.
    MinGamma,
    /// Every code.
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Exact,
    Bernoulli,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

enum Outcome {
    Done,
    NotFound(String),
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Sample {
            n,
            m,
            gamma,
            seed,
            stream,
            out,
        } => {
            let g = sample_support_graph(n, m, gamma, RngSpec::new(seed, stream))?;
            write(&out, &g.to_json()?)?;
            println!("{} edges", g.edge_count());
        }
        Command::Encode { graph, params, out } => {
            let g = SupportGraph::from_json(&read(&graph)?)?;
            let cs = encode(&g, params.resolve()?)?;
            write(&out, &cs.to_json()?)?;
            let census = constraint_census(&cs);
            println!(
                "{} variables, {} OR, {} XOR, {} linear",
                cs.num_vars(),
                census.or,
                census.xor,
                census.linear
            );
        }
        Command::Solve {
            system,
            solver,
            out,
            model,
        } => {
            let cs = ConstraintSystem::from_json(&read(&system)?)?;
            let result = solve(&cs, &solver.resolve()?)?;
            let json = result.stats_json()?;
            println!("{json}");
            if let Some(path) = out {
                write(&path, &json)?;
            }
            if let (Some(path), Verdict::Sat(a)) = (model, &result.verdict) {
                write(&path, &serde_json::to_string(a.values())?)?;
            }
        }
        Command::FindCode {
            n,
            m,
            gamma,
            seed,
            params,
            solver,
            out,
        } => {
            let params = params.resolve()?;
            let solver = solver.resolve()?;
            let stream_id = instance_stream(n, gamma, 0);
            let g = sample_support_graph(n, m, gamma, RngSpec::new(seed, stream_id))?;
            let cs = encode(&g, params)?;
            let result = solve(&cs, &solver)?;
            let Verdict::Sat(a) = &result.verdict else {
                return Ok(Outcome::NotFound(format!(
                    "no code: instance is {}",
                    result.verdict.label()
                )));
            };
            let code = extract_code(&g, a)?;
            let mut provenance = Provenance {
                n,
                m,
                gamma,
                graph_seed: g.seed(),
                master_seed: seed,
                stream_id,
                sample: 0,
                params,
                solver_seed: solver.seed,
                decisions: 0,
                conflicts: 0,
                propagations: 0,
                restarts: 0,
            };
            provenance.solver_stats(&result.stats);
            let record = CodeRecord::new(code, provenance);
            record.validate()?;
            write(&out, &record.to_json()?)?;
            println!("{}", serde_json::to_string_pretty(&record.stats)?);
        }
        Command::Sweep {
            config,
            out_dir,
            stop_after,
        } => {
            let mut cfg = SweepConfig::from_json(&read(&config)?)?;
            if let Some(dir) = out_dir {
                cfg.output_dir = dir;
            } else if cfg.output_dir.is_relative() {
                if let Some(base) = config.parent() {
                    cfg.output_dir = base.join(&cfg.output_dir);
                }
            }
            if stop_after.is_some() {
                cfg.stop_after = stop_after;
            }
            let outcome = run_phase_sweep(&cfg)?;
            for p in &outcome.pixels {
                println!(
                    "n={} gamma={} sat={} unsat={} unknown={} {}",
                    p.n,
                    p.gamma,
                    p.sat,
                    p.unsat,
                    p.unknown,
                    p.class.label()
                );
            }
            if !outcome.complete {
                println!("sweep interrupted; rerun to resume");
            }
        }
        Command::Density { sweep, scope, out } => {
            let records = load_records(&sweep)?;
            let mut min_gamma: BTreeMap<usize, f64> = BTreeMap::new();
            for r in &records {
                let g = min_gamma.entry(r.provenance.n).or_insert(f64::INFINITY);
                *g = g.min(r.provenance.gamma);
            }
            let selected: Vec<CodeRecord> = records
                .into_iter()
                .filter(|r| match scope {
                    Scope::All => true,
                    Scope::MinGamma => min_gamma[&r.provenance.n] == r.provenance.gamma,
                })
                .collect();
            let csv = density_csv(&run_density_study(&selected)?);
            print!("{csv}");
            if let Some(path) = out {
                write(&path, &csv)?;
            }
        }
        Command::Decode {
            code,
            sweep,
            p,
            trials,
            seed,
            estimator,
            out,
            minima,
        } => {
            let estimator = match estimator {
                EstimatorArg::Exact => Estimator::Exact,
                EstimatorArg::Bernoulli => Estimator::Bernoulli,
            };
            if let Some(path) = code {
                let text = read(&path)?;
                let code = match CodeRecord::from_json(&text) {
                    Ok(rec) => rec.code,
                    Err(_) => CssCode::from_json(&text)?,
                };
                let mut reports = Vec::new();
                for &pv in &p {
                    let r = failure_rate(&code, pv, trials, RngSpec::new(seed, 0), estimator)?;
                    println!(
                        "p={} trials={} failure_rate={} ci95={}",
                        r.p, r.trials, r.failure_rate, r.ci95
                    );
                    reports.push(r);
                }
                if let Some(path) = out {
                    write(&path, &serde_json::to_string_pretty(&reports)?)?;
                }
            } else if let Some(dir) = sweep {
                let records = load_records(&dir)?;
                let table =
                    run_decoding_benchmark(&records, &p, trials, RngSpec::new(seed, 0), estimator)?;
                print!("{}", table.minima_csv());
                if let Some(path) = out {
                    write(&path, &table.rows_csv())?;
                }
                if let Some(path) = minima {
                    write(&path, &table.minima_csv())?;
                }
            }
        }
        Command::ExportCnf { system, out } => {
            let cs = ConstraintSystem::from_json(&read(&system)?)?;
            let e = export_cnf(&cs);
            write(&out, &e.text)?;
            println!("{} variables, {} clauses", e.num_vars, e.num_clauses);
        }
    }
    Ok(Outcome::Done)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) => EXIT_USAGE,
        Error::Io { .. } => EXIT_IO,
        Error::Structure(_) | Error::Validation(_) | Error::Parse(_) | Error::Json(_) => {
            EXIT_VALIDATION
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::NotFound(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_NOT_FOUND)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
