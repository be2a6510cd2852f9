//! `eqgc`: experiments, invariant checks and tables for equivariant quantum
//! graph circuits.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a failing suite, 2 for
//! usage, configuration and I/O errors.

mod config;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{parse_list, ConfigError, FileConfig, ListValue, RunConfig};
use eqgc::report::{dims_rows, write_dims, write_expt1, write_expt2, write_parity, ReportError};
use eqgc::training::{alpha_grid, experiment1, experiment2, summarize, TrainConfig, TrainError};

#[derive(Parser, Debug)]
#[command(name = "eqgc", version, about = "Equivariant quantum graph circuit experiments and checks")]
struct Cli {
    /// TOML file of flat `key = value` settings; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file (default: standard output).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Tolerance override for `verify`.
    #[arg(long, global = true)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ones-count distributions of CZ(alpha) then Hadamard on two triangles and the 6-cycle.
    Expt1 {
        /// Number of alpha values on [-pi, pi].
        #[arg(long)]
        points: Option<usize>,
    },
    /// Train models on the cycles dataset and write per-epoch metrics.
    Expt2 {
        /// Depths, e.g. `1,4,8` or `1-14`.
        #[arg(long)]
        depths: Option<String>,
        /// Number of seeds per depth, starting at --seed.
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        decay: Option<f64>,
    },
    /// Run the invariant suites of every module.
    Verify {
        /// Add an undirected gate with asymmetric phases, which must be caught.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Dimensions of equivariant linear and diagonal maps.
    Dims {
        /// Largest node count.
        #[arg(long)]
        n_max: Option<usize>,
        /// Node dimensions, e.g. `2,3,4`.
        #[arg(long)]
        s: Option<String>,
    },
    /// Observable bitstrings of CZ(pi) then Hadamard on the n-cycle.
    Parity {
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("cannot write {path}: {source}")]
    Create { path: PathBuf, source: io::Error },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Report(#[from] ReportError),

    #[error(transparent)]
    Train(#[from] TrainError),
}

impl Cli {
    /// Flags as a config layer, so they merge the same way as the file.
    fn flag_layer(&self) -> Result<FileConfig, ConfigError> {
        let list = |key: &'static str, s: &Option<String>| -> Result<Option<ListValue>, ConfigError> {
            s.as_deref()
                .map(|t| parse_list(t).map(ListValue::List).map_err(|msg| ConfigError::Invalid { key, msg }))
                .transpose()
        };
        let mut layer = FileConfig { out: self.out.clone(), seed: self.seed, tol: self.tol, ..Default::default() };
        match &self.command {
            Command::Expt1 { points } => layer.points = *points,
            Command::Expt2 { depths, seeds, epochs, lr, decay } => {
                layer.depths = list("depths", depths)?;
                layer.seeds = *seeds;
                layer.epochs = *epochs;
                layer.lr = *lr;
                layer.decay = *decay;
            }
            Command::Verify { inject_fault } => layer.inject_fault = inject_fault.then_some(true),
            Command::Dims { n_max, s } => {
                layer.n_max = *n_max;
                layer.s = list("s", s)?;
            }
            Command::Parity { n } => layer.n = *n,
        }
        Ok(layer)
    }

    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg = cfg.merge(&FileConfig::load(path)?)?;
        }
        let cfg = cfg.merge(&self.flag_layer()?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_output(cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|source| CliError::Create { path: path.clone(), source })?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let cfg = cli.resolve()?;
    match cli.command {
        Command::Expt1 { .. } => {
            let rows = experiment1(&alpha_grid(cfg.points))?;
            write_expt1(open_output(&cfg)?, &rows)?;
        }
        Command::Expt2 { .. } => {
            let base = TrainConfig { epochs: cfg.epochs, lr: cfg.lr, decay: cfg.decay, ..TrainConfig::default() };
            base.validate()?;
            let records = experiment2(&cfg.sorted_depths(), &cfg.seed_list(), &base)?;
            write_expt2(open_output(&cfg)?, &records)?;
            for s in summarize(&records) {
                eprintln!(
                    "depth {:2}: train ss {:.3}±{:.3} ms {:.3}±{:.3} | eval ss {:.3}±{:.3} ms {:.3}±{:.3}",
                    s.depth,
                    s.train_ss.mean,
                    s.train_ss.std,
                    s.train_ms.mean,
                    s.train_ms.std,
                    s.eval_ss.mean,
                    s.eval_ss.std,
                    s.eval_ms.mean,
                    s.eval_ms.std
                );
            }
        }
        Command::Verify { .. } => {
            let outcomes = verify::run_all(&verify::VerifyOptions {
                seed: cfg.seed,
                tol: cfg.tol,
                inject_fault: cfg.inject_fault,
            });
            let mut out = open_output(&cfg)?;
            for o in &outcomes {
                writeln!(out, "{o}")?;
            }
            let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed()).collect();
            match failed.first() {
                None => writeln!(out, "all {} suites passed", outcomes.len())?,
                Some(first) => writeln!(
                    out,
                    "{} of {} suites failed; first failure: {}::{}: {}",
                    failed.len(),
                    outcomes.len(),
                    first.module,
                    first.operation,
                    first.witness.as_deref().unwrap_or_default()
                )?,
            }
            out.flush()?;
            return Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Dims { .. } => {
            let ns: Vec<usize> = (1..=cfg.n_max).collect();
            write_dims(open_output(&cfg)?, &dims_rows(&ns, &cfg.s)?)?;
        }
        Command::Parity { .. } => write_parity(open_output(&cfg)?, cfg.n)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
