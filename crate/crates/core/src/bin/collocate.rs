use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use collocate::experiments::{
    run_condition_study, run_convergence_study, run_interp_study, run_recovery_study, run_weil_study,
    ConditionConfig, ConvergenceConfig, ExperimentRecord, InterpConfig, MeshConfig, RecoveryConfig, RecoveryPreset,
    WeilConfig,
};
use collocate::mesh::write_csv;
use collocate::{Error, Result};

/// Environment variable consulted when `--threads` is absent.
const THREADS_ENV: &str = "COLLOCATE_THREADS";

#[derive(Parser)]
#[command(name = "collocate", version, about = "Stochastic collocation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gram condition numbers against polynomial degree.
    Condition(Common),
    /// Least-squares test error against polynomial degree.
    Convergence(Common),
    /// ℓ1 recovery success rate against sparsity.
    Recovery {
        #[command(flatten)]
        common: Common,
        /// Start from a named preset instead of the config's.
        #[arg(long, value_parser = parse_preset)]
        preset: Option<RecoveryPreset>,
    },
    /// Weil point marginals and symmetry along a prime sweep.
    Weil(Common),
    /// Write a generated mesh as CSV.
    Mesh(Common),
    /// Least orthogonal interpolation summary and Lebesgue estimate.
    Interp(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; defaults apply to absent fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (falls back to COLLOCATE_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Also write the full record, wall time included, as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_preset(s: &str) -> std::result::Result<RecoveryPreset, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned()))
        .map_err(|_| "expected chebyshev2d, legendre2d, chebyshev15d or legendre15d".to_owned())
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let file = File::open(p).map_err(|e| Error::InvalidArgument(format!("cannot open {}: {e}", p.display())))?;
            Ok(serde_json::from_reader(io::BufReader::new(file))?)
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidArgument(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit(record: &ExperimentRecord, common: &Common) -> Result<()> {
    let mut out = output(common.out.as_deref())?;
    record.write_csv(&mut out)?;
    out.flush()?;
    if let Some(path) = &common.json {
        let mut f = BufWriter::new(File::create(path)?);
        record.write_json(&mut f)?;
        f.flush()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let common = match &cli.command {
        Command::Condition(c)
        | Command::Convergence(c)
        | Command::Weil(c)
        | Command::Mesh(c)
        | Command::Interp(c)
        | Command::Recovery { common: c, .. } => c,
    };
    if let Some(n) = thread_count(common.threads)? {
        if n == 0 {
            return Err(Error::InvalidArgument("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let config = common.config.as_deref();
    match &cli.command {
        Command::Condition(c) => {
            let mut cfg: ConditionConfig = load(config)?;
            cfg.seed = c.seed.unwrap_or(cfg.seed);
            emit(&run_condition_study(&cfg)?, c)
        }
        Command::Convergence(c) => {
            let mut cfg: ConvergenceConfig = load(config)?;
            cfg.seed = c.seed.unwrap_or(cfg.seed);
            emit(&run_convergence_study(&cfg)?, c)
        }
        Command::Recovery { common: c, preset } => {
            let mut cfg: RecoveryConfig = load(config)?;
            cfg.seed = c.seed.unwrap_or(cfg.seed);
            if preset.is_some() {
                cfg.preset = *preset;
            }
            emit(&run_recovery_study(&cfg)?, c)
        }
        // Weil sets are deterministic; a seed has nothing to act on.
        Command::Weil(c) => emit(&run_weil_study(&load::<WeilConfig>(config)?)?, c),
        Command::Mesh(c) => {
            let mut cfg: MeshConfig = load(config)?;
            cfg.seed = c.seed.unwrap_or(cfg.seed);
            let mesh = cfg.generate()?;
            let mut out = output(c.out.as_deref())?;
            write_csv(&mesh, &mut out)?;
            out.flush()?;
            Ok(())
        }
        Command::Interp(c) => {
            let mut cfg: InterpConfig = load(config)?;
            if let Some(seed) = c.seed {
                cfg.seed = seed;
                cfg.mesh.seed = seed;
            }
            emit(&run_interp_study(&cfg)?, c)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("collocate: {e}");
            ExitCode::FAILURE
        }
    }
}
