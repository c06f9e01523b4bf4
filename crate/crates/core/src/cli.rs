//! Command-line front end.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::control::{best_dc, best_sc, odc_execute, owc_check, ControllabilityReport, Property, Stppu, Verdict, Witness};
use crate::execute::{render_trace, ExecutionFailure, NatureModel};
use crate::gen::{gen_random, GenError, GenSpec};
use crate::io::{self, ParseError};
use crate::oracle::{oracle_dc_level, oracle_sc_level, oracle_wc, OracleError, SearchBounds};
use crate::preference::{solve_stpp, SoftProblem};
use crate::stp;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stppu", version, about = "Controllability and execution of temporal problems with preferences and uncertainty")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckProperty {
    Osc,
    Owc,
    Odc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleProperty {
    Sc,
    Dc,
    Wc,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide optimal strong, weak or dynamic controllability.
    Check {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum)]
        property: CheckProperty,
    },
    /// Best preference level of the problem with uncertainty ignored.
    SolveStpp {
        #[arg(long)]
        file: PathBuf,
    },
    /// Run the dynamic strategy against nature.
    Execute {
        #[arg(long)]
        file: PathBuf,
        /// script:<path>, random:<seed> or adversarial
        #[arg(long)]
        nature: String,
        /// Write the execution trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exhaustive reference check for small problems.
    Oracle {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_enum)]
        property: OracleProperty,
        #[arg(long)]
        horizon: Option<i64>,
    },
    /// Write a random problem.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        contingents: usize,
        #[arg(long, default_value_t = 0.3)]
        density: f64,
        #[arg(long, default_value_t = 8)]
        span: i64,
        #[arg(long, default_value_t = 5)]
        denom: u32,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: String, source: Box<ParseError> },
    #[error("bad --nature `{0}`, expected script:<path>, random:<seed> or adversarial")]
    Nature(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("execution failed: {0}")]
    Execution(ExecutionFailure),
    #[error("not controllable, nothing to execute")]
    NotControllable,
    #[error("problem is inconsistent")]
    Inconsistent,
    #[error(transparent)]
    Inconclusive(#[from] OracleError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::NotControllable | CliError::Inconsistent => EXIT_NEGATIVE,
            CliError::Inconclusive(_) | CliError::Execution(ExecutionFailure::Inconclusive(_)) => EXIT_INCONCLUSIVE,
            _ => EXIT_USAGE,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })
}

fn load(path: &Path) -> Result<Stppu, CliError> {
    io::parse_problem(&read(path)?).map_err(|source| CliError::Parse {
        path: path.display().to_string(),
        source: Box::new(source),
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

pub fn check(p: &Stppu, property: CheckProperty) -> ControllabilityReport {
    match property {
        CheckProperty::Osc => best_sc(p),
        CheckProperty::Odc => best_dc(p),
        CheckProperty::Owc => {
            let holds = owc_check(p);
            ControllabilityReport {
                property: Property::Weak,
                verdict: Verdict::Holds(holds),
                grid: p.grid(),
                stop_event: None,
                witness: Witness::Weak(holds),
                levels_examined: 0,
            }
        }
    }
}

fn nature_model(spec: &str, p: &Stppu) -> Result<NatureModel, CliError> {
    if spec == "adversarial" {
        return Ok(NatureModel::Adversarial);
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        return seed.parse().map(NatureModel::Random).map_err(|_| CliError::Nature(spec.to_string()));
    }
    if let Some(path) = spec.strip_prefix("script:") {
        let path = Path::new(path);
        let w = io::parse_nature(&read(path)?, p).map_err(|source| CliError::Parse {
            path: path.display().to_string(),
            source: Box::new(source),
        })?;
        return Ok(NatureModel::Scripted(w));
    }
    Err(CliError::Nature(spec.to_string()))
}

/// Runs one command, writing results to `out`. Returns the exit code.
pub fn run_command(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    let emit = |out: &mut dyn Write, s: String| {
        let _ = out.write_all(s.as_bytes());
    };
    match cmd {
        Command::Check { file, property } => {
            let p = load(&file)?;
            let r = check(&p, property);
            emit(out, io::to_json(&io::report_json(&r, p.names())));
            Ok(if r.verdict.is_success() { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::SolveStpp { file } => {
            let p = load(&file)?;
            let (opt, minimal) = solve_stpp(&p).map_err(|_| CliError::Inconsistent)?;
            let earliest = stp::earliest_solution(&minimal).map_err(|_| CliError::Inconsistent)?;
            emit(out, io::to_json(&io::solution_json(opt, &minimal, &earliest, p.grid())));
            Ok(EXIT_OK)
        }
        Command::Execute { file, nature, trace } => {
            let p = load(&file)?;
            let model = nature_model(&nature, &p)?;
            let Witness::Dynamic(r) = best_dc(&p).witness else {
                return Err(CliError::NotControllable);
            };
            let e = odc_execute(&r, &model).map_err(|e| match e {
                ExecutionFailure::NotControllable => CliError::NotControllable,
                e => CliError::Execution(e),
            })?;
            if let Some(path) = trace {
                write_file(&path, &render_trace(&e.trace, p.names()))?;
            }
            emit(out, io::to_json(&io::execution_json(&e, p.names(), p.grid())));
            Ok(EXIT_OK)
        }
        Command::Oracle { file, property, horizon } => {
            let p = load(&file)?;
            let mut b = SearchBounds::from_env();
            if let Some(h) = horizon {
                b = b.with_horizon(h);
            }
            let (label, v) = match property {
                OracleProperty::Sc => ("sc", oracle_sc_level(&p, &b)?),
                OracleProperty::Dc => ("dc", oracle_dc_level(&p, &b)?),
                OracleProperty::Wc => ("wc", Verdict::Holds(oracle_wc(&p, &b)?)),
            };
            emit(out, io::to_json(&io::oracle_json(label, &v, p.grid())));
            Ok(if v.is_success() { EXIT_OK } else { EXIT_NEGATIVE })
        }
        Command::Gen {
            seed,
            n,
            out: path,
            contingents,
            density,
            span,
            denom,
        } => {
            let p = gen_random(&GenSpec {
                n,
                contingent_count: contingents,
                density,
                span,
                denom,
                seed,
            })?;
            write_file(&path, &io::serialize_problem(&p))?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match run_command(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
