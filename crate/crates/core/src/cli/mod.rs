//! The `sdlab` command line: argument handling, commands and exit codes.

mod args;
mod validate;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

pub use args::{parse_args, Command, OutputFormat, RunConfig, DEFAULT_ITERS, DEFAULT_REPLICAS, DEFAULT_SEED};
pub use validate::{run_checks, Check};

use crate::error::Error;
use crate::probit::{
    bundled_pima, load_pima, run_pima_experiment_with_progress, write_csv, write_json, ExperimentConfig,
    GPriorSpec, ProbitTest,
};
use crate::rng::RngStream;
use crate::toy::{estimate_toy, ToyReport};

pub const EXIT_OK: i32 = 0;
/// Some experiment cells or validation checks failed.
pub const EXIT_PARTIAL: i32 = 1;
pub const EXIT_IO: i32 = 2;
/// Every cell failed, or the computation itself errored.
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

pub const THREADS_ENV: &str = "SDLAB_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// `--help` or `--version`; not a failure.
    #[error("{0}")]
    Help(String),
    #[error(transparent)]
    Lib(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Help(_) => EXIT_OK,
            CliError::Lib(e) => exit_code_for(e),
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Input(_) => EXIT_IO,
        Error::Usage(_) | Error::Parameter(_) => EXIT_USAGE,
        Error::Domain(_) | Error::Numeric(_) | Error::NotSpd(_) => EXIT_NUMERIC,
    }
}

/// Worker cap from `SDLAB_THREADS`; unset or empty means no cap.
pub fn threads_from_env() -> Result<Option<usize>, Error> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Executes `config`, writing data to `--out` (or `stdout`) and progress to `stderr`.
pub fn run<O: Write, E: Write + Send>(config: &RunConfig, stdout: &mut O, stderr: &mut E) -> i32 {
    let outcome = match config.command {
        Command::Toy => run_toy(config, stdout),
        Command::Probit => run_probit(config, stdout, stderr),
        Command::Validate => run_validate(stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "sdlab: {e}");
            exit_code_for(&e)
        }
    }
}

fn with_output<O: Write>(
    config: &RunConfig,
    stdout: &mut O,
    body: impl FnOnce(&mut dyn Write) -> Result<(), Error>,
) -> Result<(), Error> {
    match &config.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(|e| Error::io(path, e))
        }
        None => {
            body(stdout)?;
            stdout.flush().map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn stdout_err(e: io::Error) -> Error {
    Error::io("<output>", e)
}

fn write_toy_text(r: &ToyReport, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "toy model at x = {}", r.x)?;
    writeln!(w, "closed-form B01  {:.10}", r.closed_form)?;
    for (name, e) in [("MR", &r.mr), ("VW", &r.vw)] {
        writeln!(
            w,
            "{name} estimate      {:.10}  se {:.3e}  rel.err {:+.3e}  (rb {:.8}, ratio {:.8})",
            e.estimate,
            e.standard_error(),
            e.estimate / r.closed_form - 1.0,
            e.rao_blackwell_term,
            e.ratio_term
        )?;
    }
    writeln!(
        w,
        "coherence        forward {:.8} (se {:.2e})  reciprocal {:.8} (se {:.2e})  statistic {:.3}  {:?}",
        r.ratio_forward.value,
        r.ratio_forward.se,
        r.ratio_reciprocal.value,
        r.ratio_reciprocal.se,
        r.coherence.statistic,
        r.coherence.verdict
    )
}

fn run_toy<O: Write>(config: &RunConfig, stdout: &mut O) -> Result<i32, Error> {
    let report = estimate_toy(config.x, config.chain(), RngStream::new(config.seed, 0))?;
    with_output(config, stdout, |w| match config.format {
        OutputFormat::Csv => write_toy_text(&report, w).map_err(stdout_err),
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, &report).map_err(|e| Error::numeric(e.to_string()))?;
            writeln!(w).map_err(stdout_err)
        }
    })?;
    Ok(EXIT_OK)
}

fn run_probit<O: Write, E: Write + Send>(config: &RunConfig, stdout: &mut O, stderr: &mut E) -> Result<i32, Error> {
    let data = match &config.data_path {
        Some(path) => load_pima(path)?,
        None => bundled_pima(),
    };
    let spec = GPriorSpec::unit_information(&data);
    let test = ProbitTest::new(data, spec)?;
    let mut exp = ExperimentConfig::new(config.chain(), config.replicas, config.seed, config.methods.clone());
    exp.threads = threads_from_env()?;
    exp.timing = config.timing;

    let total = config.replicas * config.methods.len();
    let done = AtomicUsize::new(0);
    let log = Mutex::new(&mut *stderr);
    let rows = run_pima_experiment_with_progress(&test, &exp, |row| {
        let k = done.fetch_add(1, Ordering::Relaxed) + 1;
        if let Ok(mut err) = log.lock() {
            let _ = match &row.error {
                None => writeln!(err, "[{k}/{total}] {} replica {} ok", row.method, row.replica),
                Some(msg) => writeln!(err, "[{k}/{total}] {} replica {} FAILED: {msg}", row.method, row.replica),
            };
        }
    })?;
    with_output(config, stdout, |w| match config.format {
        OutputFormat::Csv => write_csv(&rows, w),
        OutputFormat::Json => write_json(&rows, &mut *w).and_then(|_| writeln!(w).map_err(stdout_err)),
    })?;
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    Ok(if failed == 0 {
        EXIT_OK
    } else if failed == rows.len() {
        EXIT_NUMERIC
    } else {
        EXIT_PARTIAL
    })
}

fn run_validate<O: Write>(stdout: &mut O) -> Result<i32, Error> {
    let mut all_ok = true;
    for check in run_checks() {
        all_ok &= check.passed;
        writeln!(stdout, "{check}").map_err(stdout_err)?;
    }
    stdout.flush().map_err(stdout_err)?;
    Ok(if all_ok { EXIT_OK } else { EXIT_PARTIAL })
}
