use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::probit::{parse_methods, Method};
use crate::sd::ChainConfig;

use super::CliError;

pub const DEFAULT_ITERS: usize = 20_000;
pub const DEFAULT_REPLICAS: usize = 100;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TOY_X: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Closed form, MR and VW on the Gaussian toy model.
    Toy,
    /// Replicated five-method comparison on a probit data set.
    Probit,
    /// Oracle checks, one line each.
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Toy => "toy",
            Command::Probit => "probit",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub x: f64,
    /// `None` means the bundled Pima file.
    pub data_path: Option<PathBuf>,
    pub iters: usize,
    pub burnin: usize,
    pub replicas: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// `None` writes to standard output.
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub timing: bool,
}

impl RunConfig {
    pub fn chain(&self) -> ChainConfig {
        ChainConfig {
            iters: self.iters,
            burnin: self.burnin,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.iters < 1 {
            return Err(Error::Usage("--iters must be at least 1".into()));
        }
        if self.burnin >= self.iters {
            return Err(Error::Usage(format!(
                "--burnin ({}) must be smaller than --iters ({})",
                self.burnin, self.iters
            )));
        }
        if self.replicas < 1 {
            return Err(Error::Usage("--replicas must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Usage("--methods must name at least one method".into()));
        }
        if !self.x.is_finite() {
            return Err(Error::Usage("--x must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "sdlab", version, about = "Savage-Dickey Bayes factor estimators and the probit comparison")]
struct Cli {
    command: Command,
    /// Observation for the toy model.
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,
    /// Probit data CSV (header type,glu,bp,ped); defaults to the bundled Pima file.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Iterations per chain, burn-in included.
    #[arg(long)]
    iters: Option<usize>,
    /// Discarded leading iterations (default: a tenth of --iters).
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of mr,vw,chib,is,bridge.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// JSON file with the same field names as the flags; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fill elapsed_ms (makes the output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MethodList {
    Joined(String),
    List(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    x: Option<f64>,
    data: Option<PathBuf>,
    iters: Option<usize>,
    burnin: Option<usize>,
    replicas: Option<usize>,
    seed: Option<u64>,
    methods: Option<MethodList>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    timing: Option<bool>,
}

fn load_config(path: &Path) -> Result<FileConfig, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return Err(match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Help(e.to_string()),
                _ => CliError::Lib(Error::Usage(e.to_string().trim_end().to_string())),
            });
        }
    };
    let file = match &cli.config {
        Some(path) => load_config(path)?,
        None => FileConfig::default(),
    };

    let x = cli.x.or(file.x);
    let data = cli.data.or(file.data);
    let replicas = cli.replicas.or(file.replicas);
    let methods = cli.methods.or(file.methods.map(|m| match m {
        MethodList::Joined(s) => s,
        MethodList::List(v) => v.join(","),
    }));

    let conflict = |flag: &str| -> CliError {
        CliError::Lib(Error::Usage(format!(
            "--{flag} does not apply to the {} command",
            cli.command.name()
        )))
    };
    match cli.command {
        Command::Toy => {
            if data.is_some() {
                return Err(conflict("data"));
            }
            if replicas.is_some() {
                return Err(conflict("replicas"));
            }
            if methods.is_some() {
                return Err(conflict("methods"));
            }
        }
        Command::Probit | Command::Validate => {
            if x.is_some() {
                return Err(conflict("x"));
            }
        }
    }
    if cli.command == Command::Validate && (data.is_some() || methods.is_some()) {
        return Err(conflict(if data.is_some() { "data" } else { "methods" }));
    }

    let iters = cli.iters.or(file.iters).unwrap_or(DEFAULT_ITERS);
    let config = RunConfig {
        command: cli.command,
        x: x.unwrap_or(DEFAULT_TOY_X),
        data_path: data,
        iters,
        burnin: cli.burnin.or(file.burnin).unwrap_or(iters / 10),
        replicas: replicas.unwrap_or(DEFAULT_REPLICAS),
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        methods: match methods {
            Some(list) => parse_methods(&list)?,
            None => Method::ALL.to_vec(),
        },
        out: cli.out.or(file.out),
        format: cli.format.or(file.format).unwrap_or_default(),
        timing: cli.timing || file.timing.unwrap_or(false),
    };
    config.validate()?;
    Ok(config)
}
