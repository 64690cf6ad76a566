//! Replicated comparison of the five Bayes factor estimators on one probit test.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::sd::{
    coherence_diagnostic, estimate_mr, estimate_vw, ratio_reciprocal, ChainConfig, ChainTarget,
    EmbeddedTestProblem,
};

use super::bridge::bridge_bf;
use super::evidence::{chib_evidence, is_evidence};
use super::gprior::ProbitTest;
use super::model::MleFit;

/// Fixed-point cap for the bridge iteration inside the experiment.
pub const BRIDGE_MAX_ITERATIONS: usize = 1000;

pub const CSV_HEADER: &str =
    "method,replica,seed,iters,burnin,bf_estimate,log_bf,rb_term,ratio_term,coherence_stat,elapsed_ms,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bridge,
    Chib,
    Is,
    Mr,
    Vw,
}

impl Method {
    /// Sorted by name, which is also the output order.
    pub const ALL: [Method; 5] = [Method::Bridge, Method::Chib, Method::Is, Method::Mr, Method::Vw];

    pub fn name(self) -> &'static str {
        match self {
            Method::Bridge => "bridge",
            Method::Chib => "chib",
            Method::Is => "is",
            Method::Mr => "mr",
            Method::Vw => "vw",
        }
    }

    // Substream label of a cell; fixed so adding methods never reshuffles others.
    fn stream_label(self) -> u64 {
        match self {
            Method::Mr => 1,
            Method::Vw => 2,
            Method::Chib => 3,
            Method::Is => 4,
            Method::Bridge => 5,
        }
    }

    fn needs_mle(self) -> bool {
        matches!(self, Method::Is | Method::Bridge)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bridge" => Ok(Method::Bridge),
            "chib" => Ok(Method::Chib),
            "is" => Ok(Method::Is),
            "mr" => Ok(Method::Mr),
            "vw" => Ok(Method::Vw),
            other => Err(Error::Usage(format!(
                "unknown method {other:?} (expected mr, vw, chib, is or bridge)"
            ))),
        }
    }
}

/// Parses a comma-separated method list; duplicates are dropped, order is normalized.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut methods = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Method>>>()?;
    methods.sort();
    methods.dedup();
    if methods.is_empty() {
        return Err(Error::Usage("method list is empty".into()));
    }
    Ok(methods)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub chain: ChainConfig,
    pub replicas: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Record wall-clock time per cell. Off by default since it breaks byte-identical output.
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(chain: ChainConfig, replicas: usize, seed: u64, methods: Vec<Method>) -> Self {
        ExperimentConfig {
            chain,
            replicas,
            seed,
            methods,
            threads: None,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        if self.replicas == 0 {
            return Err(Error::param("replicas must be at least 1"));
        }
        if self.methods.is_empty() {
            return Err(Error::param("at least one method is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub method: Method,
    pub replica: usize,
    pub seed: u64,
    pub iters: usize,
    pub burnin: usize,
    pub bf_estimate: Option<f64>,
    pub log_bf: Option<f64>,
    pub rb_term: Option<f64>,
    pub ratio_term: Option<f64>,
    pub coherence_stat: Option<f64>,
    pub elapsed_ms: Option<f64>,
    pub status: CellStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ExperimentRow {
    pub fn is_ok(&self) -> bool {
        self.status == CellStatus::Ok
    }
}

#[derive(Debug, Default)]
struct CellValues {
    log_bf: f64,
    rb_term: Option<f64>,
    ratio_term: Option<f64>,
    coherence_stat: Option<f64>,
}

struct SharedFits {
    full: std::result::Result<MleFit, String>,
    null: std::result::Result<MleFit, String>,
}

fn shared_fit<'a>(fit: &'a std::result::Result<MleFit, String>) -> Result<&'a MleFit> {
    fit.as_ref().map_err(|e| Error::numeric(format!("MLE unavailable: {e}")))
}

fn run_cell(
    test: &ProbitTest,
    fits: Option<&SharedFits>,
    method: Method,
    chain: ChainConfig,
    stream: RngStream,
) -> Result<CellValues> {
    match method {
        Method::Mr => {
            let tilde = test.sample_chain(ChainTarget::Tilde, chain, stream.substream(1))?;
            let full = test.sample_chain(ChainTarget::Full, chain, stream.substream(2))?;
            let est = estimate_mr(&tilde, &full, test)?;
            let reciprocal = ratio_reciprocal(&tilde, test)?;
            let coherence = coherence_diagnostic(est.ratio_term, est.ratio_se, reciprocal.value, reciprocal.se);
            Ok(CellValues {
                log_bf: est.log_estimate,
                rb_term: Some(est.rao_blackwell_term),
                ratio_term: Some(est.ratio_term),
                coherence_stat: Some(coherence.statistic),
            })
        }
        Method::Vw => {
            let full = test.sample_chain(ChainTarget::Full, chain, stream.substream(1))?;
            let null = test.sample_chain(ChainTarget::NullConditional, chain, stream.substream(2))?;
            let est = estimate_vw(&full, &null, test)?;
            Ok(CellValues {
                log_bf: est.log_estimate,
                rb_term: Some(est.rao_blackwell_term),
                ratio_term: Some(est.ratio_term),
                coherence_stat: None,
            })
        }
        Method::Chib => {
            let full_draws = test.full_model().gibbs(chain, stream.substream(1))?;
            let null_draws = test.null_model().gibbs(chain, stream.substream(2))?;
            let m1 = chib_evidence(test.full_model(), &full_draws, &full_draws.mean())?;
            let m0 = chib_evidence(test.null_model(), &null_draws, &null_draws.mean())?;
            Ok(CellValues {
                log_bf: m0.log_evidence - m1.log_evidence,
                ..Default::default()
            })
        }
        Method::Is => {
            let fits = fits.ok_or_else(|| Error::numeric("MLE fits were not prepared"))?;
            let m1 = is_evidence(test.full_model(), shared_fit(&fits.full)?, chain.iters, stream.substream(1))?;
            let m0 = is_evidence(test.null_model(), shared_fit(&fits.null)?, chain.iters, stream.substream(2))?;
            Ok(CellValues {
                log_bf: m0.log_evidence - m1.log_evidence,
                ..Default::default()
            })
        }
        Method::Bridge => {
            let fits = fits.ok_or_else(|| Error::numeric("MLE fits were not prepared"))?;
            let full_draws = test.full_model().gibbs(chain, stream.substream(1))?;
            let null_draws = test.null_model().gibbs(chain, stream.substream(2))?;
            let est = bridge_bf(
                test,
                &null_draws,
                &full_draws,
                shared_fit(&fits.full)?,
                stream.substream(3),
                BRIDGE_MAX_ITERATIONS,
            )?;
            if !est.converged {
                return Err(Error::numeric(format!(
                    "bridge iteration did not converge in {} steps",
                    est.iterations
                )));
            }
            Ok(CellValues {
                log_bf: est.log_bf,
                ..Default::default()
            })
        }
    }
}

/// Runs every requested method on every replica. Replica `r` draws from
/// `RngStream(seed, r)`, split per method; rows come back sorted by
/// `(method, replica)` whatever the scheduling. A failing cell produces a
/// `failed` row instead of an error.
pub fn run_pima_experiment(test: &ProbitTest, config: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    run_pima_experiment_with_progress(test, config, |_| {})
}

/// As [`run_pima_experiment`], calling `progress` as each cell finishes
/// (in completion order).
pub fn run_pima_experiment_with_progress<F>(
    test: &ProbitTest,
    config: &ExperimentConfig,
    progress: F,
) -> Result<Vec<ExperimentRow>>
where
    F: Fn(&ExperimentRow) + Sync,
{
    config.validate()?;
    let mut methods = config.methods.clone();
    methods.sort();
    methods.dedup();

    let fits = methods.iter().any(|m| m.needs_mle()).then(|| SharedFits {
        full: test.full_model().mle().map_err(|e| e.to_string()),
        null: test.null_model().mle().map_err(|e| e.to_string()),
    });

    let cells: Vec<(Method, usize)> = methods
        .iter()
        .flat_map(|&m| (0..config.replicas).map(move |r| (m, r)))
        .collect();

    let work = || -> Vec<ExperimentRow> {
        cells
            .par_iter()
            .map(|&(method, replica)| {
                let stream = RngStream::new(config.seed, replica as u64).substream(method.stream_label());
                let start = Instant::now();
                let outcome = run_cell(test, fits.as_ref(), method, config.chain, stream);
                let elapsed = config.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
                let row = to_row(method, replica, config, outcome, elapsed);
                progress(&row);
                row
            })
            .collect()
    };

    let mut rows = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::param(format!("cannot build worker pool: {e}")))?
            .install(work),
        None => work(),
    };
    rows.sort_by_key(|r| (r.method, r.replica));
    Ok(rows)
}

fn to_row(
    method: Method,
    replica: usize,
    config: &ExperimentConfig,
    outcome: Result<CellValues>,
    elapsed_ms: Option<f64>,
) -> ExperimentRow {
    let base = ExperimentRow {
        method,
        replica,
        seed: config.seed,
        iters: config.chain.iters,
        burnin: config.chain.burnin,
        bf_estimate: None,
        log_bf: None,
        rb_term: None,
        ratio_term: None,
        coherence_stat: None,
        elapsed_ms,
        status: CellStatus::Failed,
        error: None,
    };
    match outcome {
        Ok(v) if v.log_bf.is_finite() && v.log_bf.exp().is_finite() => ExperimentRow {
            bf_estimate: Some(v.log_bf.exp()),
            log_bf: Some(v.log_bf),
            rb_term: v.rb_term,
            ratio_term: v.ratio_term,
            coherence_stat: v.coherence_stat,
            status: CellStatus::Ok,
            ..base
        },
        Ok(v) => ExperimentRow {
            error: Some(format!("non-finite Bayes factor (log {})", v.log_bf)),
            ..base
        },
        Err(e) => ExperimentRow {
            error: Some(e.to_string()),
            ..base
        },
    }
}

/// 17 significant digits, round-trip exact.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let io_err = |e: csv::Error| Error::Numeric(format!("csv write failed: {e}"));
    w.write_record(CSV_HEADER.split(',')).map_err(io_err)?;
    for r in rows {
        let status = match r.status {
            CellStatus::Ok => "ok",
            CellStatus::Failed => "failed",
        };
        w.write_record([
            r.method.name().to_string(),
            r.replica.to_string(),
            r.seed.to_string(),
            r.iters.to_string(),
            r.burnin.to_string(),
            opt(r.bf_estimate),
            opt(r.log_bf),
            opt(r.rb_term),
            opt(r.ratio_term),
            opt(r.coherence_stat),
            opt(r.elapsed_ms),
            status.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Numeric(format!("csv flush failed: {e}")))?;
    Ok(())
}

pub fn write_json<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, rows).map_err(|e| Error::Numeric(format!("json write failed: {e}")))
}
