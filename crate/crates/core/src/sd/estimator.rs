//! The MR and VW estimators of `B₀₁` and the two estimators of `m̃₁/m₁`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::batch_means;
use crate::error::{Error, Result};

use super::chain::{ChainOutput, ChainTarget};
use super::problem::EmbeddedTestProblem;

/// exp overflows past this.
const MAX_LOG_TERM: f64 = 709.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SdMethod {
    /// Tilde-posterior Rao–Blackwell ordinate times the forward ratio.
    Mr,
    /// Full-posterior Rao–Blackwell ordinate times the null-conditional ratio.
    Vw,
}

/// A Monte Carlo average with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BayesFactorEstimate {
    pub method: SdMethod,
    /// Always exactly `rao_blackwell_term * ratio_term`.
    pub estimate: f64,
    pub log_estimate: f64,
    pub rao_blackwell_term: f64,
    pub ratio_term: f64,
    pub rao_blackwell_se: f64,
    pub ratio_se: f64,
}

impl BayesFactorEstimate {
    fn from_terms(method: SdMethod, rb: TermEstimate, ratio: TermEstimate) -> Self {
        BayesFactorEstimate {
            method,
            estimate: rb.value * ratio.value,
            log_estimate: rb.value.ln() + ratio.value.ln(),
            rao_blackwell_term: rb.value,
            ratio_term: ratio.value,
            rao_blackwell_se: rb.se,
            ratio_se: ratio.se,
        }
    }

    /// Delta-method SE of the product; the two terms come from independent chains.
    pub fn standard_error(&self) -> f64 {
        let rel_rb = self.rao_blackwell_se / self.rao_blackwell_term;
        let rel_ratio = self.ratio_se / self.ratio_term;
        self.estimate * (rel_rb * rel_rb + rel_ratio * rel_ratio).sqrt()
    }
}

/// Exponentiates per-draw log terms, failing on the first non-finite one.
fn exp_terms(logs: impl Iterator<Item = f64>, what: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut max_log = f64::NEG_INFINITY;
    for (t, l) in logs.enumerate() {
        if l.is_nan() {
            return Err(Error::numeric(format!("{what}: NaN at draw {t}")));
        }
        max_log = max_log.max(l);
        if l > MAX_LOG_TERM {
            return Err(Error::numeric(format!(
                "{what}: exp overflow at draw {t} (log term {l}, max so far {max_log})"
            )));
        }
        out.push(l.exp());
    }
    Ok(out)
}

fn average(values: &[f64]) -> TermEstimate {
    let (value, se) = batch_means(values);
    TermEstimate { value, se }
}

/// `(1/T) Σ π̃₁(θ₀|x, z̄_t, ψ̄_t) / π₁(θ₀)` over a tilde chain.
pub fn rao_blackwell_numerator<P: EmbeddedTestProblem + ?Sized>(
    chain: &ChainOutput,
    problem: &P,
) -> Result<TermEstimate> {
    chain.expect_target(ChainTarget::Tilde, "Rao-Blackwell numerator")?;
    let terms = exp_terms(
        chain.draws().map(|d| problem.log_bayes_ratio_tilde(&d)),
        "tilde Bayes ratio",
    )?;
    Ok(average(&terms))
}

/// `(1/T) Σ π₁(θ₀|x, z_t, ψ_t) / π₁(θ₀)` over a full chain.
pub fn rao_blackwell_full<P: EmbeddedTestProblem + ?Sized>(
    chain: &ChainOutput,
    problem: &P,
) -> Result<TermEstimate> {
    chain.expect_target(ChainTarget::Full, "full Rao-Blackwell term")?;
    let terms = exp_terms(
        chain.draws().map(|d| problem.log_bayes_ratio_full(&d)),
        "full Bayes ratio",
    )?;
    Ok(average(&terms))
}

/// Unbiased estimate of `m̃₁(x)/m₁(x)`: `(1/T) Σ π₀(ψ_t)/π₁(ψ_t|θ_t)` over a full chain.
pub fn ratio_forward<P: EmbeddedTestProblem + ?Sized>(
    chain: &ChainOutput,
    problem: &P,
) -> Result<TermEstimate> {
    chain.expect_target(ChainTarget::Full, "forward ratio")?;
    let terms = exp_terms(
        chain
            .draws()
            .map(|d| problem.log_prior_null(d.psi) - problem.log_prior_nuisance(d.psi, d.theta)),
        "π₀(ψ)/π₁(ψ|θ)",
    )?;
    Ok(average(&terms))
}

/// Harmonic-type estimate of `m̃₁(x)/m₁(x)`: `T / Σ π₁(ψ̄_t|θ̄_t)/π₀(ψ̄_t)`
/// over a tilde chain. Consistent but biased.
pub fn ratio_reciprocal<P: EmbeddedTestProblem + ?Sized>(
    chain: &ChainOutput,
    problem: &P,
) -> Result<TermEstimate> {
    chain.expect_target(ChainTarget::Tilde, "reciprocal ratio")?;
    let terms = exp_terms(
        chain
            .draws()
            .map(|d| problem.log_prior_nuisance(d.psi, d.theta) - problem.log_prior_null(d.psi)),
        "π₁(ψ|θ)/π₀(ψ)",
    )?;
    let inner = average(&terms);
    if !(inner.value > 0.0) {
        return Err(Error::numeric("reciprocal ratio: zero denominator"));
    }
    Ok(TermEstimate {
        value: 1.0 / inner.value,
        se: inner.se / (inner.value * inner.value),
    })
}

/// The MR estimator: tilde-chain Rao–Blackwell numerator times the forward
/// ratio from the full chain.
pub fn estimate_mr<P: EmbeddedTestProblem + ?Sized>(
    chain_tilde: &ChainOutput,
    chain_full: &ChainOutput,
    problem: &P,
) -> Result<BayesFactorEstimate> {
    let rb = rao_blackwell_numerator(chain_tilde, problem)?;
    let ratio = ratio_forward(chain_full, problem)?;
    Ok(BayesFactorEstimate::from_terms(SdMethod::Mr, rb, ratio))
}

/// The VW estimator: full-chain Rao–Blackwell ordinate times
/// `(1/T) Σ π₀(ψ̃_t)/π₁(ψ̃_t|θ₀)` over the null-conditional chain.
pub fn estimate_vw<P: EmbeddedTestProblem + ?Sized>(
    chain_full: &ChainOutput,
    chain_null: &ChainOutput,
    problem: &P,
) -> Result<BayesFactorEstimate> {
    let rb = rao_blackwell_full(chain_full, problem)?;
    chain_null.expect_target(ChainTarget::NullConditional, "VW ratio term")?;
    let theta0 = problem.theta0();
    let terms = exp_terms(
        chain_null
            .draws()
            .map(|d| problem.log_prior_null(d.psi) - problem.log_prior_nuisance(d.psi, theta0)),
        "π₀(ψ)/π₁(ψ|θ₀)",
    )?;
    Ok(BayesFactorEstimate::from_terms(SdMethod::Vw, rb, average(&terms)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coherence {
    Coherent,
    Suspect,
    Incoherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub statistic: f64,
    pub verdict: Coherence,
}

/// Standardized gap between the forward and reciprocal ratio estimates.
/// Large gaps point at an infinite-variance estimator.
pub fn coherence_diagnostic(r_forward: f64, se_f: f64, r_reciprocal: f64, se_r: f64) -> CoherenceReport {
    let gap = (r_forward - r_reciprocal).abs();
    let scale = (se_f * se_f + se_r * se_r).sqrt();
    let statistic = if gap == 0.0 {
        0.0
    } else if scale > 0.0 {
        gap / scale
    } else {
        f64::INFINITY
    };
    let verdict = if statistic < 3.0 {
        Coherence::Coherent
    } else if statistic <= 6.0 {
        Coherence::Suspect
    } else {
        Coherence::Incoherent
    };
    CoherenceReport { statistic, verdict }
}
