//! Bridge sampling between the completed null posterior and the full posterior.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dist::{normal_logpdf, sample_std_normal};
use crate::error::{Error, Result};
use crate::linalg::{select, SpdMatrix};
use crate::rng::RngStream;
use crate::sd::EmbeddedTestProblem;

use super::gprior::{NormalPrior, ProbitTest};
use super::model::{MleFit, PosteriorDraws};

pub const BRIDGE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeEstimate {
    pub bf: f64,
    pub log_bf: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `log r` after each fixed-point update, starting with the initial value.
    pub trace: Vec<f64>,
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn log_mean_exp(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + (v.iter().map(|x| (x - max).exp()).sum::<f64>() / v.len() as f64).ln()
}

/// Iterative optimal bridge for `r = c₀/c₁` given `log l = log h₀ − log h₁`
/// evaluated at draws from `h₀/c₀` (`log_l_null`) and from `h₁/c₁` (`log_l_full`):
///
/// ```text
/// r ← [ (1/n₁) Σ_full l/(s₀ l + s₁ r) ] / [ (1/n₀) Σ_null 1/(s₀ l + s₁ r) ]
/// ```
///
/// with `s_i = n_i / (n₀ + n₁)`, iterated until the relative change drops
/// below `tolerance` or `max_iterations` updates have been made.
pub fn meng_wong(log_l_null: &[f64], log_l_full: &[f64], max_iterations: usize, tolerance: f64) -> Result<BridgeEstimate> {
    if log_l_null.is_empty() || log_l_full.is_empty() {
        return Err(Error::input("bridge sampling needs draws from both densities"));
    }
    if log_l_null.iter().chain(log_l_full).any(|v| v.is_nan()) {
        return Err(Error::numeric("NaN density ratio in bridge sampling"));
    }
    let n0 = log_l_null.len() as f64;
    let n1 = log_l_full.len() as f64;
    let ln_s0 = (n0 / (n0 + n1)).ln();
    let ln_s1 = (n1 / (n0 + n1)).ln();

    // importance-sampling start: E_full[l] = c₀/c₁
    let mut log_r = log_mean_exp(log_l_full.iter().copied());
    if !log_r.is_finite() {
        return Err(Error::numeric("bridge sampling: initial ratio is not finite"));
    }
    let mut trace = vec![log_r];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iterations {
        let num = log_mean_exp(log_l_full.iter().map(|&l| l - log_add_exp(ln_s0 + l, ln_s1 + log_r)));
        let den = log_mean_exp(log_l_null.iter().map(|&l| -log_add_exp(ln_s0 + l, ln_s1 + log_r)));
        let next = num - den;
        iterations += 1;
        if !next.is_finite() {
            return Err(Error::numeric(format!("bridge fixed point diverged at iteration {iterations}")));
        }
        let change = (next - log_r).exp_m1().abs();
        log_r = next;
        trace.push(log_r);
        if change < tolerance {
            converged = true;
            break;
        }
    }
    Ok(BridgeEstimate {
        bf: log_r.exp(),
        log_bf: log_r,
        iterations,
        converged,
        trace,
    })
}

/// Gaussian completion `q(θ | ψ)`: the conditional of the tested coefficient
/// given the others under the full-model MLE asymptotic joint `N(β̂, Σ̂)`.
#[derive(Debug, Clone)]
pub struct MleCompletion {
    theta_hat: f64,
    psi_hat: DVector<f64>,
    coef: DVector<f64>,
    var: f64,
}

impl MleCompletion {
    pub fn new(test: &ProbitTest, fit: &MleFit) -> Result<Self> {
        let k = fit.beta.len();
        let j = test.tested();
        let rest: Vec<usize> = (0..k).filter(|&c| c != j).collect();
        let cov = fit.cov.matrix();
        let s_pp = SpdMatrix::new(select(cov, &rest, &rest))?;
        let s_pt = select(cov, &rest, &[j]).column(0).into_owned();
        let coef = s_pp.solve(&s_pt);
        let var = cov[(j, j)] - s_pt.dot(&coef);
        if !(var > 0.0) {
            return Err(Error::NotSpd("conditional MLE variance of θ".into()));
        }
        let (theta_hat, psi_hat) = test.split(fit.beta.as_slice());
        Ok(MleCompletion {
            theta_hat,
            psi_hat: DVector::from_vec(psi_hat),
            coef,
            var,
        })
    }

    pub fn conditional(&self, psi: &[f64]) -> NormalPrior {
        let shift: f64 = self
            .coef
            .iter()
            .zip(psi.iter().zip(self.psi_hat.iter()))
            .map(|(c, (p, h))| c * (p - h))
            .sum();
        NormalPrior {
            mean: self.theta_hat + shift,
            var: self.var,
        }
    }
}

/// Bridge estimate of `B₀₁` between
/// `h₀(θ,ψ) = f(x|θ₀,ψ) π₀(ψ) q(θ|ψ)` and `h₁(θ,ψ) = f(x|θ,ψ) π₁(θ,ψ)`.
///
/// `null_draws` are null-model posterior draws of `ψ`, completed here with
/// `θ ~ q(θ|ψ)` from `completion_stream`; `full_draws` are full-posterior
/// draws of `β`.
pub fn bridge_bf(
    test: &ProbitTest,
    null_draws: &PosteriorDraws,
    full_draws: &PosteriorDraws,
    full_mle: &MleFit,
    completion_stream: RngStream,
    max_iterations: usize,
) -> Result<BridgeEstimate> {
    if null_draws.is_empty() || full_draws.is_empty() {
        return Err(Error::input("bridge sampling needs non-empty null and full chains"));
    }
    let q = MleCompletion::new(test, full_mle)?;
    let full = test.full_model();
    let null_at_theta0 = test.null_conditional_model();
    let log_l = |theta: f64, psi: &[f64]| -> f64 {
        let qc = q.conditional(psi);
        let beta = test.join(theta, psi);
        let log_h0 = null_at_theta0.loglik(psi) + test.log_prior_null(psi) + normal_logpdf(theta, qc.mean, qc.var);
        let log_h1 = full.loglik(&beta) + full.log_prior(&beta);
        log_h0 - log_h1
    };
    let mut rng = completion_stream.rng();
    let log_l_null: Vec<f64> = (0..null_draws.len())
        .map(|t| {
            let psi = null_draws.beta(t);
            let qc = q.conditional(psi);
            let theta = qc.mean + qc.var.sqrt() * sample_std_normal(&mut rng);
            log_l(theta, psi)
        })
        .collect();
    let log_l_full: Vec<f64> = (0..full_draws.len())
        .map(|t| {
            let (theta, psi) = test.split(full_draws.beta(t));
            log_l(theta, &psi)
        })
        .collect();
    meng_wong(&log_l_null, &log_l_full, max_iterations, BRIDGE_TOLERANCE)
}
