//! Marginal likelihood estimates for a single probit model.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::diagnostics::batch_means;
use crate::dist::{mvn_logpdf, sample_mvn};
use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::rng::RngStream;

use super::model::{MleFit, PosteriorDraws, ProbitModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEstimate {
    pub log_evidence: f64,
    /// Standard error on the log scale.
    pub log_se: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImportanceEstimate {
    pub log_evidence: f64,
    pub log_se: f64,
    /// Coefficient of variation of the importance weights.
    pub weight_cv: f64,
    pub effective_sample_size: f64,
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Chib's estimate
/// `log m = log f(x|β*) + log π(β*) − log[(1/T) Σ φ(β*; E[β|z_t], Cov[β|z])]`
/// with the posterior ordinate Rao–Blackwellized over the latent draws.
pub fn chib_evidence(model: &ProbitModel, draws: &PosteriorDraws, beta_star: &DVector<f64>) -> Result<EvidenceEstimate> {
    if draws.is_empty() {
        return Err(Error::input("Chib's method needs a non-empty chain"));
    }
    let cov = model.conditional_cov();
    let log_ordinates: Vec<f64> = (0..draws.len())
        .map(|t| mvn_logpdf(beta_star, &model.conditional_mean(draws.xtz(t)), cov))
        .collect::<Result<_>>()?;
    let shift = log_ordinates.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(Error::numeric("Chib posterior ordinate is zero at β*"));
    }
    let scaled: Vec<f64> = log_ordinates.iter().map(|l| (l - shift).exp()).collect();
    let (mean, se) = batch_means(&scaled);
    if !(mean > 0.0) {
        return Err(Error::numeric("Chib posterior ordinate estimate is not positive"));
    }
    let log_ordinate = shift + mean.ln();
    let b = beta_star.as_slice();
    Ok(EvidenceEstimate {
        log_evidence: model.loglik(b) + model.log_prior(b) - log_ordinate,
        log_se: se / mean,
    })
}

/// Importance sampling with the MLE's asymptotic normal as proposal:
/// `m̂ = (1/T) Σ π(β_t) f(x|β_t) / q(β_t)`, `β_t ~ N(β̂, Σ̂)`.
pub fn is_evidence(model: &ProbitModel, fit: &MleFit, draws: usize, stream: RngStream) -> Result<ImportanceEstimate> {
    importance_evidence(|b| model.loglik(b) + model.log_prior(b), &fit.beta, &fit.cov, draws, stream)
}

/// `log (1/T) Σ exp(log_target(β_t) − log q(β_t))` with `β_t ~ q = N(mean, cov)`,
/// accumulated with a max shift.
pub fn importance_evidence<F>(
    log_target: F,
    mean: &DVector<f64>,
    cov: &SpdMatrix,
    draws: usize,
    stream: RngStream,
) -> Result<ImportanceEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    if draws == 0 {
        return Err(Error::input("importance sampling needs at least one draw"));
    }
    let mut rng = stream.rng();
    let mut log_w = Vec::with_capacity(draws);
    for _ in 0..draws {
        let beta = sample_mvn(&mut rng, mean, cov)?;
        log_w.push(log_target(beta.as_slice()) - mvn_logpdf(&beta, mean, cov)?);
    }
    if log_w.iter().any(|v| v.is_nan()) {
        return Err(Error::numeric("NaN importance weight"));
    }
    let lse = log_sum_exp(&log_w);
    if !lse.is_finite() {
        return Err(Error::numeric("all importance weights underflow"));
    }
    let n = draws as f64;
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let w_mean = w.iter().sum::<f64>() / n;
    let var = w.iter().map(|v| (v - w_mean) * (v - w_mean)).sum::<f64>() / n;
    let cv = var.sqrt() / w_mean;
    let sum_sq: f64 = w.iter().map(|v| v * v).sum();
    Ok(ImportanceEstimate {
        log_evidence: lse - n.ln(),
        log_se: cv / n.sqrt(),
        weight_cv: cv,
        effective_sample_size: (w_mean * n) * (w_mean * n) / sum_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::normal_logpdf;
    use crate::probit::data::ProbitData;

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2.0_f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn empty_inputs_rejected() {
        let d = ProbitData::new(vec![1.0, -1.0, 0.5], 1, vec![true, false, false], vec!["x".into()]).unwrap();
        let m = ProbitModel::new(d, DVector::zeros(1), SpdMatrix::from_row_slice(1, &[1.0]).unwrap()).unwrap();
        let empty = PosteriorDraws { k: 1, beta: vec![], xtz: vec![] };
        assert!(matches!(chib_evidence(&m, &empty, &DVector::zeros(1)), Err(Error::Input(_))));
        let fit = m.mle().unwrap();
        assert!(is_evidence(&m, &fit, 0, RngStream::new(1, 1)).is_err());
    }

    #[test]
    fn exact_proposal_gives_constant_weights() {
        // y | β ~ N(β, 1), β ~ N(0, 1): posterior N(y/2, 1/2), evidence N(y; 0, 2)
        let y = 0.8;
        let mean = DVector::from_vec(vec![y / 2.0]);
        let cov = SpdMatrix::from_row_slice(1, &[0.5]).unwrap();
        let est = importance_evidence(
            |b| normal_logpdf(y, b[0], 1.0) + normal_logpdf(b[0], 0.0, 1.0),
            &mean,
            &cov,
            500,
            RngStream::new(2, 2),
        )
        .unwrap();
        assert!(est.weight_cv < 1e-12, "cv {}", est.weight_cv);
        assert!((est.log_evidence - normal_logpdf(y, 0.0, 2.0)).abs() < 1e-12);
        assert!((est.effective_sample_size - 500.0).abs() < 1e-6);
    }
}
