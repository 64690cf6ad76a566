//! Quadrature evidences for one- and two-coefficient probit models.

use crate::error::{Error, Result};
use crate::quad;

use super::model::ProbitModel;

/// Half-width of the integration box in MLE standard deviations.
const BOX_SDS: f64 = 12.0;

/// `log ∫ f(x|β) π(β) dβ` by (nested) adaptive quadrature on a box around
/// the MLE. Supports `k ∈ {1, 2}`.
pub fn quadrature_log_evidence(model: &ProbitModel) -> Result<f64> {
    let fit = model.mle()?;
    let k = model.k();
    let center = fit.beta.clone();
    let sd: Vec<f64> = (0..k).map(|a| fit.cov.matrix()[(a, a)].sqrt()).collect();
    let log_joint = |b: &[f64]| model.loglik(b) + model.log_prior(b);
    let shift = log_joint(center.as_slice());
    match k {
        1 => {
            let v = quad::integrate(
                |t| (log_joint(&[t]) - shift).exp(),
                center[0] - BOX_SDS * sd[0],
                center[0] + BOX_SDS * sd[0],
                1e-11,
            )?;
            Ok(shift + v.ln())
        }
        2 => {
            let inner = |t0: f64| -> f64 {
                quad::integrate(
                    |t1| (log_joint(&[t0, t1]) - shift).exp(),
                    center[1] - BOX_SDS * sd[1],
                    center[1] + BOX_SDS * sd[1],
                    1e-11,
                )
                .unwrap_or(f64::NAN)
            };
            let v = quad::integrate(inner, center[0] - BOX_SDS * sd[0], center[0] + BOX_SDS * sd[0], 1e-10)?;
            Ok(shift + v.ln())
        }
        _ => Err(Error::param(format!("quadrature evidence supports 1 or 2 coefficients, got {k}"))),
    }
}
