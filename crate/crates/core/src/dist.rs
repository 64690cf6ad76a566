//! The handful of distributions the models need: normal, multivariate
//! normal, one-sided truncated normal and inverse gamma.

use std::f64::consts::{LN_2, PI, SQRT_2};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use libm::erfc;
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;

/// `ln(2π) / 2`
pub const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this point `log Φ` switches to its asymptotic series.
const LOG_CDF_ASYMPTOTIC_BELOW: f64 = -30.0;

/// Standardized truncation points beyond this use exponential-proposal
/// rejection instead of inversion.
const TAIL_REJECTION_FROM: f64 = 0.5;

pub fn std_normal_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / SQRT_2)
}

pub fn std_normal_logpdf(t: f64) -> f64 {
    -0.5 * t * t - HALF_LN_2PI
}

/// `log Φ(t)`, accurate far into the lower tail.
pub fn log_std_normal_cdf(t: f64) -> f64 {
    if t > LOG_CDF_ASYMPTOTIC_BELOW {
        let p = std_normal_cdf(t);
        if t > 5.0 {
            // Φ(t) is within 3e-7 of 1; log1p of the complement keeps digits
            (-std_normal_cdf(-t)).ln_1p()
        } else {
            p.ln()
        }
    } else {
        // Φ(t) = φ(t)/|t| · (1 - 1/t² + 3/t⁴ - 15/t⁶ + ...)
        let t2 = t * t;
        let series = 1.0 - 1.0 / t2 + 3.0 / (t2 * t2) - 15.0 / (t2 * t2 * t2);
        std_normal_logpdf(t) - (-t).ln() + series.ln()
    }
}

/// Inverse Mills ratio `φ(t)/Φ(t)`.
pub fn inverse_mills(t: f64) -> f64 {
    (std_normal_logpdf(t) - log_std_normal_cdf(t)).exp()
}

pub fn std_normal_quantile(p: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * p)
}

/// Log density of `N(mean, var)` at `x`.
pub fn normal_logpdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    -0.5 * (d * d / var + var.ln()) - HALF_LN_2PI
}

/// `log[bᵃ/Γ(a) · θ^(−a−1) · e^(−b/θ)]`.
pub fn inv_gamma_logpdf(theta: f64, shape: f64, rate: f64) -> Result<f64> {
    if !(shape > 0.0 && rate > 0.0) {
        return Err(Error::param(format!(
            "inverse gamma needs shape, rate > 0 (got {shape}, {rate})"
        )));
    }
    if !(theta > 0.0) {
        return Err(Error::Domain(format!("inverse gamma density at θ = {theta}")));
    }
    Ok(shape * rate.ln() - ln_gamma(shape) - (shape + 1.0) * theta.ln() - rate / theta)
}

pub fn sample_inv_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, rate: f64) -> Result<f64> {
    let gamma = Gamma::new(shape, 1.0 / rate).map_err(|e| {
        Error::param(format!("inverse gamma (shape {shape}, rate {rate}): {e}"))
    })?;
    Ok(1.0 / gamma.sample(rng))
}

pub fn sample_std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Support `(0, ∞)`.
    AboveZero,
    /// Support `(−∞, 0)`.
    BelowZero,
}

/// Draw from `N(mu, sigma²)` restricted to one side of zero. The draw is
/// strictly inside the half-line.
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    mu: f64,
    sigma: f64,
    side: Truncation,
) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("truncated normal sigma must be > 0, got {sigma}")));
    }
    if !mu.is_finite() {
        return Err(Error::param(format!("truncated normal mean must be finite, got {mu}")));
    }
    Ok(match side {
        Truncation::AboveZero => loop {
            let x = mu + sigma * std_normal_above(rng, -mu / sigma);
            if x > 0.0 {
                break x;
            }
        },
        Truncation::BelowZero => loop {
            let x = mu - sigma * std_normal_above(rng, mu / sigma);
            if x < 0.0 {
                break x;
            }
        },
    })
}

/// Standard normal conditioned on `Z > alpha`, strictly.
fn std_normal_above<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    if alpha > TAIL_REJECTION_FROM {
        // Exponential proposal shifted to alpha with the rate that
        // maximizes the acceptance probability.
        let rate = 0.5 * (alpha + (alpha * alpha + 4.0).sqrt());
        loop {
            let e: f64 = Exp1.sample(rng);
            let z = alpha + e / rate;
            let u: f64 = rng.random();
            let d = z - rate;
            if z > alpha && u <= (-0.5 * d * d).exp() {
                return z;
            }
        }
    } else {
        let tail = std_normal_cdf(-alpha);
        loop {
            // 1 - u lies in (0, 1]
            let u: f64 = rng.random();
            let z = -std_normal_quantile((1.0 - u) * tail);
            if z > alpha && z.is_finite() {
                return z;
            }
        }
    }
}

/// Log density of `N(mean, cov)` at `v`.
pub fn mvn_logpdf(v: &DVector<f64>, mean: &DVector<f64>, cov: &SpdMatrix) -> Result<f64> {
    let k = cov.dim();
    if v.len() != k || mean.len() != k {
        return Err(Error::param(format!(
            "dimension mismatch: point {}, mean {}, covariance {k}",
            v.len(),
            mean.len()
        )));
    }
    let q = cov.inv_quad_form(&(v - mean));
    Ok(-0.5 * (q + cov.log_det()) - k as f64 * HALF_LN_2PI)
}

pub fn sample_mvn<R: Rng + ?Sized>(
    rng: &mut R,
    mean: &DVector<f64>,
    cov: &SpdMatrix,
) -> Result<DVector<f64>> {
    let k = cov.dim();
    if mean.len() != k {
        return Err(Error::param(format!(
            "dimension mismatch: mean {}, covariance {k}",
            mean.len()
        )));
    }
    let noise = DVector::from_fn(k, |_, _| sample_std_normal(rng));
    Ok(mean + cov.factor() * noise)
}

/// `log Γ(3/2) = log(√π / 2)`
pub fn ln_gamma_three_halves() -> f64 {
    0.5 * PI.ln() - LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use statrs::function::gamma::gamma_ur;

    fn ks_statistic(mut draws: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        crate::diagnostics::ks_statistic(&mut draws, cdf)
    }

    /// Two-sided KS critical value at level 0.001 for large n.
    fn ks_critical_001(n: usize) -> f64 {
        1.9495 / (n as f64).sqrt()
    }

    #[test]
    fn cdf_reference_points() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((std_normal_cdf(40.0) - 1.0).abs() <= 1e-15);
        // mpmath: ncdf(1) at 30 digits
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() <= 1e-12);
        assert!((std_normal_cdf(-1.0) - 0.158_655_253_931_457_05).abs() <= 1e-12);
        // mpmath: ncdf(-7) = 1.279812543885835e-12
        assert!((std_normal_cdf(-7.0) / 1.279_812_543_885_835e-12 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_cdf_is_continuous_across_branches() {
        for &t in &[-30.0, 5.0] {
            let lo = log_std_normal_cdf(t - 1e-9);
            let hi = log_std_normal_cdf(t + 1e-9);
            assert!((lo - hi).abs() < 1e-6 * lo.abs().max(1e-8), "jump at {t}: {lo} vs {hi}");
        }
        // mpmath: log(ncdf(-40)) = -804.6084420137538
        assert!((log_std_normal_cdf(-40.0) + 804.608_442_013_753_8).abs() < 1e-9);
        // mpmath: log(ncdf(8)) = -6.220960574271785e-16
        assert!((log_std_normal_cdf(8.0) / -6.220_960_574_271_785e-16 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-10, 0.01, 0.3, 0.5, 0.9] {
            assert!((std_normal_cdf(std_normal_quantile(p)) / p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inv_gamma_formula_and_errors() {
        assert!((inv_gamma_logpdf(1.0, 1.0, 1.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(inv_gamma_logpdf(0.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(inv_gamma_logpdf(-1.0, 1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(inv_gamma_logpdf(1.0, 0.0, 1.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn inv_gamma_normalizes() {
        for &(a, b) in &[(1.0, 1.0), (2.0, 1.0), (1.5, 1.25)] {
            let total = crate::quad::integrate(
                |t| inv_gamma_logpdf(t, a, b).unwrap().exp(),
                0.0,
                50.0,
                1e-10,
            )
            .unwrap()
                + crate::quad::integrate(
                    |t| inv_gamma_logpdf(t, a, b).unwrap().exp(),
                    50.0,
                    1e7,
                    1e-10,
                )
                .unwrap();
            assert!((total - 1.0).abs() < 1e-6, "IG({a},{b}) integrates to {total}");
        }
    }

    #[test]
    fn mvn_logpdf_at_mean_identity() {
        let cov = SpdMatrix::from_row_slice(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let m = DVector::from_vec(vec![0.3, -2.0]);
        let lp = mvn_logpdf(&m, &m, &cov).unwrap();
        assert!((lp + (2.0 * PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn mvn_logpdf_matches_explicit_quadratic_form() {
        let cov = SpdMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let v = DVector::from_vec(vec![1.0, -0.5]);
        let mean = DVector::from_vec(vec![0.2, 0.1]);
        let d = [0.8, -0.6];
        // explicit inverse of [[2,1],[1,2]] is [[2,-1],[-1,2]]/3
        let q = (2.0 * d[0] * d[0] - 2.0 * d[0] * d[1] + 2.0 * d[1] * d[1]) / 3.0;
        let expected = -0.5 * q - 0.5 * 3.0_f64.ln() - (2.0 * PI).ln();
        assert!((mvn_logpdf(&v, &mean, &cov).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn mvn_dimension_mismatch() {
        let cov = SpdMatrix::from_row_slice(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let v = DVector::from_vec(vec![0.0; 3]);
        assert!(matches!(mvn_logpdf(&v, &v, &cov), Err(Error::Parameter(_))));
        let mut rng = RngStream::new(1, 1).rng();
        assert!(sample_mvn(&mut rng, &v, &cov).is_err());
    }

    #[test]
    fn mvn_sample_covariance() {
        let cov = SpdMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let mean = DVector::from_vec(vec![1.0, -1.0]);
        let mut rng = RngStream::new(42, 3).rng();
        let n = 100_000;
        let draws: Vec<DVector<f64>> =
            (0..n).map(|_| sample_mvn(&mut rng, &mean, &cov).unwrap()).collect();
        let nf = n as f64;
        let m0 = draws.iter().map(|d| d[0]).sum::<f64>() / nf;
        let m1 = draws.iter().map(|d| d[1]).sum::<f64>() / nf;
        assert!((m0 - 1.0).abs() < 3.0 * (2.0 / nf).sqrt());
        assert!((m1 + 1.0).abs() < 3.0 * (2.0 / nf).sqrt());
        let target = [[2.0, 1.0], [1.0, 2.0]];
        for a in 0..2 {
            for b in 0..2 {
                let (ma, mb) = (if a == 0 { m0 } else { m1 }, if b == 0 { m0 } else { m1 });
                let prods: Vec<f64> = draws.iter().map(|d| (d[a] - ma) * (d[b] - mb)).collect();
                let c = prods.iter().sum::<f64>() / nf;
                let var = prods.iter().map(|p| (p - c) * (p - c)).sum::<f64>() / nf;
                let se = (var / nf).sqrt();
                assert!((c - target[a][b]).abs() < 3.0 * se, "cov[{a}][{b}] = {c}");
            }
        }
    }

    #[test]
    fn mvn_sampler_ks_against_marginal() {
        let cov = SpdMatrix::from_row_slice(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let mean = DVector::from_vec(vec![0.5, 0.0]);
        let mut rng = RngStream::new(42, 4).rng();
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_mvn(&mut rng, &mean, &cov).unwrap()[0]).collect();
        let d = ks_statistic(xs, |x| std_normal_cdf((x - 0.5) / 2.0_f64.sqrt()));
        assert!(d < ks_critical_001(n), "KS {d}");
    }

    #[test]
    fn truncated_half_normal_mean() {
        let mut rng = RngStream::new(42, 10).rng();
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_truncated_normal(&mut rng, 0.0, 1.0, Truncation::AboveZero).unwrap())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let expected = (2.0 / PI).sqrt();
        // half-normal variance is 1 - 2/π
        let se = ((1.0 - 2.0 / PI) / n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "mean {mean}");
        assert!(xs.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn truncated_nearly_inactive() {
        let mut rng = RngStream::new(42, 11).rng();
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_truncated_normal(&mut rng, 5.0, 1.0, Truncation::AboveZero).unwrap())
            .collect();
        assert!(xs.iter().all(|&x| x > 0.0));
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - 5.0).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn truncated_deep_tail_mean() {
        let mut rng = RngStream::new(42, 12).rng();
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_truncated_normal(&mut rng, -5.0, 1.0, Truncation::AboveZero).unwrap())
            .collect();
        assert!(xs.iter().all(|&x| x > 0.0 && x.is_finite()));
        // E[Z | Z > a] = φ(a)/(1-Φ(a)); Var = 1 + a λ - λ²
        let a = 5.0;
        let lambda = inverse_mills(-a);
        let expected = -5.0 + lambda;
        let var = 1.0 + a * lambda - lambda * lambda;
        let mean = xs.iter().sum::<f64>() / n as f64;
        assert!((mean - expected).abs() < 3.0 * (var / n as f64).sqrt(), "mean {mean} vs {expected}");
    }

    #[test]
    fn truncated_ks_both_regimes() {
        let n = 10_000;
        for (i, &(mu, sigma, side)) in [
            (0.3, 1.0, Truncation::AboveZero),
            (-2.0, 1.5, Truncation::AboveZero),
            (1.0, 0.5, Truncation::BelowZero),
            (-0.2, 2.0, Truncation::BelowZero),
        ]
        .iter()
        .enumerate()
        {
            let mut rng = RngStream::new(42, 20 + i as u64).rng();
            let xs: Vec<f64> = (0..n)
                .map(|_| sample_truncated_normal(&mut rng, mu, sigma, side).unwrap())
                .collect();
            let cdf = |x: f64| match side {
                Truncation::AboveZero => {
                    let tail = std_normal_cdf(mu / sigma);
                    1.0 - std_normal_cdf(-(x - mu) / sigma) / tail
                }
                Truncation::BelowZero => {
                    std_normal_cdf((x - mu) / sigma) / std_normal_cdf(-mu / sigma)
                }
            };
            let d = ks_statistic(xs, cdf);
            assert!(d < ks_critical_001(n), "case {i}: KS {d}");
        }
    }

    #[test]
    fn truncated_bounds_hold_in_extreme_tails() {
        let mut rng = RngStream::new(7, 30).rng();
        let cases = [
            (-8.0, 1.0, Truncation::AboveZero),
            (8.0, 1.0, Truncation::BelowZero),
            (8.0, 1.0, Truncation::AboveZero),
            (-8.0, 1.0, Truncation::BelowZero),
            (-16.0, 2.0, Truncation::AboveZero),
        ];
        for _ in 0..200_000 {
            for &(mu, sigma, side) in &cases {
                let x = sample_truncated_normal(&mut rng, mu, sigma, side).unwrap();
                match side {
                    Truncation::AboveZero => assert!(x > 0.0),
                    Truncation::BelowZero => assert!(x < 0.0),
                }
            }
        }
    }

    #[test]
    fn truncated_rejects_bad_sigma() {
        let mut rng = RngStream::new(1, 1).rng();
        assert!(matches!(
            sample_truncated_normal(&mut rng, 0.0, 0.0, Truncation::AboveZero),
            Err(Error::Parameter(_))
        ));
        assert!(sample_truncated_normal(&mut rng, 0.0, -1.0, Truncation::BelowZero).is_err());
    }

    #[test]
    fn inv_gamma_sampler_ks() {
        let mut rng = RngStream::new(42, 40).rng();
        let n = 10_000;
        let (a, b) = (1.5, 1.25);
        let xs: Vec<f64> = (0..n).map(|_| sample_inv_gamma(&mut rng, a, b).unwrap()).collect();
        let d = ks_statistic(xs, |x| gamma_ur(a, b / x));
        assert!(d < ks_critical_001(n), "KS {d}");
    }

    #[test]
    fn normal_sampler_ks() {
        let mut rng = RngStream::new(42, 41).rng();
        let n = 10_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_std_normal(&mut rng)).collect();
        let d = ks_statistic(xs, std_normal_cdf);
        assert!(d < ks_critical_001(n), "KS {d}");
    }

    #[test]
    fn same_stream_is_bit_identical() {
        let run = || {
            let mut rng = RngStream::new(5, 5).rng();
            (0..100)
                .map(|i| {
                    sample_truncated_normal(&mut rng, i as f64 * 0.1 - 5.0, 1.0, Truncation::AboveZero)
                        .unwrap()
                        .to_bits()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
