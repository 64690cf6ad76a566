//! A probit regression with a normal coefficient prior: likelihood, MLE and
//! the data-augmentation Gibbs sampler.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dist::{log_std_normal_cdf, inverse_mills, mvn_logpdf, sample_std_normal, sample_truncated_normal, Truncation};
use crate::error::{Error, Result};
use crate::linalg::{symmetrize, SpdMatrix};
use crate::rng::RngStream;
use crate::sd::ChainConfig;

use super::data::ProbitData;

const MLE_GRADIENT_TOL: f64 = 1e-8;
const MLE_MAX_ITERATIONS: usize = 100;
/// Coefficients this large on any scale mean the likelihood has no maximum.
const SEPARATION_BOUND: f64 = 1e6;

/// `y_i = 1{z_i > 0}`, `z_i ~ N(x_iᵀβ + offset_i, 1)`, `β ~ N(prior_mean, prior_cov)`.
#[derive(Debug, Clone)]
pub struct ProbitModel {
    data: ProbitData,
    offset: Vec<f64>,
    prior_mean: DVector<f64>,
    prior_cov: SpdMatrix,
    /// `(XᵀX + V⁻¹)⁻¹`
    post_cov: SpdMatrix,
    /// `V⁻¹ m`
    prior_shift: DVector<f64>,
}

/// Coefficient draws with the per-draw statistic `Xᵀ(z − offset)`.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub k: usize,
    pub beta: Vec<f64>,
    pub xtz: Vec<f64>,
}

impl PosteriorDraws {
    pub fn len(&self) -> usize {
        self.beta.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn beta(&self, t: usize) -> &[f64] {
        &self.beta[t * self.k..(t + 1) * self.k]
    }

    pub fn xtz(&self, t: usize) -> &[f64] {
        &self.xtz[t * self.k..(t + 1) * self.k]
    }

    pub fn mean(&self) -> DVector<f64> {
        let mut m = DVector::zeros(self.k);
        for t in 0..self.len() {
            for (a, v) in self.beta(t).iter().enumerate() {
                m[a] += v;
            }
        }
        m / self.len() as f64
    }
}

#[derive(Debug, Clone)]
pub struct MleFit {
    pub beta: DVector<f64>,
    /// Inverse observed information at `beta`.
    pub cov: SpdMatrix,
    pub loglik: f64,
    pub iterations: usize,
}

impl ProbitModel {
    pub fn new(data: ProbitData, prior_mean: DVector<f64>, prior_cov: SpdMatrix) -> Result<Self> {
        let offset = vec![0.0; data.n()];
        Self::with_offset(data, offset, prior_mean, prior_cov)
    }

    pub fn with_offset(
        data: ProbitData,
        offset: Vec<f64>,
        prior_mean: DVector<f64>,
        prior_cov: SpdMatrix,
    ) -> Result<Self> {
        let k = data.k();
        if prior_mean.len() != k || prior_cov.dim() != k {
            return Err(Error::param(format!(
                "prior of dimension {}/{} for {k} coefficients",
                prior_mean.len(),
                prior_cov.dim()
            )));
        }
        if offset.len() != data.n() {
            return Err(Error::param("offset length differs from the number of observations"));
        }
        let prior_precision = prior_cov.inverse();
        let mut precision = data.gram() + &prior_precision;
        symmetrize(&mut precision);
        let post_precision = SpdMatrix::new(precision)?;
        let post_cov = SpdMatrix::new(post_precision.inverse())?;
        let prior_shift = prior_cov.solve(&prior_mean);
        Ok(ProbitModel {
            data,
            offset,
            prior_mean,
            prior_cov,
            post_cov,
            prior_shift,
        })
    }

    pub fn data(&self) -> &ProbitData {
        &self.data
    }

    pub fn k(&self) -> usize {
        self.data.k()
    }

    pub fn prior_mean(&self) -> &DVector<f64> {
        &self.prior_mean
    }

    pub fn prior_cov(&self) -> &SpdMatrix {
        &self.prior_cov
    }

    /// Covariance of `β | z`.
    pub fn conditional_cov(&self) -> &SpdMatrix {
        &self.post_cov
    }

    /// Mean of `β | z` given `Xᵀ(z − offset)`.
    pub fn conditional_mean(&self, xtz: &[f64]) -> DVector<f64> {
        let rhs = DVector::from_column_slice(xtz) + &self.prior_shift;
        self.post_cov.matrix() * rhs
    }

    fn linear_predictor(&self, beta: &[f64], i: usize) -> f64 {
        self.data
            .row(i)
            .iter()
            .zip(beta)
            .map(|(x, b)| x * b)
            .sum::<f64>()
            + self.offset[i]
    }

    /// `Σ y_i log Φ(η_i) + (1 − y_i) log Φ(−η_i)`.
    pub fn loglik(&self, beta: &[f64]) -> f64 {
        (0..self.data.n())
            .map(|i| {
                let eta = self.linear_predictor(beta, i);
                if self.data.y()[i] {
                    log_std_normal_cdf(eta)
                } else {
                    log_std_normal_cdf(-eta)
                }
            })
            .sum()
    }

    pub fn log_prior(&self, beta: &[f64]) -> f64 {
        mvn_logpdf(&DVector::from_column_slice(beta), &self.prior_mean, &self.prior_cov)
            .expect("dimension checked at construction")
    }

    /// Log-likelihood, gradient and Hessian.
    fn derivatives(&self, beta: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let k = self.k();
        let mut ll = 0.0;
        let mut grad = DVector::zeros(k);
        let mut hess = DMatrix::zeros(k, k);
        for i in 0..self.data.n() {
            let eta = self.linear_predictor(beta, i);
            let (sign, s) = if self.data.y()[i] { (1.0, eta) } else { (-1.0, -eta) };
            ll += log_std_normal_cdf(s);
            let lambda = inverse_mills(s);
            // d/dη log Φ(sη) = sλ(sη);  d²/dη² = −λ(sη)(λ(sη) + sη)
            let d1 = sign * lambda;
            let w = lambda * (lambda + s);
            let row = self.data.row(i);
            for a in 0..k {
                grad[a] += d1 * row[a];
                for b in 0..=a {
                    hess[(a, b)] -= w * row[a] * row[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                hess[(b, a)] = hess[(a, b)];
            }
        }
        (ll, grad, hess)
    }

    pub fn gradient(&self, beta: &[f64]) -> DVector<f64> {
        self.derivatives(beta).1
    }

    pub fn hessian(&self, beta: &[f64]) -> DMatrix<f64> {
        self.derivatives(beta).2
    }

    /// Newton–Raphson maximum likelihood with step halving.
    pub fn mle(&self) -> Result<MleFit> {
        let k = self.k();
        let mut beta = DVector::zeros(k);
        let (mut ll, mut grad, mut hess) = self.derivatives(beta.as_slice());
        for iteration in 0..=MLE_MAX_ITERATIONS {
            if grad.amax() < MLE_GRADIENT_TOL {
                // a vanishing gradient with a near-perfect fit means β̂ is at infinity
                if ll > -1e-6 {
                    return Err(Error::numeric("probit MLE: perfect fit, the data look separated"));
                }
                let info = SpdMatrix::new(-hess)?;
                let cov = SpdMatrix::new(info.inverse())?;
                return Ok(MleFit {
                    beta,
                    cov,
                    loglik: ll,
                    iterations: iteration,
                });
            }
            if iteration == MLE_MAX_ITERATIONS {
                break;
            }
            let info = SpdMatrix::new(-hess.clone()).map_err(|_| {
                Error::numeric("probit MLE: observed information is singular (separation?)")
            })?;
            let step = info.solve(&grad);
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let candidate = &beta + &step * scale;
                let (c_ll, c_grad, c_hess) = self.derivatives(candidate.as_slice());
                if c_ll.is_finite() && c_ll >= ll - 1e-12 * ll.abs() {
                    beta = candidate;
                    ll = c_ll;
                    grad = c_grad;
                    hess = c_hess;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted {
                return Err(Error::numeric("probit MLE: line search failed"));
            }
            if beta.amax() > SEPARATION_BOUND || ll > -1e-10 {
                return Err(Error::numeric(format!(
                    "probit MLE diverging (max |β| = {:e}, loglik = {ll:e}); the data look separated",
                    beta.amax()
                )));
            }
        }
        Err(Error::numeric(format!(
            "probit MLE did not converge in {MLE_MAX_ITERATIONS} iterations (gradient {:e})",
            grad.amax()
        )))
    }

    /// Runs the sampler and keeps the post-burn-in draws.
    pub fn gibbs(&self, config: ChainConfig, stream: RngStream) -> Result<PosteriorDraws> {
        config.validate()?;
        let mut sampler = AlbertChib::new(self, stream);
        let k = self.k();
        let mut draws = PosteriorDraws {
            k,
            beta: Vec::with_capacity(config.kept() * k),
            xtz: Vec::with_capacity(config.kept() * k),
        };
        for it in 0..config.iters {
            sampler.step()?;
            if it >= config.burnin {
                draws.beta.extend_from_slice(sampler.beta());
                draws.xtz.extend_from_slice(sampler.xtz());
            }
        }
        Ok(draws)
    }
}

/// One sweep = `z | β` then `β | z`.
pub struct AlbertChib<'a> {
    model: &'a ProbitModel,
    rng: rand_chacha::ChaCha8Rng,
    beta: Vec<f64>,
    z: Vec<f64>,
    xtz: Vec<f64>,
}

impl<'a> AlbertChib<'a> {
    /// Starts at the prior mean.
    pub fn new(model: &'a ProbitModel, stream: RngStream) -> Self {
        AlbertChib {
            model,
            rng: stream.rng(),
            beta: model.prior_mean.as_slice().to_vec(),
            z: vec![0.0; model.data.n()],
            xtz: vec![0.0; model.k()],
        }
    }

    pub fn step(&mut self) -> Result<()> {
        let k = self.model.k();
        self.xtz.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.model.data.n() {
            let mean = self.model.linear_predictor(&self.beta, i);
            let side = if self.model.data.y()[i] {
                Truncation::AboveZero
            } else {
                Truncation::BelowZero
            };
            let zi = sample_truncated_normal(&mut self.rng, mean, 1.0, side)?;
            self.z[i] = zi;
            let resid = zi - self.model.offset[i];
            for (acc, x) in self.xtz.iter_mut().zip(self.model.data.row(i)) {
                *acc += x * resid;
            }
        }
        let mean = self.model.conditional_mean(&self.xtz);
        let noise = DVector::from_fn(k, |_, _| sample_std_normal(&mut self.rng));
        let beta = mean + self.model.post_cov.factor() * noise;
        self.beta.copy_from_slice(beta.as_slice());
        Ok(())
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn latent(&self) -> &[f64] {
        &self.z
    }

    pub fn xtz(&self) -> &[f64] {
        &self.xtz
    }

    pub fn rng(&mut self) -> &mut impl Rng {
        &mut self.rng
    }
}
