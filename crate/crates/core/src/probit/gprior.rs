//! The g-prior point-null test `β_j = 0` wired as an [`EmbeddedTestProblem`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dist::{mvn_logpdf, normal_logpdf};
use crate::error::{Error, Result};
use crate::linalg::{select, SpdMatrix};
use crate::rng::RngStream;
use crate::sd::{ChainConfig, ChainOutput, ChainTarget, Draw, EmbeddedTestProblem};

use super::data::ProbitData;
use super::model::{PosteriorDraws, ProbitModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPriorSpec {
    /// Scale of the prior covariance `g (XᵀX)⁻¹`.
    pub g: f64,
    /// Index of the tested coefficient.
    pub tested: usize,
}

impl GPriorSpec {
    /// Unit-information prior (`g = n`) testing the last column.
    pub fn unit_information(data: &ProbitData) -> Self {
        GPriorSpec {
            g: data.n() as f64,
            tested: data.k() - 1,
        }
    }
}

/// Univariate normal prior `N(mean, var)` on the tested coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalPrior {
    pub mean: f64,
    pub var: f64,
}

/// `log [φ(θ₀; posterior) / φ(θ₀; prior)]` for the tested coefficient given
/// `ψ` and the completed data, evaluated as one closed form:
///
/// precision = `Σ x_ij² + 1/v_p`,
/// mean = `(Σ x_ij (z_i − x_{i,−j}ᵀψ) + m_p/v_p) / precision`.
///
/// `xtz` is `Xᵀz` on the full design and `gram` is `XᵀX`.
pub fn log_conditional_theta_bayes_ratio(
    psi: &[f64],
    xtz: &[f64],
    gram: &DMatrix<f64>,
    tested: usize,
    theta0: f64,
    prior: NormalPrior,
) -> Result<f64> {
    if !(prior.var > 0.0) {
        return Err(Error::param(format!("θ prior variance must be > 0, got {}", prior.var)));
    }
    let (precision, mean) = theta_conditional(psi, xtz, gram, tested, prior);
    let d_post = theta0 - mean;
    let d_prior = theta0 - prior.mean;
    Ok(0.5 * (precision * prior.var).ln() - 0.5 * precision * d_post * d_post
        + 0.5 * d_prior * d_prior / prior.var)
}

pub fn conditional_theta_bayes_ratio(
    psi: &[f64],
    xtz: &[f64],
    gram: &DMatrix<f64>,
    tested: usize,
    theta0: f64,
    prior: NormalPrior,
) -> Result<f64> {
    log_conditional_theta_bayes_ratio(psi, xtz, gram, tested, theta0, prior).map(f64::exp)
}

fn theta_conditional(
    psi: &[f64],
    xtz: &[f64],
    gram: &DMatrix<f64>,
    tested: usize,
    prior: NormalPrior,
) -> (f64, f64) {
    let mut cross = xtz[tested];
    let mut p = 0;
    for c in 0..gram.ncols() {
        if c != tested {
            cross -= gram[(tested, c)] * psi[p];
            p += 1;
        }
    }
    let precision = gram[(tested, tested)] + 1.0 / prior.var;
    (precision, (cross + prior.mean / prior.var) / precision)
}

/// Probit test of `β_j = θ₀ = 0` with g-priors on both models.
///
/// * `π₁(θ, ψ) = N(0, g (XᵀX)⁻¹)` on the full design,
/// * `π₀(ψ) = N(0, g (X₋ⱼᵀX₋ⱼ)⁻¹)` on the reduced design,
/// * `π₁(ψ|θ)` and `π₁(θ|ψ)` are the conditionals of the joint `π₁`.
#[derive(Debug, Clone)]
pub struct ProbitTest {
    spec: GPriorSpec,
    theta0: f64,
    gram: DMatrix<f64>,
    /// Marginal `π₁(θ)`.
    theta_prior: NormalPrior,
    /// `E[ψ | θ] = psi_slope · θ`, covariance `psi_cond_cov`.
    psi_slope: DVector<f64>,
    psi_cond_cov: SpdMatrix,
    /// `E[θ | ψ] = theta_coef · ψ`, variance `theta_cond_var`.
    theta_coef: DVector<f64>,
    theta_cond_var: f64,
    null_prior_cov: SpdMatrix,
    full: ProbitModel,
    tilde: ProbitModel,
    null: ProbitModel,
    null_conditional: ProbitModel,
}

impl ProbitTest {
    pub fn new(data: ProbitData, spec: GPriorSpec) -> Result<Self> {
        let k = data.k();
        let j = spec.tested;
        if k < 2 || j >= k {
            return Err(Error::param(format!(
                "tested index {j} needs a design with at least two columns (got {k})"
            )));
        }
        if !(spec.g > 0.0) {
            return Err(Error::param(format!("g must be > 0, got {}", spec.g)));
        }
        let theta0 = 0.0;
        let gram = data.gram();
        let gram_spd = SpdMatrix::new(gram.clone())?;
        let full_cov_m = gram_spd.inverse() * spec.g;
        let full_cov = SpdMatrix::new(full_cov_m.clone())?;

        let rest: Vec<usize> = (0..k).filter(|&c| c != j).collect();
        let reduced = data.without_column(j)?;
        let null_prior_cov = SpdMatrix::new(SpdMatrix::new(reduced.gram())?.inverse() * spec.g)?;

        let v_tt = full_cov_m[(j, j)];
        let v_pt = select(&full_cov_m, &rest, &[j]).column(0).into_owned();
        let v_pp = select(&full_cov_m, &rest, &rest);
        let psi_slope = &v_pt / v_tt;
        let psi_cond_cov = SpdMatrix::new(&v_pp - &v_pt * v_pt.transpose() / v_tt)?;
        let v_pp_spd = SpdMatrix::new(v_pp)?;
        let theta_coef = v_pp_spd.solve(&v_pt);
        let theta_cond_var = v_tt - v_pt.dot(&theta_coef);
        if !(theta_cond_var > 0.0) {
            return Err(Error::NotSpd("conditional prior variance of θ".into()));
        }

        let mut tilde_cov = DMatrix::zeros(k, k);
        tilde_cov[(j, j)] = v_tt;
        for (a, &ra) in rest.iter().enumerate() {
            for (b, &rb) in rest.iter().enumerate() {
                tilde_cov[(ra, rb)] = null_prior_cov.matrix()[(a, b)];
            }
        }

        let full = ProbitModel::new(data.clone(), DVector::zeros(k), full_cov)?;
        let tilde = ProbitModel::new(data.clone(), DVector::zeros(k), SpdMatrix::new(tilde_cov)?)?;
        let null = ProbitModel::new(reduced.clone(), DVector::zeros(k - 1), null_prior_cov.clone())?;
        let offset = data.column(j).iter().map(|x| x * theta0).collect();
        let null_conditional = ProbitModel::with_offset(
            reduced,
            offset,
            &psi_slope * theta0,
            psi_cond_cov.clone(),
        )?;

        Ok(ProbitTest {
            spec,
            theta0,
            gram,
            theta_prior: NormalPrior { mean: 0.0, var: v_tt },
            psi_slope,
            psi_cond_cov,
            theta_coef,
            theta_cond_var,
            null_prior_cov,
            full,
            tilde,
            null,
            null_conditional,
        })
    }

    pub fn spec(&self) -> GPriorSpec {
        self.spec
    }

    pub fn tested(&self) -> usize {
        self.spec.tested
    }

    pub fn data(&self) -> &ProbitData {
        self.full.data()
    }

    /// The alternative model `M₁` with its own g-prior.
    pub fn full_model(&self) -> &ProbitModel {
        &self.full
    }

    /// The full design under the product prior `π₁(θ) π₀(ψ)`.
    pub fn tilde_model(&self) -> &ProbitModel {
        &self.tilde
    }

    /// The null model `M₀` (reduced design, prior `π₀`).
    pub fn null_model(&self) -> &ProbitModel {
        &self.null
    }

    /// The reduced design with `β_j` pinned at `θ₀` and prior `π₁(ψ|θ₀)`.
    pub fn null_conditional_model(&self) -> &ProbitModel {
        &self.null_conditional
    }

    pub fn theta_prior(&self) -> NormalPrior {
        self.theta_prior
    }

    pub fn null_prior_cov(&self) -> &SpdMatrix {
        &self.null_prior_cov
    }

    /// `π₁(θ | ψ)`.
    pub fn theta_given_psi(&self, psi: &[f64]) -> NormalPrior {
        NormalPrior {
            mean: self.theta_coef.as_slice().iter().zip(psi).map(|(c, p)| c * p).sum(),
            var: self.theta_cond_var,
        }
    }

    /// Splits a full coefficient vector into `(θ, ψ)`.
    pub fn split(&self, beta: &[f64]) -> (f64, Vec<f64>) {
        let j = self.spec.tested;
        let psi = beta
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != j)
            .map(|(_, v)| *v)
            .collect();
        (beta[j], psi)
    }

    /// Inverse of [`split`](Self::split).
    pub fn join(&self, theta: f64, psi: &[f64]) -> Vec<f64> {
        let mut beta = psi.to_vec();
        beta.insert(self.spec.tested, theta);
        beta
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    fn model_for(&self, target: ChainTarget) -> &ProbitModel {
        match target {
            ChainTarget::Full => &self.full,
            ChainTarget::Tilde => &self.tilde,
            ChainTarget::NullConditional => &self.null_conditional,
        }
    }

    fn to_chain(
        &self,
        target: ChainTarget,
        draws: PosteriorDraws,
        stream: RngStream,
        burnin: usize,
    ) -> Result<ChainOutput> {
        let t = draws.len();
        let k = draws.k;
        let (thetas, psis) = match target {
            ChainTarget::NullConditional => (vec![self.theta0; t], draws.beta),
            _ => {
                let mut thetas = Vec::with_capacity(t);
                let mut psis = Vec::with_capacity(t * (k - 1));
                for s in 0..t {
                    let (theta, psi) = self.split(draws.beta(s));
                    thetas.push(theta);
                    psis.extend(psi);
                }
                (thetas, psis)
            }
        };
        ChainOutput::new(target, thetas, self.data().k() - 1, psis, k, draws.xtz, stream, burnin)
    }
}

impl EmbeddedTestProblem for ProbitTest {
    fn theta0(&self) -> f64 {
        self.theta0
    }

    fn log_prior_null(&self, psi: &[f64]) -> f64 {
        let k = psi.len();
        mvn_logpdf(&DVector::from_column_slice(psi), &DVector::zeros(k), &self.null_prior_cov)
            .expect("ψ has the null model's dimension")
    }

    fn log_prior_nuisance(&self, psi: &[f64], theta: f64) -> f64 {
        mvn_logpdf(&DVector::from_column_slice(psi), &(&self.psi_slope * theta), &self.psi_cond_cov)
            .expect("ψ has the null model's dimension")
    }

    fn log_prior_theta0(&self) -> f64 {
        normal_logpdf(self.theta0, self.theta_prior.mean, self.theta_prior.var)
    }

    fn log_bayes_ratio_tilde(&self, draw: &Draw<'_>) -> f64 {
        log_conditional_theta_bayes_ratio(draw.psi, draw.latent, &self.gram, self.spec.tested, self.theta0, self.theta_prior)
            .unwrap_or(f64::NAN)
    }

    /// `π₁(θ₀ | x, z, ψ) / π₁(θ₀)`: the conditional posterior-to-prior ratio
    /// under `π₁(θ|ψ)`, times the closed-form `π₁(θ₀|ψ) / π₁(θ₀)`.
    fn log_bayes_ratio_full(&self, draw: &Draw<'_>) -> f64 {
        let cond = self.theta_given_psi(draw.psi);
        let within = log_conditional_theta_bayes_ratio(draw.psi, draw.latent, &self.gram, self.spec.tested, self.theta0, cond)
            .unwrap_or(f64::NAN);
        let d_c = self.theta0 - cond.mean;
        let d_m = self.theta0 - self.theta_prior.mean;
        within - 0.5 * (d_c * d_c / cond.var + cond.var.ln()) + 0.5 * (d_m * d_m / self.theta_prior.var + self.theta_prior.var.ln())
    }

    fn sample_chain(&self, target: ChainTarget, config: ChainConfig, stream: RngStream) -> Result<ChainOutput> {
        let draws = self.model_for(target).gibbs(config, stream)?;
        self.to_chain(target, draws, stream, config.burnin)
    }
}
