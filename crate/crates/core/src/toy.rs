//! The Gaussian / inverse-gamma toy test with every quantity in closed form.
//!
//! ```text
//! M₀: x | ψ ~ N(ψ, 1),                ψ ~ N(0, 1)
//! M₁: x | θ, ψ ~ N(ψ, θ),   ψ | θ ~ N(0, θ),   θ ~ IG(1, 1)
//! ```
//!
//! `H₀: θ = θ₀ = 1`. Under this pair `π₁(ψ | θ₀) = π₀(ψ)`, so the classical
//! ordinate ratio already equals `B₀₁`, which makes the model a ground truth
//! for the Monte Carlo estimators.

use std::f64::consts::PI;

use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::dist::{inv_gamma_logpdf, ln_gamma_three_halves, normal_logpdf, sample_inv_gamma, sample_std_normal, HALF_LN_2PI};
use crate::error::{Error, Result};
use crate::quad;
use crate::rng::RngStream;
use serde::Serialize;

use crate::sd::{
    coherence_diagnostic, estimate_mr, estimate_vw, ratio_forward, ratio_reciprocal, BayesFactorEstimate, ChainConfig,
    ChainOutput, ChainTarget, CoherenceReport, Draw, EmbeddedTestProblem, TermEstimate,
};

pub const THETA0: f64 = 1.0;
const PRIOR_SHAPE: f64 = 1.0;
const PRIOR_RATE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyModel {
    pub x: f64,
}

impl ToyModel {
    pub fn new(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::param(format!("observation must be finite, got {x}")));
        }
        Ok(ToyModel { x })
    }

    pub fn m0(&self) -> f64 {
        m0_closed(self.x)
    }

    pub fn m1(&self) -> f64 {
        m1_closed(self.x)
    }

    pub fn bayes_factor(&self) -> f64 {
        bf_closed(self.x)
    }
}

/// `m₀(x) = exp(−x²/4) / (√2 √(2π))`
pub fn m0_closed(x: f64) -> f64 {
    (-x * x / 4.0).exp() / (2.0_f64.sqrt() * (2.0 * PI).sqrt())
}

/// `m₁(x) = (1 + x²/4)^(−3/2) Γ(3/2) / (√2 √(2π))`
pub fn m1_closed(x: f64) -> f64 {
    (1.0 + x * x / 4.0).powf(-1.5) * ln_gamma_three_halves().exp() / (2.0_f64.sqrt() * (2.0 * PI).sqrt())
}

/// `B₀₁(x) = Γ(3/2)⁻¹ (1 + x²/4)^(3/2) exp(−x²/4)`
pub fn bf_closed(x: f64) -> f64 {
    let s = 1.0 + x * x / 4.0;
    (1.5 * s.ln() - x * x / 4.0 - ln_gamma_three_halves()).exp()
}

/// `π₁(θ | x)`, the IG(3/2, 1 + x²/4) density.
pub fn posterior_marginal_theta(theta: f64, x: f64) -> Result<f64> {
    Ok(inv_gamma_logpdf(theta, 1.5, 1.0 + x * x / 4.0)?.exp())
}

/// `log π₁(θ) = log IG(θ; 1, 1)`.
pub fn log_prior_theta(theta: f64) -> Result<f64> {
    inv_gamma_logpdf(theta, PRIOR_SHAPE, PRIOR_RATE)
}

/// Gibbs sampler for `π₁(θ, ψ | x)`:
/// `θ | ψ ~ IG(2, 1 + ψ²/2 + (x−ψ)²/2)`, `ψ | θ ~ N(x/2, θ/2)`.
pub fn gibbs_full(x: f64, config: ChainConfig, stream: RngStream) -> Result<ChainOutput> {
    run_gibbs(x, config, stream, ChainTarget::Full, |rng, x, psi| {
        let theta = sample_inv_gamma(rng, 2.0, 1.0 + 0.5 * psi * psi + 0.5 * (x - psi) * (x - psi))?;
        let psi = 0.5 * x + (0.5 * theta).sqrt() * sample_std_normal(rng);
        Ok((theta, psi))
    })
}

/// Gibbs sampler for `π̃₁(θ, ψ | x) ∝ π₁(θ) π₀(ψ) f(x|θ,ψ)`:
/// `θ | ψ ~ IG(3/2, 1 + (x−ψ)²/2)`, `ψ | θ ~ N(x/(1+θ), θ/(1+θ))`.
pub fn gibbs_tilde(x: f64, config: ChainConfig, stream: RngStream) -> Result<ChainOutput> {
    run_gibbs(x, config, stream, ChainTarget::Tilde, |rng, x, psi| {
        let theta = sample_inv_gamma(rng, 1.5, 1.0 + 0.5 * (x - psi) * (x - psi))?;
        let psi = x / (1.0 + theta) + (theta / (1.0 + theta)).sqrt() * sample_std_normal(rng);
        Ok((theta, psi))
    })
}

fn run_gibbs<F>(
    x: f64,
    config: ChainConfig,
    stream: RngStream,
    target: ChainTarget,
    mut sweep: F,
) -> Result<ChainOutput>
where
    F: FnMut(&mut rand_chacha::ChaCha8Rng, f64, f64) -> Result<(f64, f64)>,
{
    config.validate()?;
    let mut rng = stream.rng();
    let mut psi = 0.5 * x;
    let mut thetas = Vec::with_capacity(config.kept());
    let mut psis = Vec::with_capacity(config.kept());
    for it in 0..config.iters {
        let (theta, next_psi) = sweep(&mut rng, x, psi)?;
        psi = next_psi;
        if it >= config.burnin {
            thetas.push(theta);
            psis.push(psi);
        }
    }
    ChainOutput::new(target, thetas, 1, psis, 0, vec![], stream, config.burnin)
}

/// Exact iid draws from `π₁(ψ | x, θ₀ = 1) = N(x/2, 1/2)`. Burn-in is
/// skipped on the stream so the output length matches the MCMC samplers.
pub fn sample_null_conditional(x: f64, config: ChainConfig, stream: RngStream) -> Result<ChainOutput> {
    config.validate()?;
    let mut rng = stream.rng();
    let sd = 0.5_f64.sqrt();
    for _ in 0..config.burnin {
        let _: f64 = rng.random();
    }
    let psis: Vec<f64> = (0..config.kept())
        .map(|_| 0.5 * x + sd * sample_std_normal(&mut rng))
        .collect();
    ChainOutput::new(
        ChainTarget::NullConditional,
        vec![THETA0; psis.len()],
        1,
        psis,
        0,
        vec![],
        stream,
        config.burnin,
    )
}

/// The toy model wired as an [`EmbeddedTestProblem`].
#[derive(Debug, Clone, Copy)]
pub struct ToyProblem {
    x: f64,
    log_prior_theta0: f64,
}

pub fn toy_problem(x: f64) -> Result<ToyProblem> {
    ToyModel::new(x)?;
    Ok(ToyProblem {
        x,
        // π₁(θ₀) = exp(−1)
        log_prior_theta0: -1.0,
    })
}

impl ToyProblem {
    pub fn x(&self) -> f64 {
        self.x
    }

    /// Replace the stored version of `log π₁(θ₀)`; the estimators must not care.
    pub fn with_prior_theta0_version(mut self, log_value: f64) -> Self {
        self.log_prior_theta0 = log_value;
        self
    }

    /// `log ∫ N(x; ψ, θ) π₁(θ) dθ = log[Γ(3/2) (2π)^(−1/2) (1 + (x−ψ)²/2)^(−3/2)]`.
    fn log_tilde_denominator(&self, psi: f64) -> f64 {
        let c = 1.0 + 0.5 * (self.x - psi) * (self.x - psi);
        ln_gamma_three_halves() - HALF_LN_2PI - 1.5 * c.ln()
    }
}

impl EmbeddedTestProblem for ToyProblem {
    fn theta0(&self) -> f64 {
        THETA0
    }

    fn log_prior_null(&self, psi: &[f64]) -> f64 {
        normal_logpdf(psi[0], 0.0, 1.0)
    }

    fn log_prior_nuisance(&self, psi: &[f64], theta: f64) -> f64 {
        normal_logpdf(psi[0], 0.0, theta)
    }

    fn log_prior_theta0(&self) -> f64 {
        self.log_prior_theta0
    }

    fn log_bayes_ratio_tilde(&self, draw: &Draw<'_>) -> f64 {
        let psi = draw.psi[0];
        normal_logpdf(self.x, psi, THETA0) - self.log_tilde_denominator(psi)
    }

    /// With `b = 1 + ψ²/2 + (x−ψ)²/2`, Bayes' theorem at θ₀ = 1 gives
    /// `f(x|1,ψ) π₁(ψ|1) / ∫ f(x|θ,ψ) π₁(ψ|θ) π₁(θ) dθ = b² e^(1−b)`.
    fn log_bayes_ratio_full(&self, draw: &Draw<'_>) -> f64 {
        let psi = draw.psi[0];
        let b = 1.0 + 0.5 * psi * psi + 0.5 * (self.x - psi) * (self.x - psi);
        2.0 * b.ln() + 1.0 - b - ln_gamma(2.0)
    }

    fn sample_chain(&self, target: ChainTarget, config: ChainConfig, stream: RngStream) -> Result<ChainOutput> {
        match target {
            ChainTarget::Full => gibbs_full(self.x, config, stream),
            ChainTarget::Tilde => gibbs_tilde(self.x, config, stream),
            ChainTarget::NullConditional => sample_null_conditional(self.x, config, stream),
        }
    }
}

/// Both estimators plus the forward/reciprocal coherence check at one `x`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ToyReport {
    pub x: f64,
    pub closed_form: f64,
    pub mr: BayesFactorEstimate,
    pub vw: BayesFactorEstimate,
    pub ratio_forward: TermEstimate,
    pub ratio_reciprocal: TermEstimate,
    pub coherence: CoherenceReport,
}

/// Runs the tilde, full and null-conditional chains on substreams 1, 2, 3
/// of `stream`. MR and VW share the full chain.
pub fn estimate_toy(x: f64, config: ChainConfig, stream: RngStream) -> Result<ToyReport> {
    let problem = toy_problem(x)?;
    let tilde = problem.sample_chain(ChainTarget::Tilde, config, stream.substream(1))?;
    let full = problem.sample_chain(ChainTarget::Full, config, stream.substream(2))?;
    let null = problem.sample_chain(ChainTarget::NullConditional, config, stream.substream(3))?;
    let mr = estimate_mr(&tilde, &full, &problem)?;
    let vw = estimate_vw(&full, &null, &problem)?;
    let fwd = ratio_forward(&full, &problem)?;
    let rec = ratio_reciprocal(&tilde, &problem)?;
    Ok(ToyReport {
        x,
        closed_form: bf_closed(x),
        mr,
        vw,
        ratio_forward: fwd,
        ratio_reciprocal: rec,
        coherence: coherence_diagnostic(fwd.value, fwd.se, rec.value, rec.se),
    })
}

/// Quadrature values the Monte Carlo estimators are checked against.
pub mod oracle {
    use super::*;

    const REL_TOL: f64 = 1e-10;
    /// θ-integrals are split at this point; the upper piece is mapped to
    /// `u = 1/θ ∈ (0, 1/CUT]` because the IG(1,1) tail decays only like θ⁻².
    const CUT: f64 = 50.0;

    /// `∫₀^∞ g(θ) dθ`.
    pub fn integrate_positive<F: Fn(f64) -> f64>(g: F) -> Result<f64> {
        let body = quad::integrate(&g, 0.0, CUT, REL_TOL)?;
        let tail = quad::integrate(
            |u: f64| if u > 0.0 { g(1.0 / u) / (u * u) } else { 0.0 },
            0.0,
            1.0 / CUT,
            REL_TOL,
        )?;
        Ok(body + tail)
    }

    fn prior_theta(theta: f64) -> f64 {
        // θ⁻² e^(−1/θ)
        (-2.0 * theta.ln() - 1.0 / theta).exp()
    }

    /// `m̃₁(x) = ∫ π₁(θ) N(x; 0, 1+θ) dθ`.
    pub fn m_tilde1(x: f64) -> Result<f64> {
        integrate_positive(|t| prior_theta(t) * normal_logpdf(x, 0.0, 1.0 + t).exp())
    }

    /// `m₁(x)` by quadrature over θ of the ψ-marginalized likelihood `N(x; 0, 2θ)`.
    pub fn m1(x: f64) -> Result<f64> {
        integrate_positive(|t| prior_theta(t) * normal_logpdf(x, 0.0, 2.0 * t).exp())
    }

    /// `m₀(x) = ∫ π₀(ψ) f(x|θ₀, ψ) dψ` by quadrature.
    pub fn m0(x: f64) -> Result<f64> {
        quad::integrate(
            |p| (normal_logpdf(p, 0.0, 1.0) + normal_logpdf(x, p, 1.0)).exp(),
            -40.0 + x,
            40.0 + x,
            REL_TOL,
        )
    }

    /// `m̃₁(x) / m₁(x)`.
    pub fn ratio_tilde_over_full(x: f64) -> Result<f64> {
        Ok(m_tilde1(x)? / m1(x)?)
    }

    /// `π̃₁(θ₀|x) / π₁(θ₀) = m₀(x) / m̃₁(x)` under the constrained version.
    pub fn tilde_ordinate_ratio(x: f64) -> Result<f64> {
        Ok(m0(x)? / m_tilde1(x)?)
    }

    /// `E[g(θ)]` under the tilde marginal `π̃₁(θ|x) ∝ π₁(θ) N(x; 0, 1+θ)`,
    /// computed from the 2-D joint over (θ, ψ) without using the ψ-marginal.
    pub fn tilde_theta_expectation<G: Fn(f64) -> f64>(x: f64, g: G) -> Result<f64> {
        let inner = |theta: f64, with_g: bool| -> f64 {
            let sd = theta.sqrt().max(1.0);
            let v = quad::integrate(
                |p| {
                    (normal_logpdf(p, 0.0, 1.0) + normal_logpdf(x, p, theta)).exp()
                },
                x.min(0.0) - 40.0 * sd,
                x.max(0.0) + 40.0 * sd,
                1e-11,
            )
            .unwrap_or(f64::NAN);
            let w = prior_theta(theta) * v;
            if with_g { w * g(theta) } else { w }
        };
        let num = integrate_positive(|t| inner(t, true))?;
        let den = integrate_positive(|t| inner(t, false))?;
        Ok(num / den)
    }
}
