use crate::error::Result;
use crate::rng::RngStream;

use super::chain::{ChainConfig, ChainOutput, ChainTarget, Draw};

/// A point-null test `θ = θ₀` of an embedded model with nuisance `ψ`.
///
/// The two Bayes-ratio evaluators are the only place a posterior ordinate
/// of `θ` at `θ₀` enters the estimators. Each must be a single closed-form
/// expression in which Bayes' theorem holds at `θ₀` itself, so that no
/// separately stored density value (in particular
/// [`log_prior_theta0`](Self::log_prior_theta0)) can leak into the result.
pub trait EmbeddedTestProblem: Sync {
    fn theta0(&self) -> f64;

    /// `log π₀(ψ)`
    fn log_prior_null(&self, psi: &[f64]) -> f64;

    /// `log π₁(ψ | θ)`
    fn log_prior_nuisance(&self, psi: &[f64], theta: f64) -> f64;

    /// A chosen version of `log π₁(θ₀)`. Informational only.
    fn log_prior_theta0(&self) -> f64;

    /// `log [ f(x,z|θ₀,ψ) / ∫ f(x,z|θ,ψ) π₁(θ) dθ ]`, i.e. the constrained
    /// `π̃₁(θ₀|x,z,ψ) / π₁(θ₀)`.
    fn log_bayes_ratio_tilde(&self, draw: &Draw<'_>) -> f64;

    /// `log [ f(x,z|θ₀,ψ) π₁(θ₀|ψ) / (π₁(θ₀) ∫ f(x,z|θ,ψ) π₁(θ|ψ) dθ) ]`,
    /// i.e. the constrained `π₁(θ₀|x,z,ψ) / π₁(θ₀)`.
    fn log_bayes_ratio_full(&self, draw: &Draw<'_>) -> f64;

    fn sample_chain(
        &self,
        target: ChainTarget,
        config: ChainConfig,
        stream: RngStream,
    ) -> Result<ChainOutput>;
}
