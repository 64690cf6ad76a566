use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Which posterior a chain was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainTarget {
    /// `π₁(θ, ψ, z | x)` under the alternative's own prior.
    Full,
    /// `π̃₁(θ, ψ, z | x)` under the product prior `π₁(θ) π₀(ψ)`.
    Tilde,
    /// `π₁(ψ, z | x, θ₀)`.
    NullConditional,
}

impl std::fmt::Display for ChainTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChainTarget::Full => "full",
            ChainTarget::Tilde => "tilde",
            ChainTarget::NullConditional => "null_conditional",
        })
    }
}

/// Length and burn-in of a chain run. `iters` counts every sweep,
/// including the `burnin` discarded ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub iters: usize,
    pub burnin: usize,
}

impl ChainConfig {
    pub fn new(iters: usize, burnin: usize) -> Result<Self> {
        let cfg = ChainConfig { iters, burnin };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `iters` sweeps with the default 10% burn-in.
    pub fn with_default_burnin(iters: usize) -> Result<Self> {
        Self::new(iters, iters / 10)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iters < 1 {
            return Err(Error::param("chain length must be at least 1"));
        }
        if self.burnin >= self.iters {
            return Err(Error::param(format!(
                "burn-in {} must be smaller than the number of iterations {}",
                self.burnin, self.iters
            )));
        }
        Ok(())
    }

    pub fn kept(&self) -> usize {
        self.iters - self.burnin
    }
}

/// Post-burn-in draws of `(θ, ψ, latent)`.
///
/// `latent` holds whatever per-draw summary of the completion `z` the
/// problem's conditional evaluators need (for the probit model, `Xᵀz`);
/// it is empty for models without a latent layer.
#[derive(Debug, Clone)]
pub struct ChainOutput {
    target: ChainTarget,
    theta: Vec<f64>,
    psi_dim: usize,
    psi: Vec<f64>,
    latent_dim: usize,
    latent: Vec<f64>,
    stream: RngStream,
    burnin: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Draw<'a> {
    pub theta: f64,
    pub psi: &'a [f64],
    pub latent: &'a [f64],
}

impl ChainOutput {
    pub fn new(
        target: ChainTarget,
        theta: Vec<f64>,
        psi_dim: usize,
        psi: Vec<f64>,
        latent_dim: usize,
        latent: Vec<f64>,
        stream: RngStream,
        burnin: usize,
    ) -> Result<Self> {
        let t = theta.len();
        if psi.len() != t * psi_dim || latent.len() != t * latent_dim {
            return Err(Error::input(format!(
                "ragged chain: {t} θ draws, {} ψ values (dim {psi_dim}), {} latent values (dim {latent_dim})",
                psi.len(),
                latent.len()
            )));
        }
        Ok(ChainOutput {
            target,
            theta,
            psi_dim,
            psi,
            latent_dim,
            latent,
            stream,
            burnin,
        })
    }

    pub fn target(&self) -> ChainTarget {
        self.target
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn psi_dim(&self) -> usize {
        self.psi_dim
    }

    pub fn stream(&self) -> RngStream {
        self.stream
    }

    pub fn master_seed(&self) -> u64 {
        self.stream.master_seed
    }

    pub fn burnin(&self) -> usize {
        self.burnin
    }

    pub fn thetas(&self) -> &[f64] {
        &self.theta
    }

    pub fn draw(&self, t: usize) -> Draw<'_> {
        Draw {
            theta: self.theta[t],
            psi: &self.psi[t * self.psi_dim..(t + 1) * self.psi_dim],
            latent: &self.latent[t * self.latent_dim..(t + 1) * self.latent_dim],
        }
    }

    pub fn draws(&self) -> impl ExactSizeIterator<Item = Draw<'_>> + '_ {
        (0..self.len()).map(move |t| self.draw(t))
    }

    pub(crate) fn expect_target(&self, wanted: ChainTarget, role: &str) -> Result<()> {
        if self.target != wanted {
            return Err(Error::input(format!(
                "{role} needs a {wanted} chain, got a {} chain",
                self.target
            )));
        }
        if self.is_empty() {
            return Err(Error::input(format!("{role}: empty {wanted} chain")));
        }
        Ok(())
    }
}
