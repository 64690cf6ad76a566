//! Model-agnostic Savage–Dickey type Bayes factor estimators.

mod chain;
mod estimator;
mod problem;

pub use chain::{ChainConfig, ChainOutput, ChainTarget, Draw};
pub use estimator::{
    coherence_diagnostic, estimate_mr, estimate_vw, rao_blackwell_full, rao_blackwell_numerator,
    ratio_forward, ratio_reciprocal, BayesFactorEstimate, Coherence, CoherenceReport, SdMethod,
    TermEstimate,
};
pub use problem::EmbeddedTestProblem;
