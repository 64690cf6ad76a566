//! Probit regression with Zellner g-priors: samplers, evidences and the
//! replicated estimator comparison.

pub mod bridge;
pub mod data;
pub mod evidence;
pub mod experiment;
pub mod gprior;
pub mod model;
pub mod oracle;
pub mod simulate;

pub use bridge::{bridge_bf, meng_wong, BridgeEstimate, MleCompletion};
pub use data::{bundled_pima, load_pima, parse_pima, ProbitData};
pub use evidence::{chib_evidence, importance_evidence, is_evidence, EvidenceEstimate, ImportanceEstimate};
pub use experiment::{
    parse_methods, run_pima_experiment, run_pima_experiment_with_progress, write_csv, write_json, CellStatus,
    ExperimentConfig, ExperimentRow, Method, CSV_HEADER,
};
pub use gprior::{conditional_theta_bayes_ratio, GPriorSpec, NormalPrior, ProbitTest};
pub use model::{AlbertChib, MleFit, PosteriorDraws, ProbitModel};
pub use oracle::quadrature_log_evidence;
pub use simulate::{simulate_probit, small_instance, SMALL_INSTANCE_BETA, SMALL_INSTANCE_N, SMALL_INSTANCE_SEED};
