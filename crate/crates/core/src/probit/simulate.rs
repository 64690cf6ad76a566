use crate::dist::sample_std_normal;
use crate::error::Result;
use crate::rng::RngStream;

use super::data::ProbitData;

/// Simulates `n` probit observations with an intercept column followed by
/// `beta.len() − 1` standard-normal covariates.
pub fn simulate_probit(n: usize, beta: &[f64], stream: RngStream) -> Result<ProbitData> {
    let k = beta.len();
    let mut rng = stream.rng();
    let mut x = Vec::with_capacity(n * k);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let mut eta = beta[0];
        x.push(1.0);
        for b in &beta[1..] {
            let v = sample_std_normal(&mut rng);
            eta += b * v;
            x.push(v);
        }
        y.push(eta + sample_std_normal(&mut rng) > 0.0);
    }
    let mut columns = vec!["intercept".to_string()];
    columns.extend((1..k).map(|c| format!("x{c}")));
    ProbitData::new(x, k, y, columns)
}

/// Coefficients of the small reference instance: intercept 0.3 and a null
/// covariate, which puts its Bayes factor (≈ 3.2) in the same regime as Pima.
pub const SMALL_INSTANCE_BETA: [f64; 2] = [0.3, 0.0];
pub const SMALL_INSTANCE_N: usize = 30;
pub const SMALL_INSTANCE_SEED: u64 = 2024;

/// The n = 30 one-covariate instance used by the quadrature cross-checks.
pub fn small_instance() -> Result<ProbitData> {
    simulate_probit(SMALL_INSTANCE_N, &SMALL_INSTANCE_BETA, RngStream::new(SMALL_INSTANCE_SEED, 0))
}
