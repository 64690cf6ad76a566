use std::fmt;

use crate::error::Result;
use crate::probit::{
    chib_evidence, is_evidence, quadrature_log_evidence, small_instance, GPriorSpec, ProbitTest,
};
use crate::rng::RngStream;
use crate::sd::{rao_blackwell_numerator, ChainConfig, ChainTarget, EmbeddedTestProblem};
use crate::toy::{self, estimate_toy, oracle, toy_problem};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {:<40} {}", self.name, self.detail)
    }
}

fn check(name: impl Into<String>, outcome: Result<(bool, String)>) -> Check {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// The oracle suite behind `sdlab validate`: closed forms against quadrature,
/// the toy estimators against the closed form, and Chib/IS against quadrature
/// on a small simulated probit.
pub fn run_checks() -> Vec<Check> {
    let mut out = Vec::new();
    out.push(check(
        "toy: B01(0) = 2/sqrt(pi)",
        Ok({
            let v = toy::bf_closed(0.0);
            let e = rel(v, 2.0 / std::f64::consts::PI.sqrt());
            (e < 1e-12, format!("{v:.12} rel.err {e:.1e}"))
        }),
    ));
    for x in [0.0, 1.0, 2.0] {
        out.push(check(
            format!("toy: closed form = quadrature, x={x}"),
            (|| {
                let q = oracle::m0(x)? / oracle::m1(x)?;
                let e = rel(toy::bf_closed(x), q);
                Ok((e < 1e-8, format!("rel.err {e:.1e}")))
            })(),
        ));
        out.push(check(
            format!("toy: Savage-Dickey identity, x={x}"),
            (|| {
                let sd = toy::posterior_marginal_theta(toy::THETA0, x)? / (-1.0f64).exp();
                let e = rel(sd, toy::bf_closed(x));
                Ok((e < 1e-12, format!("rel.err {e:.1e}")))
            })(),
        ));
    }
    let chain = ChainConfig::new(100_000, 1_000).expect("valid chain");
    for x in [0.0, 1.0, 2.0] {
        out.push(check(
            format!("toy: MR and VW within 2%, x={x}"),
            (|| {
                let r = estimate_toy(x, chain, RngStream::new(1, 0))?;
                let (em, ev) = (rel(r.mr.estimate, r.closed_form), rel(r.vw.estimate, r.closed_form));
                Ok((em < 0.02 && ev < 0.02, format!("MR {em:.2e}  VW {ev:.2e}")))
            })(),
        ));
    }
    out.push(check(
        "toy: Rao-Blackwell ordinate within 1%",
        (|| {
            let p = toy_problem(1.0)?;
            let c = p.sample_chain(ChainTarget::Tilde, chain, RngStream::new(1, 1))?;
            let rb = rao_blackwell_numerator(&c, &p)?;
            let e = rel(rb.value, oracle::tilde_ordinate_ratio(1.0)?);
            Ok((e < 0.01, format!("rel.err {e:.2e}")))
        })(),
    ));
    out.push(check(
        "toy: forward/reciprocal coherence < 3",
        (|| {
            let r = estimate_toy(1.0, ChainConfig::new(20_000, 2_000)?, RngStream::new(42, 0))?;
            Ok((r.coherence.statistic < 3.0, format!("statistic {:.3}", r.coherence.statistic)))
        })(),
    ));
    out.push(check(
        "probit: Chib and IS vs quadrature (n=30)",
        (|| {
            let data = small_instance()?;
            let spec = GPriorSpec::unit_information(&data);
            let test = ProbitTest::new(data, spec)?;
            let exact = quadrature_log_evidence(test.null_model())? - quadrature_log_evidence(test.full_model())?;
            let cfg = ChainConfig::new(20_000, 2_000)?;
            let chib = {
                let f = test.full_model().gibbs(cfg, RngStream::new(1, 0))?;
                let n = test.null_model().gibbs(cfg, RngStream::new(1, 1))?;
                chib_evidence(test.null_model(), &n, &n.mean())?.log_evidence
                    - chib_evidence(test.full_model(), &f, &f.mean())?.log_evidence
            };
            let is = is_evidence(test.null_model(), &test.null_model().mle()?, 20_000, RngStream::new(1, 2))?
                .log_evidence
                - is_evidence(test.full_model(), &test.full_model().mle()?, 20_000, RngStream::new(1, 3))?
                    .log_evidence;
            let (ec, ei) = ((chib - exact).exp_m1().abs(), (is - exact).exp_m1().abs());
            Ok((
                ec < 0.02 && ei < 0.02,
                format!("B01 {:.6}  Chib {ec:.2e}  IS {ei:.2e}", exact.exp()),
            ))
        })(),
    ));
    out
}
