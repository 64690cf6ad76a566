//! Acceptance suite: one PASS/FAIL line per primary criterion, plus a few
//! informational lines. Exits non-zero if any criterion fails.
//!
//! Runs at full scale (the 100-replica Pima experiment dominates, about ten
//! CPU-minutes). `SDLAB_THREADS` caps the worker pool.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use sdlab::diagnostics::{iqr, mean_and_se, median};
use sdlab::probit::*;
use sdlab::sd::{
    coherence_diagnostic, estimate_mr, rao_blackwell_numerator, ratio_forward, ratio_reciprocal, ChainConfig,
    ChainTarget, EmbeddedTestProblem,
};
use sdlab::toy::{bf_closed, estimate_toy, oracle, toy_problem};
use sdlab::RngStream;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Outcome {
    fn print(&self) {
        let within = self.limit.is_none_or(|l| self.elapsed <= l);
        let tag = if self.passed && within { "PASS" } else { "FAIL" };
        let limit = self
            .limit
            .map(|l| format!(", limit {:.0} s", l.as_secs_f64()))
            .unwrap_or_default();
        println!(
            "[{tag}] {}: {} ({:.1} s{limit})",
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        );
    }

    fn ok(&self) -> bool {
        self.passed && self.limit.is_none_or(|l| self.elapsed <= l)
    }
}

fn info(line: String) {
    println!("[INFO] {line}");
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn threads() -> Option<usize> {
    sdlab::cli::threads_from_env().expect("valid SDLAB_THREADS")
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn pima_test() -> ProbitTest {
    let data = bundled_pima();
    let spec = GPriorSpec::unit_information(&data);
    ProbitTest::new(data, spec).unwrap()
}

fn toy_exactness() -> Outcome {
    let (cells, elapsed) = timed(|| {
        let chain = ChainConfig::new(100_000, 10_000).unwrap();
        let mut cells = Vec::new();
        for x in [0.0, 1.0, 2.0] {
            for seed in 1..=5 {
                let r = estimate_toy(x, chain, RngStream::new(seed, 0)).unwrap();
                cells.push((x, seed, rel(r.mr.estimate, bf_closed(x)), rel(r.vw.estimate, bf_closed(x))));
            }
        }
        cells
    });
    let worst_vw = cells.iter().map(|c| c.3).fold(0.0, f64::max);
    let per_x: Vec<String> = [0.0, 1.0, 2.0]
        .iter()
        .map(|&x| {
            let w = cells.iter().filter(|c| c.0 == x).map(|c| c.2).fold(0.0, f64::max);
            format!("x={x} {w:.4}")
        })
        .collect();
    let misses: Vec<String> = cells
        .iter()
        .filter(|c| c.2 >= 0.02 || c.3 >= 0.02)
        .map(|c| format!("x={} seed {}", c.0, c.1))
        .collect();
    Outcome {
        name: "toy exactness",
        passed: misses.is_empty(),
        detail: format!(
            "seeds 1-5, T=1e5, tol 0.02: worst MR rel. error {}; worst VW {worst_vw:.4}; misses: [{}]",
            per_x.join(", "),
            misses.join("; ")
        ),
        elapsed,
        limit: Some(Duration::from_secs(10)),
    }
}

fn unbiasedness() -> Outcome {
    let x = 1.0;
    let ((mean, se, exact), elapsed) = timed(|| {
        let p = toy_problem(x).unwrap();
        let chain = ChainConfig::with_default_burnin(2_000).unwrap();
        let values: Vec<f64> = (0..200)
            .map(|r| {
                let c = p.sample_chain(ChainTarget::Full, chain, RngStream::new(2_000, r)).unwrap();
                ratio_forward(&c, &p).unwrap().value
            })
            .collect();
        let (mean, se) = mean_and_se(&values);
        (mean, se, oracle::ratio_tilde_over_full(x).unwrap())
    });
    let z = (mean - exact) / se;
    Outcome {
        name: "forward ratio unbiasedness",
        passed: z.abs() < 3.0,
        detail: format!("200 x T=2000 at x=1: mean {mean:.6} +- {se:.6} vs quadrature {exact:.6}, z = {z:+.2}"),
        elapsed,
        limit: Some(Duration::from_secs(30)),
    }
}

fn rao_blackwell() -> Outcome {
    let (errs, elapsed) = timed(|| {
        [0.0, 1.0, 2.0]
            .map(|x| {
                let p = toy_problem(x).unwrap();
                let c = p
                    .sample_chain(ChainTarget::Tilde, ChainConfig::new(100_000, 10_000).unwrap(), RngStream::new(42, 0))
                    .unwrap();
                rel(rao_blackwell_numerator(&c, &p).unwrap().value, oracle::tilde_ordinate_ratio(x).unwrap())
            })
    });
    Outcome {
        name: "Rao-Blackwell ordinate",
        passed: errs.iter().all(|e| *e < 0.01),
        detail: format!(
            "T=1e5 rel. error vs quadrature at x=0,1,2: {:.4}, {:.4}, {:.4} (tol 0.01)",
            errs[0], errs[1], errs[2]
        ),
        elapsed,
        limit: None,
    }
}

fn coherence() -> Outcome {
    let ((toy_stat, pima_stat), elapsed) = timed(|| {
        let chain = ChainConfig::new(20_000, 2_000).unwrap();
        let toy = estimate_toy(1.0, chain, RngStream::new(42, 0)).unwrap().coherence.statistic;
        let test = pima_test();
        let s = RngStream::new(42, 0);
        let tilde = test.sample_chain(ChainTarget::Tilde, chain, s.substream(1)).unwrap();
        let full = test.sample_chain(ChainTarget::Full, chain, s.substream(2)).unwrap();
        let mr = estimate_mr(&tilde, &full, &test).unwrap();
        let rec = ratio_reciprocal(&tilde, &test).unwrap();
        (toy, coherence_diagnostic(mr.ratio_term, mr.ratio_se, rec.value, rec.se).statistic)
    });
    Outcome {
        name: "coherence",
        passed: toy_stat < 3.0 && pima_stat < 3.0,
        detail: format!("T=20000, seed 42: toy x=1 statistic {toy_stat:.3}, Pima statistic {pima_stat:.3} (limit 3)"),
        elapsed,
        limit: None,
    }
}

fn toy_coherence_spread() {
    let chain = ChainConfig::new(20_000, 2_000).unwrap();
    let stats: Vec<f64> = (0..200)
        .map(|s| estimate_toy(1.0, chain, RngStream::new(s, 0)).unwrap().coherence.statistic)
        .collect();
    let over = stats.iter().filter(|&&s| s >= 3.0).count();
    info(format!(
        "toy coherence over 200 seeds at T=20000: median {:.2}, {over}/200 at or above 3 \
         (reciprocal summand has infinite variance when theta > 3)",
        median(&stats)
    ));
}

fn small_instance_rows(data: ProbitData) -> (f64, Vec<ExperimentRow>) {
    let spec = GPriorSpec::unit_information(&data);
    let test = ProbitTest::new(data, spec).unwrap();
    let exact = (quadrature_log_evidence(test.null_model()).unwrap()
        - quadrature_log_evidence(test.full_model()).unwrap())
    .exp();
    let mut cfg = ExperimentConfig::new(ChainConfig::new(100_000, 10_000).unwrap(), 1, 42, Method::ALL.to_vec());
    cfg.threads = threads();
    (exact, run_pima_experiment(&test, &cfg).unwrap())
}

fn describe(exact: f64, rows: &[ExperimentRow]) -> (f64, String) {
    let mut worst = 0.0f64;
    let parts: Vec<String> = rows
        .iter()
        .map(|r| {
            let e = r.bf_estimate.map_or(f64::INFINITY, |b| rel(b, exact));
            worst = worst.max(e);
            format!("{} {e:.4}", r.method)
        })
        .collect();
    (worst, format!("quadrature B01 {exact:.6}; rel. errors {}", parts.join(", ")))
}

fn small_instance_oracle() -> Outcome {
    let ((exact, rows), elapsed) = timed(|| small_instance_rows(small_instance().unwrap()));
    let (worst, detail) = describe(exact, &rows);
    Outcome {
        name: "small-instance oracle",
        passed: worst < 0.02 && rows.iter().all(ExperimentRow::is_ok),
        detail: format!("n=30, T=1e5: {detail} (tol 0.02)"),
        elapsed,
        limit: Some(Duration::from_secs(60)),
    }
}

fn strong_effect_instance() {
    let data = simulate_probit(30, &[0.3, 0.8], RngStream::new(SMALL_INSTANCE_SEED, 0)).unwrap();
    let (exact, rows) = small_instance_rows(data);
    let (_, detail) = describe(exact, &rows);
    info(format!("strong-effect instance (slope 0.8), T=1e5: {detail}"));
}

struct PimaRun {
    rows: Vec<ExperimentRow>,
    elapsed: Duration,
}

fn pima_full_run() -> PimaRun {
    let test = pima_test();
    let mut cfg = ExperimentConfig::new(ChainConfig::new(20_000, 2_000).unwrap(), 100, 42, Method::ALL.to_vec());
    cfg.threads = threads();
    cfg.timing = true;
    let (rows, elapsed) = timed(|| run_pima_experiment(&test, &cfg).unwrap());
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("figure1_runs.csv");
    if let Ok(file) = std::fs::File::create(&path) {
        if write_csv(&rows, std::io::BufWriter::new(file)).is_ok() {
            info(format!("100-replica CSV written to {}", path.display()));
        }
    }
    PimaRun { rows, elapsed }
}

fn by_method(rows: &[ExperimentRow], max_replica: usize) -> BTreeMap<Method, Vec<f64>> {
    let mut out: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.replica < max_replica) {
        if let Some(b) = r.bf_estimate {
            out.entry(r.method).or_default().push(b);
        }
    }
    out
}

fn pima_agreement(run: &PimaRun) -> Outcome {
    // replicas 0..19 of the 100-replica run are exactly a 20-replica run
    let groups = by_method(&run.rows, 20);
    let medians: Vec<(Method, f64)> = groups.iter().map(|(m, v)| (*m, median(v))).collect();
    let grand = median(&medians.iter().map(|(_, v)| *v).collect::<Vec<_>>());
    let worst = medians.iter().map(|(_, v)| rel(*v, grand)).fold(0.0, f64::max);
    let complete = groups.len() == 5 && groups.values().all(|v| v.len() == 20);
    let cpu_ms: f64 = run
        .rows
        .iter()
        .filter(|r| r.replica < 20)
        .filter_map(|r| r.elapsed_ms)
        .sum();
    let parts: Vec<String> = medians.iter().map(|(m, v)| format!("{m} {v:.4}")).collect();
    Outcome {
        name: "Pima cross-method agreement",
        passed: worst < 0.05 && complete,
        detail: format!(
            "20 replicas, T=20000: medians {}; grand median {grand:.4}; max rel. deviation {worst:.4} (tol 0.05)",
            parts.join(", ")
        ),
        elapsed: Duration::from_secs_f64(cpu_ms / 1e3),
        limit: Some(Duration::from_secs(600)),
    }
}

fn pima_figure(run: &PimaRun) -> Outcome {
    let groups = by_method(&run.rows, usize::MAX);
    let iqrs: BTreeMap<Method, f64> = groups.iter().map(|(m, v)| (*m, iqr(v))).collect();
    let failed = run.rows.iter().filter(|r| !r.is_ok()).count();
    let chib = iqrs[&Method::Chib];
    let ordered = iqrs[&Method::Mr] >= chib && iqrs[&Method::Vw] >= chib;
    let parts: Vec<String> = iqrs.iter().map(|(m, v)| format!("{m} {v:.4}")).collect();
    Outcome {
        name: "Figure-1-scale run",
        passed: run.rows.len() == 500 && failed == 0 && ordered,
        detail: format!(
            "{} rows, {failed} failed; IQRs {}; IQR(MR), IQR(VW) >= IQR(chib): {ordered}",
            run.rows.len(),
            parts.join(", ")
        ),
        elapsed: run.elapsed,
        limit: Some(Duration::from_secs(3600)),
    }
}

fn determinism() -> Outcome {
    let test = pima_test();
    let (same, elapsed) = timed(|| {
        let csv = |threads: usize| {
            let mut cfg = ExperimentConfig::new(ChainConfig::new(2_000, 200).unwrap(), 4, 42, Method::ALL.to_vec());
            cfg.threads = Some(threads);
            let mut buf = Vec::new();
            write_csv(&run_pima_experiment(&test, &cfg).unwrap(), &mut buf).unwrap();
            buf
        };
        let (a, b) = (csv(1), csv(4));
        (a == b, a.len())
    });
    Outcome {
        name: "determinism",
        passed: same.0,
        detail: format!("seed 42, 4 replicas x 5 methods, T=2000, 1 vs 4 workers: identical bytes = {} ({} bytes)", same.0, same.1),
        elapsed,
        limit: None,
    }
}

fn main() {
    let start = Instant::now();
    let mut outcomes = Vec::new();
    for f in [toy_exactness, unbiasedness, rao_blackwell, coherence, small_instance_oracle, determinism] {
        let o = f();
        o.print();
        outcomes.push(o);
    }
    toy_coherence_spread();
    strong_effect_instance();
    let run = pima_full_run();
    for o in [pima_agreement(&run), pima_figure(&run)] {
        o.print();
        outcomes.push(o);
    }
    let passed = outcomes.iter().filter(|o| o.ok()).count();
    println!(
        "acceptance: {passed}/{} criteria passed in {:.0} s",
        outcomes.len(),
        start.elapsed().as_secs_f64()
    );
    if passed != outcomes.len() {
        std::process::exit(1);
    }
}
