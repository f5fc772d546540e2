use sketchkrr_harness::config::{ExperimentConfig, Method};
use sketchkrr_harness::experiments::{
    run_approx_error, run_bench_products, run_diagnose, run_tradeoff,
};
use sketchkrr_harness::{run, RunOptions, RunOutput};

fn small_approx() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset("approx_error").unwrap();
    cfg.n_list = vec![150];
    cfg.replicates = 3;
    cfg.methods = vec![
        Method::Nystrom,
        Method::Accumulation { m: 8 },
        Method::Gaussian,
        Method::Identity,
    ];
    cfg
}

fn strip_timings(records: &mut [sketchkrr_harness::ExperimentRecord]) {
    for r in records {
        r.sketch_time_ms = 0.0;
        r.fit_time_ms = 0.0;
        r.predict_time_ms = 0.0;
    }
}

#[test]
fn records_independent_of_thread_count() {
    let cfg = small_approx();
    let mut one = run_approx_error(
        &cfg,
        RunOptions {
            threads: Some(1),
            verbose: false,
        },
    )
    .unwrap();
    let mut three = run_approx_error(
        &cfg,
        RunOptions {
            threads: Some(3),
            verbose: false,
        },
    )
    .unwrap();
    strip_timings(&mut one);
    strip_timings(&mut three);
    assert_eq!(one, three);
    assert_eq!(one.len(), 3 * 5);
}

#[test]
fn identity_method_reproduces_exact_fit() {
    let records = run_approx_error(&small_approx(), RunOptions::default()).unwrap();
    for r in records.iter().filter(|r| r.method == "identity") {
        assert!(r.approx_error <= 1e-8, "{r:?}");
        assert_eq!(r.d, 150);
    }
    for r in records.iter().filter(|r| r.method == "exact") {
        assert_eq!(r.approx_error, 0.0);
    }
}

#[test]
fn synthetic_tradeoff_has_test_errors() {
    let mut cfg = ExperimentConfig::preset("tradeoff").unwrap();
    cfg.n_list = vec![200];
    cfg.replicates = 2;
    let records = run_tradeoff(&cfg, RunOptions::default()).unwrap();
    assert_eq!(records.len(), 2 * (cfg.methods.len() + 1));
    for r in &records {
        assert!(r.failure.is_none(), "{r:?}");
        assert!(r.test_mse.is_some_and(|v| v.is_finite() && v > 0.0));
    }
}

#[test]
fn block_diagnostics() {
    let mut cfg = ExperimentConfig::preset("diagnose").unwrap();
    cfg.diagnose.seeds = 20;
    let rows = run_diagnose(&cfg, RunOptions::default()).unwrap();
    assert_eq!(rows.len(), 4);
    let first = &rows[0];
    assert!(first.incoherence_uniform >= 32.0);
    assert!((first.incoherence_leverage - first.d_stat).abs() <= 1e-10);
    assert_eq!(first.d, 2 * first.d_delta);
    assert_eq!(rows[3].method, "gaussian");
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.pass_rate));
        assert!(r.pass_rate <= r.pass1_rate.min(r.pass2_rate));
    }
}

#[test]
fn bench_rows_per_m() {
    let mut cfg = ExperimentConfig::preset("bench").unwrap();
    cfg.n_list = vec![300];
    cfg.bench.d = Some(20);
    cfg.bench.repeats = 3;
    let rows = run_bench_products(&cfg, RunOptions::default()).unwrap();
    assert_eq!(rows.len(), cfg.bench.m_values.len());
    for r in &rows {
        assert_eq!((r.n, r.d, r.repeats), (300, 20, 3));
        assert!(r.structured_ks_ms > 0.0 && r.dense_ks_ms > 0.0);
    }
}

#[test]
fn dispatch_and_csv() {
    let cfg = small_approx();
    let out = run(&cfg, RunOptions::default()).unwrap();
    assert!(matches!(out, RunOutput::Records(_)));
    let mut buf = Vec::new();
    out.write_csv(&mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap().lines().count(),
        out.len() + 1
    );

    let mut bad = cfg.clone();
    bad.replicates = 0;
    assert_eq!(run(&bad, RunOptions::default()).unwrap_err().exit_code(), 1);
}
