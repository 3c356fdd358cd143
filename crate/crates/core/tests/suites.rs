use std::io::Write;

use schur_cue::montecarlo::suites::{
    run_suite, verify_clt, verify_limit_distribution, verify_self_averaging, Suite, SuiteOptions,
};
use schur_cue::par::Execution;

fn note(msg: String) {
    let _ = std::io::stderr().write_all(format!("{msg}\n").as_bytes());
}

#[test]
fn limit_law_negative_control_fails_honestly() {
    // at N = 2 the free energy is far from its N → ∞ law
    let r = verify_limit_distribution(0.9, 2, 1000, 21, Execution::Parallel).unwrap();
    assert!(!r.pass);
    assert!(!r.test_named("ks-limit-law").unwrap().pass);
}

#[test]
fn clt_negative_control_is_reported() {
    let r = verify_clt(1.0, 4, 2000, 22, Execution::Parallel).unwrap();
    let ks = r.test_named("ks-normal exact variance").unwrap();
    note(format!("clt N=4 (informational): KS {:.4} vs {:.4}, pass={}", ks.statistic, ks.threshold, ks.pass));
    assert!(ks.statistic.is_finite());
}

#[test]
fn self_averaging_trend_on_short_ladder() {
    let r = verify_self_averaging(1.0, &[64, 128, 256], 2000, 23, Execution::Parallel).unwrap();
    let dec = r.test_named("exceedance decreasing").unwrap();
    let terminal = r.test_named("terminal exceedance").unwrap();
    note(format!(
        "self-averaging {{64,128,256}}: {}; terminal {:.4} (threshold 0.05, pass={})",
        dec.details, terminal.statistic, terminal.pass
    ));
    assert!(dec.pass, "{}", dec.details);
    assert!(r.test_named("Var/N^2 decreasing").unwrap().pass);
}

#[test]
fn self_averaging_full_on_longer_ladder() {
    let r = verify_self_averaging(1.0, &[64, 256, 768], 600, 24, Execution::Parallel).unwrap();
    note(format!("self-averaging {{64,256,768}}: {}", r.test_named("exceedance decreasing").unwrap().details));
    assert!(r.pass, "{r:#?}");
}

#[test]
fn small_statistical_suites_pass() {
    for (suite, seed) in [(Suite::DiaconisEvans, 31), (Suite::Jensen, 32), (Suite::EstimatorSanity, 33)] {
        let r = run_suite(suite, &SuiteOptions { seed, ..Default::default() }).unwrap();
        assert!(r.pass, "{suite}: {r:#?}");
    }
}

#[test]
fn ladder_must_increase() {
    assert!(verify_self_averaging(1.0, &[128, 64], 200, 1, Execution::Parallel).is_err());
}

// the schedule itself is recorded in the config; everything else must match
fn expectations_json(opts: &SuiteOptions) -> String {
    let mut v = serde_json::to_value(run_suite(Suite::ThmExpectations, opts).unwrap()).unwrap();
    v["config"].as_object_mut().unwrap().remove("execution");
    v.to_string()
}

#[test]
fn reports_are_identical_across_schedules() {
    let opts = SuiteOptions { seed: 41, reps: Some(2000), n: Some(6), q: Some(0.4), ..Default::default() };
    let seq = expectations_json(&SuiteOptions { execution: Execution::Sequential, ..opts.clone() });
    let par = expectations_json(&opts);
    assert_eq!(seq, par);
    #[cfg(feature = "parallel")]
    for threads in [1, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        assert_eq!(pool.install(|| expectations_json(&opts)), seq);
    }
}
