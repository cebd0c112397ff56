mod common;

use common::*;
use tockta::csp::parse;
use tockta::exec::traces_ta;
use tockta::harness::{check_spec, generate_corpus, prove_stop_base, ComparisonReport, Verdict};
use tockta::translate::assemble;

#[test]
fn example_processes_check() {
    for (src, n) in [("P = STOP", 5), (ADS, 4), (PI, 4), (PE, 3)] {
        let report = check_spec(&parse(src).unwrap(), n).unwrap();
        assert_eq!(report.verdict, Verdict::EqualAtStage1, "{src}");
        assert!(report.witnesses.is_empty());
    }
    let pi = assemble(&parse(PI).unwrap()).unwrap();
    let traces = traces_ta(&pi, 4).unwrap();
    assert!(traces.contains(&trace("open,fire,close")));
    assert!(!traces.contains(&trace("open,open")));
}

#[test]
fn fixtures_check() {
    for name in ["ads", "pe", "pi", "thermostat", "railway"] {
        let report = check_spec(&parse(&fixture(name)).unwrap(), 4).unwrap();
        assert_eq!(report.verdict, Verdict::EqualAtStage1, "{name}");
    }
}

#[test]
fn stop_base_case() {
    let proof = prove_stop_base(20).unwrap();
    assert!(proof.passed(), "{}", proof.report());
    assert_eq!(proof.steps.len(), 63);
    let zero = prove_stop_base(0).unwrap();
    assert!(zero.passed());
    assert!(zero.steps.iter().all(|s| s.n == 0));
}

#[test]
fn reports_are_reproducible_and_order_independent() {
    let corpus = generate_corpus();
    let forward: Vec<ComparisonReport> =
        corpus.iter().step_by(9).map(|e| check_spec(&e.spec, 3).unwrap().untimed()).collect();
    let mut backward: Vec<ComparisonReport> =
        corpus.iter().step_by(9).rev().map(|e| check_spec(&e.spec, 3).unwrap().untimed()).collect();
    backward.reverse();
    assert_eq!(forward, backward);
}

#[test]
fn report_json_schema() {
    let report = check_spec(&parse(PE).unwrap(), 2).unwrap();
    let value = serde_json::to_value(&report).unwrap();
    let keys: Vec<&str> = value.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.len(), 5);
    for key in ["id", "depth", "verdict", "witnesses", "millis"] {
        assert!(keys.contains(&key));
    }
}
