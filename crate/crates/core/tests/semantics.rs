mod common;

use common::*;
use proptest::prelude::*;
use tockta::csp::{parse, CspProcess, EventName};
use tockta::harness::generate_corpus;
use tockta::semantics::{reachable_processes, step, traces_tock_csp, Action};
use tockta::trace::Trace;

#[test]
fn step_examples() {
    let spec = parse("P = STOP").unwrap();
    assert_eq!(step(&CspProcess::Stop, &spec), [(Action::Tock, CspProcess::Stop)]);
    let open = CspProcess::prefix("open", CspProcess::Stop);
    let mut got = step(&open, &spec);
    got.sort();
    let mut want = vec![(Action::Visible(EventName::new("open").unwrap()), CspProcess::Stop), (Action::Tock, open.clone())];
    want.sort();
    assert_eq!(got, want);
    let choice = CspProcess::int_choice(CspProcess::Stop, CspProcess::Skip);
    let targets: Vec<CspProcess> = step(&choice, &spec).into_iter().map(|(a, p)| {
        assert!(matches!(a, Action::Tau(_)));
        p
    }).collect();
    assert_eq!(targets, [CspProcess::Stop, CspProcess::Skip]);
}

#[test]
fn stop_traces() {
    let spec = parse("P = STOP").unwrap();
    assert_eq!(lines(&traces_tock_csp(&spec, 2).unwrap()), ["<>", "tock", "tock,tock"].map(String::from).into());
    assert_eq!(lines(&traces_tock_csp(&spec, 0).unwrap()), ["<>".to_string()].into());
}

#[test]
fn pt_waits_two_tocks_before_turning() {
    let traces = traces_tock_csp(&parse(PT).unwrap(), 4).unwrap();
    assert!(traces.contains(&trace("move,tock,tock,turn")));
    assert!(traces.contains(&trace("tock,move,tock,tock")));
    assert!(!traces.contains(&trace("move,tock,turn")));
}

#[test]
fn corpus_matches_a_path_oracle() {
    for e in generate_corpus() {
        let fast = traces_tock_csp(&e.spec, 5).unwrap();
        assert_eq!(as_vectors(&fast), naive_csp_traces(&e.spec, 5), "{}", e.id);
    }
}

#[test]
fn commutativity_on_the_corpus() {
    let corpus = generate_corpus();
    let ops: [fn(CspProcess, CspProcess) -> CspProcess; 3] =
        [CspProcess::ext_choice, CspProcess::interleave, CspProcess::int_choice];
    for (i, l) in corpus.iter().enumerate().step_by(7) {
        let r = &corpus[(i * 31 + 5) % corpus.len()];
        let (p, q) = (l.spec.main_process(), r.spec.main_process());
        for op in ops {
            let a = traces_tock_csp(&spec_of(op(p.clone(), q.clone())), 5).unwrap();
            let b = traces_tock_csp(&spec_of(op(q.clone(), p.clone())), 5).unwrap();
            assert_eq!(a, b, "{} {}", l.id, r.id);
        }
    }
}

#[test]
fn hiding_deletes_events_on_the_corpus() {
    for e in generate_corpus() {
        let p = e.spec.main_process().clone();
        let hidden = spec_of(CspProcess::hide(p, &["a"]));
        let n = 4;
        let deep = traces_tock_csp(&e.spec, n + 4).unwrap();
        let expected = deep.erase(n, |ev| ev == "a");
        assert_eq!(traces_tock_csp(&hidden, n).unwrap(), expected, "{}", e.id);
    }
}

#[test]
fn every_reachable_state_can_tock() {
    for src in [ADS, PE, PI, PT] {
        let spec = parse(src).unwrap();
        for p in reachable_processes(&spec, 4).unwrap() {
            // a state may need internal moves first
            let mut frontier = vec![p];
            let mut ok = false;
            for _ in 0..8 {
                if frontier.iter().any(|q| step(q, &spec).iter().any(|(a, _)| *a == Action::Tock)) {
                    ok = true;
                    break;
                }
                frontier = frontier.iter().flat_map(|q| step(q, &spec)).map(|(_, q)| q).collect();
            }
            assert!(ok, "{src}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn prefix_closed(p in process(), n in 0usize..5) {
        let traces = traces_tock_csp(&spec_of(p), n).unwrap();
        prop_assert!(traces.is_prefix_closed());
    }

    #[test]
    fn monotone_in_depth(p in process(), n in 0usize..4) {
        let spec = spec_of(p);
        let small = traces_tock_csp(&spec, n).unwrap();
        let big = traces_tock_csp(&spec, n + 1).unwrap();
        prop_assert!(small.iter().all(|t| big.contains(t)));
        prop_assert_eq!(big.truncated(n), small);
    }

    #[test]
    fn tock_extends_every_short_trace(p in process(), n in 1usize..4) {
        let traces = traces_tock_csp(&spec_of(p), n).unwrap();
        for t in traces.iter().filter(|t| t.len() < n) {
            prop_assert!(traces.contains(&t.extended("tock")), "{}", t);
        }
    }

    #[test]
    fn binary_choices_commute(p in process(), q in process()) {
        for op in [CspProcess::ext_choice, CspProcess::interleave, CspProcess::int_choice] {
            let a = traces_tock_csp(&spec_of(op(p.clone(), q.clone())), 4).unwrap();
            let b = traces_tock_csp(&spec_of(op(q.clone(), p.clone())), 4).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn agrees_with_path_oracle(p in process(), n in 0usize..5) {
        let spec = spec_of(p);
        prop_assert_eq!(as_vectors(&traces_tock_csp(&spec, n).unwrap()), naive_csp_traces(&spec, n));
    }
}

#[test]
fn empty_trace_always_present() {
    let spec = parse(PI).unwrap();
    assert!(traces_tock_csp(&spec, 0).unwrap().contains(&Trace::empty()));
}
