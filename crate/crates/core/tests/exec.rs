mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use tockta::csp::parse;
use tockta::exec::{erased_run_bound, reachable_configurations, traces_ta, traces_ta_prime, Executor, NetStep};
use tockta::explore::Limits;
use tockta::harness::generate_corpus;
use tockta::ta::{Edge, LocationKind, NetworkModel, SyncLabel, TimedAutomaton};
use tockta::trace::TraceSet;
use tockta::translate::{assemble, assemble_with, AssembleOptions};

fn stop_net() -> NetworkModel {
    let spec = parse("P = STOP").unwrap();
    assemble_with(&spec, &AssembleOptions { root_start: Some("startID0_0".into()) }).unwrap()
}

#[test]
fn stop_starts_with_the_flow_action_only() {
    let net = stop_net();
    let exec = Executor::new(&net).unwrap();
    let init = exec.initial();
    let steps = exec.enabled_steps(&init);
    assert_eq!(steps.len(), 1);
    let NetStep::Binary { sender, receiver, channel } = &steps[0] else { panic!("{steps:?}") };
    assert_eq!(sender.0, net.environment);
    assert_eq!(receiver.0, 0);
    assert_eq!(exec.channel_name(*channel), "startID0_0");

    let started = exec.apply_step(&init, &steps[0]);
    let start_var = net.int_vars.iter().position(|v| v.0 == "start").unwrap();
    assert_eq!(started.ints[start_var], 1);
    assert!(!exec.enabled_steps(&started).iter().any(|s| s.channel().is_some()));
    let ticked = exec.apply_step(&started, &NetStep::TimeTick);
    assert!(ticked.clocks.iter().all(|c| *c == 1));
    assert_eq!(ticked.locations, started.locations);
    let tock = exec.enabled_steps(&ticked).into_iter().find(|s| s.channel().is_some()).unwrap();
    let NetStep::Broadcast { receivers, .. } = &tock else { panic!("{tock:?}") };
    assert_eq!(receivers.iter().map(|r| r.0).collect::<Vec<_>>(), [0]);
}

#[test]
fn committed_location_takes_priority() {
    let mut a = TimedAutomaton::new("A");
    a.locations[0].kind = LocationKind::Committed;
    a.locations.push(tockta::ta::Location::new("s1", LocationKind::Normal));
    a.edges.push(Edge::new("s0", "s1"));
    let mut b = TimedAutomaton::new("B");
    b.locations.push(tockta::ta::Location::new("s1", LocationKind::Normal));
    b.edges.push(Edge::new("s0", "s1"));
    let net = NetworkModel { automata: vec![a, b], channels: vec![], int_vars: vec![], global_clocks: vec![], environment: 1 };
    let exec = Executor::new(&net).unwrap();
    assert_eq!(exec.enabled_steps(&exec.initial()), [NetStep::Silent { automaton: 0, edge: 0 }]);
}

#[test]
fn broadcast_with_no_receiver_still_fires() {
    let mut a = TimedAutomaton::new("A");
    a.edges.push(Edge::new("s0", "s0").with_sync(SyncLabel::send("tock")));
    let net = NetworkModel {
        automata: vec![a],
        channels: vec![tockta::ta::ChannelDecl {
            name: "tock".into(),
            mode: tockta::ta::ChannelMode::Broadcast,
            kind: tockta::ta::ChannelKind::TockChannel,
        }],
        int_vars: vec![],
        global_clocks: vec![],
        environment: 0,
    };
    let exec = Executor::new(&net).unwrap();
    assert!(exec.enabled_steps(&exec.initial()).iter().any(|s| matches!(s, NetStep::Broadcast { receivers, .. } if receivers.is_empty())));
}

#[test]
fn sync_broadcast_resets_readiness() {
    let net = assemble(&parse("P = (a -> SKIP) [|{a}|] (a -> SKIP)").unwrap()).unwrap();
    let exec = Executor::new(&net).unwrap();
    let ready: Vec<usize> = net.int_vars.iter().enumerate().filter(|(_, v)| v.0.starts_with("g_")).map(|(i, _)| i).collect();
    assert_eq!(ready.len(), 2);
    // walk until the combo broadcast is enabled
    let mut frontier = vec![exec.initial()];
    let mut seen = BTreeSet::new();
    while let Some(cfg) = frontier.pop() {
        if !seen.insert(cfg.clone()) {
            continue;
        }
        for s in exec.enabled_steps(&cfg) {
            let next = exec.apply_step(&cfg, &s);
            if s.channel().is_some_and(|c| exec.channel_name(c).ends_with("___sync")) {
                assert!(ready.iter().all(|i| cfg.ints[*i] == 1));
                assert!(ready.iter().all(|i| next.ints[*i] == 0));
                let NetStep::Broadcast { receivers, .. } = &s else { panic!() };
                assert_eq!(receivers.len(), 2);
                return;
            }
            frontier.push(next);
        }
    }
    panic!("sync never enabled");
}

#[test]
fn prime_traces_of_stop() {
    let traces = traces_ta_prime(&stop_net(), 2).unwrap();
    assert_eq!(lines(&traces), ["<>", "startID0_0", "startID0_0,tock"].map(String::from).into());
    assert_eq!(lines(&traces_ta_prime(&stop_net(), 0).unwrap()), ["<>".to_string()].into());
}

#[test]
fn ads_flow_starts_in_order() {
    let net = assemble(&parse(ADS).unwrap()).unwrap();
    let traces = traces_ta_prime(&net, 3).unwrap();
    assert!(traces.contains_events(&["startIDADS", "startID00_1", "startID01_2"]) || traces.contains_events(&["startIDADS", "startID01_2", "startID00_1"]));
    let traces = traces_ta_prime(&net, 4).unwrap();
    assert!(traces.iter().any(|t| t.events().first().map(String::as_str) == Some("startIDADS") && t.contains("open")));
}

#[test]
fn erased_traces_examples() {
    assert_eq!(lines(&traces_ta(&stop_net(), 2).unwrap()), ["<>", "tock", "tock,tock"].map(String::from).into());
    let skip = assemble(&parse("P = SKIP").unwrap()).unwrap();
    assert_eq!(lines(&traces_ta(&skip, 1).unwrap()), ["<>", "tock"].map(String::from).into());
    let pe = assemble(&parse(PE).unwrap()).unwrap();
    assert_eq!(lines(&traces_ta(&pe, 1).unwrap()), ["<>", "left", "right", "tock"].map(String::from).into());
}

#[test]
fn erasure_matches_stripping_prime_traces() {
    // prime traces grow with every interleaving of coordinating actions, so
    // the deep exact check is limited to nets with short erased runs
    for e in generate_corpus() {
        let net = assemble(&e.spec).unwrap();
        let erased = net.erasure_set();
        for n in [1, 2] {
            let bound = erased_run_bound(&net, n, Limits::default()).unwrap().expect("no erased cycles");
            if n == 2 && bound > 3 {
                continue;
            }
            let prime = traces_ta_prime(&net, n + (n + 1) * bound).unwrap();
            let stripped: TraceSet = prime.erase(n, |c| erased.contains(c));
            assert_eq!(traces_ta(&net, n).unwrap(), stripped, "{} n={n}", e.id);
        }
    }
}

#[test]
fn no_timelocks_in_the_corpus() {
    for e in generate_corpus() {
        let net = assemble(&e.spec).unwrap();
        let exec = Executor::new(&net).unwrap();
        for cfg in reachable_configurations(&net, 4, Limits::default()).unwrap() {
            assert!(exec.time_can_progress(&cfg, 20), "{}", e.id);
        }
    }
}

#[test]
fn corpus_agrees_with_path_oracle() {
    for e in generate_corpus() {
        let net = assemble(&e.spec).unwrap();
        assert_eq!(as_vectors(&traces_ta(&net, 4).unwrap()), naive_ta_traces(&net, 4, &net.erasure_set()), "{}", e.id);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enabled_steps_are_a_function_of_the_configuration(p in process()) {
        let net = assemble(&spec_of(p)).unwrap();
        let exec = Executor::new(&net).unwrap();
        for cfg in reachable_configurations(&net, 3, Limits::default()).unwrap() {
            prop_assert_eq!(exec.enabled_steps(&cfg), exec.enabled_steps(&cfg.clone()));
        }
    }

    #[test]
    fn fast_and_path_traces_agree(p in process()) {
        let net = assemble(&spec_of(p)).unwrap();
        prop_assert_eq!(as_vectors(&traces_ta(&net, 3).unwrap()), naive_ta_traces(&net, 3, &net.erasure_set()));
    }
}
