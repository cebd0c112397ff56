mod common;

use std::collections::BTreeSet;

use common::*;
use proptest::prelude::*;
use tockta::csp::{alphabet, parse, print_process};
use tockta::exec::traces_ta;
use tockta::harness::generate_corpus;
use tockta::semantics::traces_tock_csp;
use tockta::ta::{ChannelKind, Direction, LocationKind};
use tockta::translate::{assemble, assemble_with, build_sync_ta, trans_ta, AssembleOptions, SyncRequirement, TranslationContext};
use tockta::xml::emit;

#[test]
fn stop_translates_to_two_locations() {
    let spec = parse("P = STOP").unwrap();
    let ctx = TranslationContext { start: "startID0_0".into(), ..TranslationContext::root(&spec) };
    let t = trans_ta(&spec, spec.main_process(), &ctx).unwrap();
    assert_eq!(t.automata.len(), 1);
    let ta = &t.automata[0];
    let ids: Vec<&str> = ta.locations.iter().map(|l| l.id.as_str()).collect();
    assert_eq!(ids, ["s0", "s1"]);
    assert_eq!(ta.initial, "s0");
    let edges: Vec<(String, String, String)> =
        ta.edges.iter().map(|e| (e.source.clone(), e.sync.as_ref().unwrap().to_string(), e.target.clone())).collect();
    assert_eq!(
        edges,
        [("s0".into(), "startID0_0?".into(), "s1".into()), ("s1".into(), "tock?".into(), "s1".into())]
    );
}

#[test]
fn automaton_counts_follow_the_figures() {
    for (src, count) in [(ADS, 8), (PE, 6), (PI, 7), ("P = STOP", 2)] {
        let net = assemble(&parse(src).unwrap()).unwrap();
        assert_eq!(net.automata.len(), count, "{src}");
    }
}

#[test]
fn ads_sync_guard_sums_readiness() {
    let net = assemble(&parse(ADS).unwrap()).unwrap();
    let controller = net
        .automata
        .iter()
        .find(|a| a.edges.iter().any(|e| e.sync.as_ref().is_some_and(|s| s.channel == "close___sync" && s.direction == Direction::Send)))
        .expect("sync controller");
    let guard = controller.edges.iter().map(|e| e.guard.to_string()).find(|g| g.contains("g_close")).expect("guard");
    assert!(guard.starts_with("(g_close") && guard.ends_with(")==2"), "{guard}");
    assert_eq!(guard.matches('+').count(), 1);
}

#[test]
fn three_way_sync() {
    let req = SyncRequirement {
        event: "e".into(),
        channel: "e___sync".into(),
        participants: vec!["g_e0".into(), "g_e1".into(), "g_e2".into()],
        kills: vec![],
    };
    let ta = build_sync_ta(&[req]);
    assert_eq!(ta.edges[0].guard.to_string(), "(g_e0 + g_e1 + g_e2)==3");
    assert!(build_sync_ta(&[]).edges.is_empty());

    let spec = parse("P = ((e -> SKIP) [|{e}|] (e -> SKIP)) [|{e}|] (e -> SKIP)").unwrap();
    let net = assemble(&spec).unwrap();
    assert!(net.automata.iter().flat_map(|a| &a.edges).any(|e| e.guard.to_string().ends_with("==3")));
    assert_eq!(lines(&traces_ta(&net, 2).unwrap()), lines(&traces_tock_csp(&spec, 2).unwrap()));
}

#[test]
fn environment_shape() {
    let net = assemble(&parse(ADS).unwrap()).unwrap();
    let env = net.environment_automaton();
    assert_eq!(env.locations.len(), 1);
    assert_eq!(env.edges.len(), 6);
    assert!(env.edges.iter().all(|e| e.source == e.target));
    let stop = assemble(&parse("P = STOP").unwrap()).unwrap();
    assert_eq!(stop.environment_automaton().edges.len(), 3);
    assert_eq!(assemble(&parse(PE).unwrap()).unwrap().environment_automaton().edges.len(), 5);
}

#[test]
fn stop_network_has_one_flow_channel() {
    let net = assemble(&parse("P = STOP").unwrap()).unwrap();
    let flows = net.channels.iter().filter(|c| c.kind == ChannelKind::Flow).count();
    assert_eq!(flows, 1);
}

#[test]
fn names_are_unique_and_user_events_not_erased() {
    for entry in generate_corpus().iter().chain([]) {
        let net = assemble(&entry.spec).unwrap();
        let names: Vec<&str> = net.channels.iter().map(|c| c.name.as_str()).chain(net.int_vars.iter().map(|v| v.0.as_str())).collect();
        let unique: BTreeSet<&str> = names.iter().copied().collect();
        assert_eq!(unique.len(), names.len(), "{}", entry.id);
        let erased = net.erasure_set();
        for e in alphabet(&entry.spec) {
            assert!(!erased.contains(e.as_str()), "{}", entry.id);
        }
        assert!(net.validate().is_empty(), "{}: {:?}", entry.id, net.validate());
    }
}

#[test]
fn every_event_occurrence_has_one_emitter() {
    for src in [ADS, PE, PI, PT] {
        let spec = parse(src).unwrap();
        let net = assemble(&spec).unwrap();
        for e in alphabet(&spec) {
            let emitters = net
                .automata
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != net.environment)
                .flat_map(|(_, a)| &a.edges)
                .filter(|edge| edge.sync.as_ref().is_some_and(|s| s.channel == e.as_str() && s.direction == Direction::Send))
                .count();
            assert_eq!(emitters, 1, "{src}: {e}");
        }
    }
}

#[test]
fn committed_locations_only_where_expected() {
    let net = assemble(&parse(PI).unwrap()).unwrap();
    let env = net.environment_automaton();
    assert!(env.locations.iter().all(|l| l.kind == LocationKind::Normal));
}

#[test]
fn assembly_is_deterministic() {
    for src in [ADS, PE, PI, &fixture("railway")] {
        let spec = parse(src).unwrap();
        assert_eq!(emit(&assemble(&spec).unwrap()), emit(&assemble(&spec).unwrap()));
    }
}

#[test]
fn root_start_override() {
    let spec = parse("P = STOP").unwrap();
    let net = assemble_with(&spec, &AssembleOptions { root_start: Some("startID0_0".into()) }).unwrap();
    assert!(net.channel("startID0_0").is_some());
    assert_eq!(net.erasure_set().into_iter().filter(|c| c.starts_with("start")).collect::<Vec<_>>(), ["startID0_0"]);
}

#[test]
fn corpus_agrees_with_a_path_oracle() {
    for entry in generate_corpus() {
        let net = assemble(&entry.spec).unwrap();
        let ta = naive_ta_traces(&net, 4, &net.erasure_set());
        let csp = naive_csp_traces(&entry.spec, 4);
        assert_eq!(ta, csp, "{} {}", entry.id, print_process(entry.spec.main_process()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(192))]

    #[test]
    fn random_processes_keep_their_traces(p in process()) {
        let spec = spec_of(p);
        let net = assemble(&spec).unwrap();
        let csp = traces_tock_csp(&spec, 4).unwrap();
        let ta = traces_ta(&net, 4).unwrap();
        prop_assert_eq!(lines(&ta), lines(&csp), "{}", print_process(spec.main_process()));
    }
}
