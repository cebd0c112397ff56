mod common;

use common::*;
use tockta::csp::{alphabet, parse};
use tockta::harness::generate_corpus;
use tockta::ta::{ChannelDecl, ChannelKind, ChannelMode, Edge, NetworkModel, SyncLabel, TimedAutomaton};
use tockta::translate::{assemble, assemble_with, AssembleOptions};

fn bare(edges: Vec<Edge>, channels: Vec<ChannelDecl>) -> NetworkModel {
    let mut ta = TimedAutomaton::new("A");
    ta.edges = edges;
    NetworkModel { automata: vec![ta], channels, int_vars: vec![], global_clocks: vec![], environment: 0 }
}

fn chan(name: &str) -> ChannelDecl {
    ChannelDecl { name: name.into(), mode: ChannelMode::Binary, kind: ChannelKind::infer(name) }
}

#[test]
fn translated_ads_is_valid() {
    let net = assemble(&parse(ADS).unwrap()).unwrap();
    assert!(net.validate().is_empty(), "{:?}", net.validate());
    assert_eq!(net.validate(), net.validate());
}

#[test]
fn unresolved_channel() {
    let net = bare(vec![Edge::new("s0", "s0").with_sync(SyncLabel::send("ghost"))], vec![]);
    let diags = net.validate();
    assert_eq!(diags.len(), 1);
    assert!(diags[0].message.contains("unresolved channel"));
}

#[test]
fn duplicate_channel() {
    let sync = ChannelDecl { name: "close___sync".into(), mode: ChannelMode::Broadcast, kind: ChannelKind::Synchronisation };
    let net = bare(vec![], vec![sync.clone(), sync]);
    let diags = net.validate();
    assert_eq!(diags.len(), 1);
    assert!(diags[0].message.contains("duplicate channel"));
}

#[test]
fn erasure_sets() {
    let stop = assemble_with(&parse("P = STOP").unwrap(), &AssembleOptions { root_start: Some("startID0_0".into()) }).unwrap();
    let erased: Vec<String> = stop.erasure_set().into_iter().filter(|c| !c.starts_with("finishID")).collect();
    assert_eq!(erased, ["startID0_0"]);

    let ads = assemble(&parse(ADS).unwrap()).unwrap();
    let erased = ads.erasure_set();
    assert!(erased.contains("close___sync"));
    assert!(erased.contains("finishID0"));
    assert!(ads.channels.iter().filter(|c| c.name.starts_with("startID")).all(|c| erased.contains(&c.name)));
    for user in ["open", "close", "offLight", "tock"] {
        assert!(!erased.contains(user));
    }

    let plain = bare(vec![], vec![chan("a"), chan("b")]);
    assert!(plain.erasure_set().is_empty());
}

#[test]
fn kinds_agree_with_names() {
    for e in generate_corpus() {
        let net = assemble(&e.spec).unwrap();
        for c in &net.channels {
            assert_eq!(c.kind, ChannelKind::infer(&c.name), "{}: {}", e.id, c.name);
        }
        let user: Vec<String> = alphabet(&e.spec).iter().map(|x| x.to_string()).collect();
        assert!(net.erasure_set().iter().all(|c| !user.contains(c)));
    }
}
