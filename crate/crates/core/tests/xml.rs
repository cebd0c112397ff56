mod common;

use common::*;
use proptest::prelude::*;
use tockta::csp::parse;
use tockta::harness::generate_corpus;
use tockta::translate::{assemble, assemble_with, build_sync_ta, AssembleOptions};
use tockta::xml::{emit, load, XmlError};

#[test]
fn stop_declarations() {
    let net = assemble_with(&parse("P = STOP").unwrap(), &AssembleOptions { root_start: Some("startID0_0".into()) }).unwrap();
    let doc = emit(&net);
    assert!(doc.contains("broadcast chan tock;"));
    assert!(doc.contains("chan startID0_0;"));
    assert!(doc.contains("<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN'"));
}

#[test]
fn ads_has_eight_templates() {
    let net = assemble(&parse(ADS).unwrap()).unwrap();
    let doc = emit(&net);
    assert_eq!(doc.matches("<template>").count(), 8);
    let system = doc.lines().find(|l| l.contains("<system>")).unwrap();
    assert_eq!(system.matches(", ").count(), 7);
}

#[test]
fn empty_sync_automaton_has_no_transitions() {
    let mut net = assemble(&parse("P = STOP").unwrap()).unwrap();
    net.automata.insert(1, build_sync_ta(&[]));
    let doc = emit(&net);
    let template = doc.split("<template>").find(|t| t.contains(">Sync</name>")).unwrap();
    assert_eq!(template.matches("<location ").count(), 1);
    assert!(!template.contains("<transition>"));
}

#[test]
fn round_trips_every_network() {
    let mut sources: Vec<String> = [ADS, PE, PI].map(String::from).to_vec();
    sources.extend(["thermostat", "railway"].map(fixture));
    let mut nets: Vec<_> = sources.iter().map(|s| assemble(&parse(s).unwrap()).unwrap()).collect();
    nets.extend(generate_corpus().iter().map(|e| assemble(&e.spec).unwrap()));
    for net in nets {
        let doc = emit(&net);
        assert_eq!(load(&doc).unwrap(), net);
        assert_eq!(emit(&load(&doc).unwrap()), doc);
    }
}

#[test]
fn missing_init() {
    let doc = "<nta><declaration/><template><name>T</name><location id=\"a\"/></template></nta>";
    let err = load(doc).unwrap_err();
    assert!(matches!(err, XmlError::MissingInit { .. }));
    assert!(err.to_string().contains("missing initial location"));
}

#[test]
fn parameters_are_unsupported() {
    let doc = "<nta><declaration/><template><name>T</name><parameter>int i</parameter>\
               <location id=\"a\"/><init ref=\"a\"/></template></nta>";
    let err = load(doc).unwrap_err();
    assert!(err.to_string().contains("unsupported expression"), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_networks_round_trip(p in process()) {
        let net = assemble(&spec_of(p)).unwrap();
        prop_assert_eq!(load(&emit(&net)).unwrap(), net);
    }
}
