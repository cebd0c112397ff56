#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use proptest::prelude::*;
use tockta::csp::{CspProcess, CspSpec};
use tockta::exec::{Configuration, Executor};
use tockta::semantics::step;
use tockta::ta::NetworkModel;
use tockta::trace::{Trace, TraceSet};

pub const ADS: &str = "ADS = Controller [|{close}|] Lighting\n\
                       Controller = open -> tock -> close -> Controller\n\
                       Lighting = close -> offLight -> Lighting";
pub const PE: &str = "Pe = (left -> STOP) [] (right -> STOP)";
pub const PI: &str = "Pi = (open -> STOP) /\\ (fire -> close -> STOP)";
pub const PT: &str = "Pt = move -> tock -> tock -> turn -> SKIP";

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}.tcsp", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

pub fn lines(set: &TraceSet) -> BTreeSet<String> {
    set.iter().map(Trace::to_line).collect()
}

pub fn trace(line: &str) -> Trace {
    Trace::parse_line(line).unwrap()
}

/// Path-by-path enumeration straight off the step relation. Internal steps
/// between two observable ones are capped by `tau_budget`.
pub fn naive_csp_traces(spec: &CspSpec, depth: usize) -> BTreeSet<Vec<String>> {
    fn go(
        p: &CspProcess,
        spec: &CspSpec,
        left: usize,
        taus: usize,
        acc: &mut Vec<String>,
        out: &mut BTreeSet<Vec<String>>,
        seen: &mut HashSet<(CspProcess, Vec<String>)>,
    ) {
        if !seen.insert((p.clone(), acc.clone())) {
            return;
        }
        out.insert(acc.clone());
        for (action, next) in step(p, spec) {
            match action.observable() {
                Some(label) if left > 0 => {
                    acc.push(label.to_string());
                    go(&next, spec, left - 1, 0, acc, out, seen);
                    acc.pop();
                }
                Some(_) => {}
                None if taus < 32 => go(&next, spec, left, taus + 1, acc, out, seen),
                None => panic!("internal divergence"),
            }
        }
    }
    let mut out = BTreeSet::new();
    go(spec.main_process(), spec, depth, 0, &mut Vec::new(), &mut out, &mut HashSet::new());
    out
}

/// Path-by-path enumeration over network steps; channels in `hidden`, silent
/// edges and delays are unobservable.
pub fn naive_ta_traces(net: &NetworkModel, depth: usize, hidden: &BTreeSet<String>) -> BTreeSet<Vec<String>> {
    let exec = Executor::new(net).unwrap();
    let mut out = BTreeSet::new();
    let mut seen: HashSet<(Configuration, Vec<String>)> = HashSet::new();
    let mut stack = vec![(exec.initial(), Vec::<String>::new())];
    while let Some((cfg, acc)) = stack.pop() {
        if !seen.insert((cfg.clone(), acc.clone())) {
            continue;
        }
        out.insert(acc.clone());
        for s in exec.enabled_steps(&cfg) {
            let next = exec.apply_step(&cfg, &s);
            let label = s.channel().map(|c| exec.channel_name(c).to_string()).filter(|c| !hidden.contains(c));
            match label {
                Some(l) if acc.len() < depth => {
                    let mut longer = acc.clone();
                    longer.push(l);
                    stack.push((next, longer));
                }
                Some(_) => {}
                None => stack.push((next, acc.clone())),
            }
        }
    }
    out
}

pub fn as_vectors(set: &TraceSet) -> BTreeSet<Vec<String>> {
    set.iter().map(|t| t.events().to_vec()).collect()
}

fn event() -> impl Strategy<Value = &'static str> {
    prop_oneof![Just("a"), Just("b"), Just("c")]
}

/// Small closed processes over the events a, b, c.
pub fn process() -> impl Strategy<Value = CspProcess> {
    let leaf = prop_oneof![
        Just(CspProcess::Stop),
        Just(CspProcess::Skip),
        event().prop_map(|e| CspProcess::prefix(e, CspProcess::Stop)),
        event().prop_map(|e| CspProcess::prefix(e, CspProcess::Skip)),
        Just(CspProcess::prefix("tock", CspProcess::Stop)),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (event(), inner.clone()).prop_map(|(e, p)| CspProcess::prefix(e, p)),
            inner.clone().prop_map(|p| CspProcess::prefix("tock", p)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| CspProcess::seq(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| CspProcess::ext_choice(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| CspProcess::int_choice(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| CspProcess::interleave(l, r)),
            (inner.clone(), inner.clone(), event()).prop_map(|(l, r, e)| CspProcess::gen_par(l, r, &[e])),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| CspProcess::interrupt(l, r)),
            (inner.clone(), event()).prop_map(|(p, e)| CspProcess::hide(p, &[e])),
            (inner.clone(), event(), event()).prop_map(|(p, x, y)| CspProcess::rename(p, &[(x, y)])),
        ]
    })
}

pub fn spec_of(p: CspProcess) -> CspSpec {
    CspSpec::single(p).unwrap()
}
