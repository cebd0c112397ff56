use std::collections::BTreeSet;

use crate::csp::{CspProcess, CspSpec};
use crate::semantics::reachable_processes;

/// Upper bound on distinct reachable process terms per corpus entry.
pub const MAX_CONTROL_STATES: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub spec: CspSpec,
}

type Binary = fn(CspProcess, CspProcess) -> CspProcess;

fn binary_ops() -> Vec<(&'static str, Binary)> {
    vec![
        ("seq", CspProcess::seq),
        ("par", |l, r| CspProcess::gen_par(l, r, &["a"])),
        ("interleave", CspProcess::interleave),
        ("ext", CspProcess::ext_choice),
        ("int", CspProcess::int_choice),
        ("interrupt", CspProcess::interrupt),
    ]
}

/// The operand atoms.
pub fn atoms() -> Vec<CspProcess> {
    use CspProcess::{Skip, Stop};
    vec![
        Stop,
        Skip,
        CspProcess::prefix("a", Stop),
        CspProcess::prefix("tock", Stop),
        CspProcess::prefix("a", Skip),
    ]
}

fn right_atoms() -> Vec<CspProcess> {
    let mut out = atoms();
    out.push(CspProcess::prefix("b", CspProcess::Stop));
    out.push(CspProcess::prefix("b", CspProcess::Skip));
    out
}

/// Number of distinct process terms reachable from the main process.
pub fn control_states(spec: &CspSpec) -> usize {
    reachable_processes(spec, 2 * MAX_CONTROL_STATES).map_or(usize::MAX, |v| v.len())
}

fn candidates() -> Vec<CspProcess> {
    let mut out = Vec::new();
    for x in right_atoms() {
        out.push(CspProcess::prefix("b", x.clone()));
        out.push(CspProcess::hide(x.clone(), &["a"]));
        out.push(CspProcess::rename(x, &[("a", "b")]));
    }
    for (_, op) in binary_ops() {
        for l in atoms() {
            for r in right_atoms() {
                out.push(op(l.clone(), r));
            }
        }
    }
    let inner = [
        (CspProcess::prefix("a", CspProcess::Skip), CspProcess::prefix("b", CspProcess::Stop)),
        (CspProcess::prefix("a", CspProcess::Stop), CspProcess::Skip),
    ];
    for (outer_name, outer) in binary_ops() {
        for (inner_name, op) in binary_ops() {
            if outer_name == inner_name {
                continue;
            }
            for (l, r) in &inner {
                out.push(outer(op(l.clone(), r.clone()), CspProcess::prefix("b", CspProcess::Skip)));
            }
        }
    }
    out
}

/// Deterministic corpus of small specs, structurally de-duplicated and
/// filtered by [`MAX_CONTROL_STATES`]. Ids are `c000`, `c001`, ...
///
/// ```
/// use tockta::harness::generate_corpus;
///
/// let corpus = generate_corpus();
/// assert!(corpus.len() >= 111);
/// assert_eq!(corpus[0].id, "c000");
/// ```
pub fn generate_corpus() -> Vec<CorpusEntry> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for p in candidates() {
        if !seen.insert(p.clone()) {
            continue;
        }
        let spec = CspSpec::single(p).expect("corpus processes are closed");
        if control_states(&spec) > MAX_CONTROL_STATES {
            continue;
        }
        out.push(CorpusEntry { id: format!("c{:03}", out.len()), spec });
    }
    out
}
