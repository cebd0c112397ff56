use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{Trace, TraceSet};

/// Witnesses kept per direction.
pub const MAX_WITNESSES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    EqualAtStage1,
    AcceptedAtStage2,
    Mismatch,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self != Verdict::Mismatch
    }
}

/// Which side of the comparison a witness trace belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Csp,
    Ta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub side: Side,
    /// Comma separated events, `<>` for the empty trace.
    pub trace: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub id: String,
    pub depth: usize,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub millis: u64,
}

impl ComparisonReport {
    /// The report without its timing, for reproducibility checks.
    pub fn untimed(&self) -> ComparisonReport {
        ComparisonReport { millis: 0, ..self.clone() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("trace sets have different depths: csp {csp}, ta {ta}")]
pub struct DepthMismatch {
    pub csp: usize,
    pub ta: usize,
}

fn sorted_multiset(set: &TraceSet) -> BTreeMap<Vec<String>, usize> {
    let mut out = BTreeMap::new();
    for t in set {
        let mut events = t.events().to_vec();
        events.sort();
        *out.entry(events).or_insert(0) += 1;
    }
    out
}

fn witnesses(from: &TraceSet, against: &TraceSet, side: Side) -> Vec<Witness> {
    let mut only: Vec<&Trace> = from.iter().filter(|t| !against.contains(t)).collect();
    only.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    only.into_iter().take(MAX_WITNESSES).map(|t| Witness { side, trace: t.to_line() }).collect()
}

/// Two-stage comparison: exact equality first, then permutation-insensitive
/// acceptance.
///
/// ```
/// use tockta::harness::{compare_traces, Verdict};
/// use tockta::trace::{Trace, TraceSet};
///
/// let csp = TraceSet::from_traces(2, [Trace::new(["a", "b"])]);
/// let mut ta = csp.clone();
/// ta.insert_closed(Trace::new(["a", "c"]));
/// let report = compare_traces(&csp, &ta).unwrap();
/// assert_eq!(report.verdict, Verdict::Mismatch);
/// assert_eq!(report.witnesses[0].trace, "a,c");
/// ```
pub fn compare_traces(csp: &TraceSet, ta: &TraceSet) -> Result<ComparisonReport, DepthMismatch> {
    if csp.depth() != ta.depth() {
        return Err(DepthMismatch { csp: csp.depth(), ta: ta.depth() });
    }
    let verdict = if csp == ta {
        Verdict::EqualAtStage1
    } else if sorted_multiset(csp) == sorted_multiset(ta) {
        // membership modulo event order; literal membership plus equal
        // counts would already imply equality
        Verdict::AcceptedAtStage2
    } else {
        Verdict::Mismatch
    };
    let witnesses = if verdict == Verdict::EqualAtStage1 {
        Vec::new()
    } else {
        let mut w = witnesses(csp, ta, Side::Csp);
        w.extend(witnesses(ta, csp, Side::Ta));
        w
    };
    Ok(ComparisonReport { id: String::new(), depth: csp.depth(), verdict, witnesses, millis: 0 })
}
