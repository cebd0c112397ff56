use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::csp::{CspProcess, CspSpec, TOCK};
use crate::explore::{bounded_traces, Limits, Move, TransitionSystem};
use crate::semantics::traces_tock_csp;
use crate::ta::{ChannelKind, NetworkModel, TimedAutomaton};
use crate::trace::{Trace, TraceSet};
use crate::translate::{assemble, TranslateError};

/// The three checks made for every depth, in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofStep {
    /// `traces_tockCSP n STOP = {<tock>^l | l <= n}`
    CspTraces,
    /// The lone STOP automaton, run open, yields `{<>} ∪ {<start>^<tock>^k}`.
    AutomatonShape,
    /// Deleting coordinating actions from the open runs gives the CSP side.
    ErasedEquality,
}

impl ProofStep {
    pub fn name(self) -> &'static str {
        match self {
            ProofStep::CspTraces => "csp-traces",
            ProofStep::AutomatonShape => "automaton-shape",
            ProofStep::ErasedEquality => "erased-equality",
        }
    }
}

impl fmt::Display for ProofStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub n: usize,
    pub step: ProofStep,
    pub claim: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StopProof {
    pub max_n: usize,
    pub steps: Vec<StepRecord>,
}

impl StopProof {
    pub fn passed(&self) -> bool {
        self.steps.iter().all(|s| s.passed)
    }

    /// Depth and step of the first failed check.
    pub fn failure(&self) -> Option<(usize, ProofStep)> {
        self.steps.iter().find(|s| !s.passed).map(|s| (s.n, s.step))
    }

    pub fn report(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let mark = if s.passed { "ok" } else { "FAILED" };
            out.push_str(&format!("n={:<3} {:<16} {}  [{mark}]\n", s.n, s.step.name(), s.claim));
        }
        match self.failure() {
            None => out.push_str(&format!(
                "traces_tockCSP n STOP = traces_TA n (transTA STOP) for every n <= {}\n",
                self.max_n
            )),
            Some((n, step)) => out.push_str(&format!("failed at n={n} in step {step}\n")),
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum ProofError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error("{0}")]
    Malformed(String),
}

/// One automaton with every edge enabled regardless of guards or partners.
struct Open<'a> {
    ta: &'a TimedAutomaton,
    hidden: &'a BTreeSet<String>,
}

impl TransitionSystem for Open<'_> {
    type State = String;

    fn initial(&self) -> String {
        self.ta.initial.clone()
    }

    fn moves(&self, state: &String) -> Vec<Move<String>> {
        self.ta
            .edges
            .iter()
            .filter(|e| &e.source == state)
            .map(|e| {
                let label = e.sync.as_ref().map(|s| s.channel.clone()).filter(|c| !self.hidden.contains(c));
                (label, e.target.clone())
            })
            .collect()
    }
}

fn tocks(k: usize) -> Trace {
    Trace::new(std::iter::repeat_n(TOCK, k))
}

/// Checks the STOP base case for every depth up to `max_n` against the
/// translator's own output.
///
/// ```
/// let proof = tockta::harness::prove_stop_base(5).unwrap();
/// assert!(proof.passed());
/// ```
pub fn prove_stop_base(max_n: usize) -> Result<StopProof, ProofError> {
    let spec = CspSpec::single(CspProcess::Stop).expect("closed");
    prove_stop_base_with(&assemble(&spec)?, max_n)
}

/// As [`prove_stop_base`], for a given translation of STOP. Stops at the first
/// failing check.
pub fn prove_stop_base_with(net: &NetworkModel, max_n: usize) -> Result<StopProof, ProofError> {
    let spec = CspSpec::single(CspProcess::Stop).expect("closed");
    let ta = net
        .automata
        .iter()
        .enumerate()
        .find(|(i, _)| *i != net.environment)
        .map(|(_, a)| a)
        .ok_or_else(|| ProofError::Malformed("no component automaton".into()))?;
    let start = net
        .channels
        .iter()
        .find(|c| c.kind == ChannelKind::Flow)
        .map(|c| c.name.clone())
        .ok_or_else(|| ProofError::Malformed("no start channel".into()))?;
    let none = BTreeSet::new();
    let erased = net.erasure_set();
    let limits = Limits::default();
    let bound = |e: crate::explore::BoundExceeded| ProofError::Malformed(e.to_string());

    let mut steps = Vec::new();
    for n in 0..=max_n {
        let expected = TraceSet::from_traces(n, (0..=n).map(tocks));
        let csp = traces_tock_csp(&spec, n).map_err(bound)?;
        let ok = csp == expected;
        steps.push(StepRecord {
            n,
            step: ProofStep::CspTraces,
            claim: format!("traces_tockCSP {n} STOP = {{<tock>^l | l <= {n}}}"),
            passed: ok,
        });
        if !ok {
            break;
        }

        let shape = TraceSet::from_traces(
            n,
            std::iter::once(Trace::empty()).chain((0..n).map(|k| {
                let mut events = vec![start.clone()];
                events.extend(tocks(k).events().iter().cloned());
                Trace::new(events)
            })),
        );
        let open = bounded_traces(&Open { ta, hidden: &none }, n, limits).map_err(bound)?;
        let ok = open == shape;
        steps.push(StepRecord {
            n,
            step: ProofStep::AutomatonShape,
            claim: format!("traces'_TA {n} (transTA STOP) = {{<>}} u {{<{start}>^<tock>^k | k < {n}}}"),
            passed: ok,
        });
        if !ok {
            break;
        }

        let stripped = bounded_traces(&Open { ta, hidden: &erased }, n, limits).map_err(bound)?;
        let ok = stripped == csp;
        steps.push(StepRecord {
            n,
            step: ProofStep::ErasedEquality,
            claim: format!("{{t \\ coordinating | t <- traces'_TA}} = traces_tockCSP {n} STOP"),
            passed: ok,
        });
        if !ok {
            break;
        }
    }
    Ok(StopProof { max_n, steps })
}
