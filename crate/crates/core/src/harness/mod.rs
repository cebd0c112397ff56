//! Trace comparison between the two semantics, the systematic corpus and the
//! STOP base-case check.

mod compare;
mod corpus;
mod prove;

use std::time::Instant;

use thiserror::Error;

pub use compare::{compare_traces, ComparisonReport, DepthMismatch, Side, Verdict, Witness, MAX_WITNESSES};
pub use corpus::{atoms, control_states, generate_corpus, CorpusEntry, MAX_CONTROL_STATES};
pub use prove::{prove_stop_base, prove_stop_base_with, ProofError, ProofStep, StepRecord, StopProof};

use crate::csp::CspSpec;
use crate::exec::{traces_ta, TraceError};
use crate::explore::BoundExceeded;
use crate::semantics::traces_tock_csp;
use crate::translate::{assemble, TranslateError};

/// Depth used when none is given.
pub const DEFAULT_DEPTH: usize = 5;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Network(#[from] TraceError),
    #[error(transparent)]
    Csp(#[from] BoundExceeded),
    #[error(transparent)]
    Depth(#[from] DepthMismatch),
}

/// Translates `spec` and compares both trace sets at depth `n`.
///
/// ```
/// use tockta::csp::parse;
/// use tockta::harness::{check_spec, Verdict};
///
/// let spec = parse("Pe = (left -> STOP) [] (right -> STOP)").unwrap();
/// assert_eq!(check_spec(&spec, 3).unwrap().verdict, Verdict::EqualAtStage1);
/// ```
pub fn check_spec(spec: &CspSpec, n: usize) -> Result<ComparisonReport, CheckError> {
    let started = Instant::now();
    let csp = traces_tock_csp(spec, n)?;
    let ta = traces_ta(&assemble(spec)?, n)?;
    let mut report = compare_traces(&csp, &ta)?;
    report.id = spec.main().to_string();
    report.millis = started.elapsed().as_millis() as u64;
    Ok(report)
}
