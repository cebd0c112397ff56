//! Small-step operational semantics of the tock-CSP subset and the bounded
//! trace oracle built on it.
//!
//! `tock` is shared by every operator: a compound process can let time pass
//! only if all of its active parts can. It never resolves a choice. After
//! termination a process keeps accepting `tock` forever.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::csp::{CspProcess, CspSpec, EventName, TOCK};
use crate::explore::{bounded_traces, BoundExceeded, Limits, Move, TransitionSystem};
use crate::trace::TraceSet;

/// A labelled step of the process LTS.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Visible(EventName),
    Tock,
    /// Internal progress. Hidden events keep their original name here.
    Tau(Option<EventName>),
    /// Successful termination; never observable.
    Tick,
}

impl Action {
    /// The trace entry this action contributes, if any.
    pub fn observable(&self) -> Option<&str> {
        match self {
            Action::Visible(e) => Some(e.as_str()),
            Action::Tock => Some(TOCK),
            Action::Tau(_) | Action::Tick => None,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Visible(e) => write!(f, "{e}"),
            Action::Tock => f.write_str(TOCK),
            Action::Tau(None) => f.write_str("tau"),
            Action::Tau(Some(e)) => write!(f, "tau({e})"),
            Action::Tick => f.write_str("tick"),
        }
    }
}

/// All steps of `p`. References are unfolded on demand and stay folded in
/// successor states, so recursive processes have finitely many states.
///
/// ```
/// use tockta::csp::{parse, CspProcess};
/// use tockta::semantics::{step, Action};
///
/// let spec = parse("P = STOP").unwrap();
/// assert_eq!(step(&CspProcess::Stop, &spec), vec![(Action::Tock, CspProcess::Stop)]);
/// ```
pub fn step(p: &CspProcess, spec: &CspSpec) -> Vec<(Action, CspProcess)> {
    let mut out = Vec::new();
    push_steps(p, spec, &mut out);
    let mut seen = BTreeSet::new();
    out.retain(|s| seen.insert(s.clone()));
    out
}

fn push_steps(p: &CspProcess, spec: &CspSpec, out: &mut Vec<(Action, CspProcess)>) {
    use CspProcess::*;
    match p {
        Stop => out.push((Action::Tock, Stop)),
        Skip => {
            out.push((Action::Tock, Skip));
            out.push((Action::Tick, Omega));
        }
        Omega => out.push((Action::Tock, Omega)),
        Prefix(e, cont) if e.is_tock() => out.push((Action::Tock, (**cont).clone())),
        Prefix(e, cont) => {
            out.push((Action::Visible(e.clone()), (**cont).clone()));
            out.push((Action::Tock, p.clone()));
        }
        Ref(name) => {
            if let Some(body) = spec.get(name) {
                push_steps(body, spec, out);
            }
        }
        IntChoice(l, r) => {
            out.push((Action::Tau(None), (**l).clone()));
            out.push((Action::Tau(None), (**r).clone()));
        }
        Seq(l, r) => {
            for (a, l2) in step(l, spec) {
                match a {
                    Action::Tick => out.push((Action::Tau(None), (**r).clone())),
                    a => out.push((a, CspProcess::seq(l2, (**r).clone()))),
                }
            }
        }
        ExtChoice(l, r) => {
            let (ls, rs) = (step(l, spec), step(r, spec));
            for (a, l2) in &ls {
                match a {
                    Action::Visible(_) | Action::Tick => out.push((a.clone(), l2.clone())),
                    Action::Tau(_) => out.push((a.clone(), CspProcess::ext_choice(l2.clone(), (**r).clone()))),
                    Action::Tock => {}
                }
            }
            for (a, r2) in &rs {
                match a {
                    Action::Visible(_) | Action::Tick => out.push((a.clone(), r2.clone())),
                    Action::Tau(_) => out.push((a.clone(), CspProcess::ext_choice((**l).clone(), r2.clone()))),
                    Action::Tock => {}
                }
            }
            for_each_joint_tock(&ls, &rs, |l2, r2| out.push((Action::Tock, CspProcess::ext_choice(l2, r2))));
        }
        GenPar(l, r, sync) => par_steps(l, r, sync, spec, out, |l2, r2| {
            CspProcess::GenPar(Box::new(l2), Box::new(r2), sync.clone())
        }),
        Interleave(l, r) => {
            par_steps(l, r, &BTreeSet::new(), spec, out, CspProcess::interleave);
        }
        Interrupt(l, r) => {
            let (ls, rs) = (step(l, spec), step(r, spec));
            for (a, l2) in &ls {
                match a {
                    Action::Visible(_) | Action::Tau(_) => {
                        out.push((a.clone(), CspProcess::interrupt(l2.clone(), (**r).clone())))
                    }
                    Action::Tick => out.push((Action::Tick, Omega)),
                    Action::Tock => {}
                }
            }
            for (a, r2) in &rs {
                match a {
                    Action::Visible(_) => out.push((a.clone(), r2.clone())),
                    Action::Tau(_) => out.push((a.clone(), CspProcess::interrupt((**l).clone(), r2.clone()))),
                    Action::Tick => out.push((Action::Tick, Omega)),
                    Action::Tock => {}
                }
            }
            for_each_joint_tock(&ls, &rs, |l2, r2| out.push((Action::Tock, CspProcess::interrupt(l2, r2))));
        }
        Hide(body, hidden) => {
            for (a, b2) in step(body, spec) {
                let a = match a {
                    Action::Visible(e) if hidden.contains(&e) => Action::Tau(Some(e)),
                    a => a,
                };
                let next = if a == Action::Tick { Omega } else { hide(b2, hidden) };
                out.push((a, next));
            }
        }
        Rename(body, map) => {
            for (a, b2) in step(body, spec) {
                let a = match a {
                    Action::Visible(e) => Action::Visible(map.get(&e).cloned().unwrap_or(e)),
                    a => a,
                };
                let next = if a == Action::Tick { Omega } else { rename(b2, map) };
                out.push((a, next));
            }
        }
    }
}

fn for_each_joint_tock<F>(ls: &[(Action, CspProcess)], rs: &[(Action, CspProcess)], mut f: F)
where
    F: FnMut(CspProcess, CspProcess),
{
    for (a, l2) in ls {
        if *a != Action::Tock {
            continue;
        }
        for (b, r2) in rs {
            if *b == Action::Tock {
                f(l2.clone(), r2.clone());
            }
        }
    }
}

fn par_steps<F>(
    l: &CspProcess,
    r: &CspProcess,
    sync: &BTreeSet<EventName>,
    spec: &CspSpec,
    out: &mut Vec<(Action, CspProcess)>,
    make: F,
) where
    F: Fn(CspProcess, CspProcess) -> CspProcess,
{
    let (ls, rs) = (step(l, spec), step(r, spec));
    let synced = |a: &Action| matches!(a, Action::Visible(e) if sync.contains(e));
    for (a, l2) in &ls {
        match a {
            Action::Tock | Action::Tick => {}
            a if synced(a) => {}
            a => out.push((a.clone(), make(l2.clone(), r.clone()))),
        }
    }
    for (a, r2) in &rs {
        match a {
            Action::Tock | Action::Tick => {}
            a if synced(a) => {}
            a => out.push((a.clone(), make(l.clone(), r2.clone()))),
        }
    }
    for (a, l2) in &ls {
        for (b, r2) in &rs {
            if a != b {
                continue;
            }
            match a {
                Action::Tock => out.push((Action::Tock, make(l2.clone(), r2.clone()))),
                Action::Tick => out.push((Action::Tick, CspProcess::Omega)),
                a if synced(a) => out.push((a.clone(), make(l2.clone(), r2.clone()))),
                _ => {}
            }
        }
    }
}

/// `p \ hidden`, merging directly nested hidings.
fn hide(p: CspProcess, hidden: &BTreeSet<EventName>) -> CspProcess {
    match p {
        CspProcess::Omega => CspProcess::Omega,
        CspProcess::Hide(inner, more) => {
            let all = more.union(hidden).cloned().collect();
            CspProcess::Hide(inner, all)
        }
        p if hidden.is_empty() => p,
        p => CspProcess::Hide(Box::new(p), hidden.clone()),
    }
}

/// `p[[map]]`, composing directly nested renamings.
fn rename(p: CspProcess, map: &BTreeMap<EventName, EventName>) -> CspProcess {
    let (inner, composed) = match p {
        CspProcess::Omega => return CspProcess::Omega,
        CspProcess::Rename(inner, first) => {
            let mut composed: BTreeMap<EventName, EventName> = first
                .iter()
                .map(|(a, b)| (a.clone(), map.get(b).cloned().unwrap_or_else(|| b.clone())))
                .collect();
            for (a, b) in map {
                if !first.contains_key(a) {
                    composed.insert(a.clone(), b.clone());
                }
            }
            (*inner, composed)
        }
        p => (p, map.clone()),
    };
    let composed: BTreeMap<_, _> = composed.into_iter().filter(|(a, b)| a != b).collect();
    if composed.is_empty() {
        inner
    } else {
        CspProcess::Rename(Box::new(inner), composed)
    }
}

struct CspLts<'a> {
    spec: &'a CspSpec,
}

impl TransitionSystem for CspLts<'_> {
    type State = CspProcess;

    fn initial(&self) -> CspProcess {
        self.spec.main_process().clone()
    }

    fn moves(&self, state: &CspProcess) -> Vec<Move<CspProcess>> {
        step(state, self.spec)
            .into_iter()
            .map(|(a, next)| (a.observable().map(str::to_string), next))
            .collect()
    }
}

/// All traces of the main process with at most `depth` visible and `tock`
/// events.
///
/// ```
/// use tockta::csp::parse;
/// use tockta::semantics::traces_tock_csp;
///
/// let spec = parse("P = STOP").unwrap();
/// let traces = traces_tock_csp(&spec, 2).unwrap();
/// assert_eq!(traces.to_canonical_text(), "<>\ntock\ntock,tock\n");
/// ```
pub fn traces_tock_csp(spec: &CspSpec, depth: usize) -> Result<TraceSet, BoundExceeded> {
    traces_tock_csp_with(spec, depth, Limits::default())
}

pub fn traces_tock_csp_with(spec: &CspSpec, depth: usize, limits: Limits) -> Result<TraceSet, BoundExceeded> {
    bounded_traces(&CspLts { spec }, depth, limits)
}

/// Distinct process states reachable within `depth` observable events.
pub fn reachable_processes(spec: &CspSpec, depth: usize) -> Result<Vec<CspProcess>, BoundExceeded> {
    crate::explore::reachable_states(&CspLts { spec }, depth, Limits::default())
}
