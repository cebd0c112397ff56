//! The tock-CSP subset: syntax tree, parser, printer and static queries.

mod ast;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};

pub use ast::{is_reserved_event, CspProcess, CspSpec, EventName, NameError, SpecError, RESERVED_PREFIXES, TOCK};
pub use parse::{parse, parse_process, ParseError, Position};
pub use print::{print_process, print_spec};

use crate::semantics::{step, Action};

/// Every user event the main process can expose, after renaming and hiding.
///
/// ```
/// use tockta::csp::{alphabet, parse};
///
/// let spec = parse("P = (a -> STOP)[[a <- b]]").unwrap();
/// let names: Vec<String> = alphabet(&spec).iter().map(|e| e.to_string()).collect();
/// assert_eq!(names, ["b"]);
/// ```
pub fn alphabet(spec: &CspSpec) -> BTreeSet<EventName> {
    // Definitions refer to each other, so iterate to a fixpoint; every step
    // only adds events.
    let mut known: BTreeMap<&str, BTreeSet<EventName>> =
        spec.definitions().keys().map(|k| (k.as_str(), BTreeSet::new())).collect();
    loop {
        let mut changed = false;
        for (name, body) in spec.definitions() {
            let events = body_alphabet(body, &known);
            if known[name.as_str()] != events {
                known.insert(name.as_str(), events);
                changed = true;
            }
        }
        if !changed {
            return known.remove(spec.main()).unwrap_or_default();
        }
    }
}

fn body_alphabet(p: &CspProcess, known: &BTreeMap<&str, BTreeSet<EventName>>) -> BTreeSet<EventName> {
    use CspProcess::*;
    match p {
        Stop | Skip | Omega => BTreeSet::new(),
        Ref(name) => known.get(name.as_str()).cloned().unwrap_or_default(),
        Prefix(e, cont) => {
            let mut out = body_alphabet(cont, known);
            if !e.is_tock() {
                out.insert(e.clone());
            }
            out
        }
        Hide(body, hidden) => body_alphabet(body, known).into_iter().filter(|e| !hidden.contains(e)).collect(),
        Rename(body, map) => body_alphabet(body, known)
            .into_iter()
            .map(|e| map.get(&e).cloned().unwrap_or(e))
            .collect(),
        other => {
            let mut out = BTreeSet::new();
            for c in other.children() {
                out.extend(body_alphabet(c, known));
            }
            out
        }
    }
}

/// The visible non-tock events `p` can perform first, looking through
/// internal steps but not through time or termination.
///
/// ```
/// use tockta::csp::{initials, parse};
///
/// let spec = parse("P = (a -> STOP) |~| (b -> STOP)").unwrap();
/// let first: Vec<String> = initials(spec.main_process(), &spec).iter().map(|e| e.to_string()).collect();
/// assert_eq!(first, ["a", "b"]);
/// ```
pub fn initials(p: &CspProcess, spec: &CspSpec) -> BTreeSet<EventName> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut stack = vec![p.clone()];
    while let Some(current) = stack.pop() {
        if !seen.insert(current.clone()) {
            continue;
        }
        for (action, next) in step(&current, spec) {
            match action {
                Action::Visible(e) => {
                    out.insert(e);
                }
                Action::Tau(_) => stack.push(next),
                Action::Tock | Action::Tick => {}
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(set: &BTreeSet<EventName>) -> Vec<&str> {
        set.iter().map(EventName::as_str).collect()
    }

    #[test]
    fn ads_alphabet() {
        let spec = parse(
            "ADS = Controller [|{close}|] Lighting\n\
             Controller = open -> tock -> close -> Controller\n\
             Lighting = close -> offLight -> Lighting",
        )
        .unwrap();
        assert_eq!(names(&alphabet(&spec)), ["close", "offLight", "open"]);
    }

    #[test]
    fn stop_has_empty_alphabet() {
        assert!(alphabet(&parse("P = STOP").unwrap()).is_empty());
    }

    #[test]
    fn hidden_events_leave_the_alphabet() {
        let spec = parse("P = (a -> b -> STOP) \\ {a}").unwrap();
        assert_eq!(names(&alphabet(&spec)), ["b"]);
    }

    #[test]
    fn initials_of_the_interrupting_side() {
        let spec = parse("P = fire -> close -> STOP").unwrap();
        assert_eq!(names(&initials(spec.main_process(), &spec)), ["fire"]);
        assert!(initials(&CspProcess::Stop, &spec).is_empty());
    }

    #[test]
    fn initials_skip_hidden_and_sequential_steps() {
        let spec = parse("P = ((h -> SKIP) \\ {h}) ; go -> STOP").unwrap();
        assert_eq!(names(&initials(spec.main_process(), &spec)), ["go"]);
        let spec = parse("P = tock -> a -> STOP").unwrap();
        assert!(initials(spec.main_process(), &spec).is_empty());
    }
}
