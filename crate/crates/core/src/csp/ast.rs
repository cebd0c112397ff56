use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

/// Name of the distinguished time event.
pub const TOCK: &str = "tock";

/// Prefixes reserved for generated coordinating channels.
pub const RESERVED_PREFIXES: [&str; 6] = ["startID", "finishID", "extID", "intrpID", "excpID", "itau"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NameError {
    #[error("`{0}` is not an identifier (letters, digits, underscore; must start with a letter)")]
    Malformed(String),
    #[error("`{0}` is reserved and cannot be used as an event")]
    Reserved(String),
}

/// An event identifier. `tock` is accepted (it may be prefixed) but every
/// name the translator generates for coordination is rejected.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventName(String);

impl EventName {
    pub fn new(name: impl Into<String>) -> Result<Self, NameError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(NameError::Malformed(name));
        }
        if is_reserved_event(&name) {
            return Err(NameError::Reserved(name));
        }
        Ok(EventName(name))
    }

    pub fn tock() -> Self {
        EventName(TOCK.to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_tock(&self) -> bool {
        self.0 == TOCK
    }
}

impl fmt::Display for EventName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// `tau`, `itau*`, the coordinating prefixes, anything containing a triple
/// underscore (used by synchronisation channels) and the process keywords.
pub fn is_reserved_event(name: &str) -> bool {
    name == "tau"
        || name == "STOP"
        || name == "SKIP"
        || name.contains("___")
        || RESERVED_PREFIXES.iter().any(|p| name.starts_with(p))
}

/// Abstract syntax of the supported tock-CSP subset.
///
/// `Omega` is the successfully terminated process. It never comes out of the
/// parser; the operational semantics produces it after a termination step.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CspProcess {
    Stop,
    Skip,
    Prefix(EventName, Box<CspProcess>),
    Seq(Box<CspProcess>, Box<CspProcess>),
    GenPar(Box<CspProcess>, Box<CspProcess>, BTreeSet<EventName>),
    Interleave(Box<CspProcess>, Box<CspProcess>),
    ExtChoice(Box<CspProcess>, Box<CspProcess>),
    IntChoice(Box<CspProcess>, Box<CspProcess>),
    Interrupt(Box<CspProcess>, Box<CspProcess>),
    Hide(Box<CspProcess>, BTreeSet<EventName>),
    Rename(Box<CspProcess>, BTreeMap<EventName, EventName>),
    Ref(String),
    Omega,
}

/// Shorthand constructors, mostly for tests and the corpus generator.
impl CspProcess {
    pub fn prefix(event: &str, cont: CspProcess) -> Self {
        let event = if event == TOCK {
            EventName::tock()
        } else {
            EventName::new(event).expect("valid event name")
        };
        CspProcess::Prefix(event, Box::new(cont))
    }

    pub fn seq(l: CspProcess, r: CspProcess) -> Self {
        CspProcess::Seq(Box::new(l), Box::new(r))
    }

    pub fn gen_par(l: CspProcess, r: CspProcess, sync: &[&str]) -> Self {
        CspProcess::GenPar(Box::new(l), Box::new(r), event_set(sync))
    }

    pub fn interleave(l: CspProcess, r: CspProcess) -> Self {
        CspProcess::Interleave(Box::new(l), Box::new(r))
    }

    pub fn ext_choice(l: CspProcess, r: CspProcess) -> Self {
        CspProcess::ExtChoice(Box::new(l), Box::new(r))
    }

    pub fn int_choice(l: CspProcess, r: CspProcess) -> Self {
        CspProcess::IntChoice(Box::new(l), Box::new(r))
    }

    pub fn interrupt(l: CspProcess, r: CspProcess) -> Self {
        CspProcess::Interrupt(Box::new(l), Box::new(r))
    }

    pub fn hide(p: CspProcess, hidden: &[&str]) -> Self {
        CspProcess::Hide(Box::new(p), event_set(hidden))
    }

    pub fn rename(p: CspProcess, map: &[(&str, &str)]) -> Self {
        let map = map
            .iter()
            .map(|(a, b)| (EventName::new(*a).unwrap(), EventName::new(*b).unwrap()))
            .collect();
        CspProcess::Rename(Box::new(p), map)
    }

    pub fn reference(name: &str) -> Self {
        CspProcess::Ref(name.to_string())
    }

    /// Immediate sub-processes, left to right.
    pub fn children(&self) -> Vec<&CspProcess> {
        use CspProcess::*;
        match self {
            Stop | Skip | Ref(_) | Omega => vec![],
            Prefix(_, p) | Hide(p, _) | Rename(p, _) => vec![p],
            Seq(l, r) | GenPar(l, r, _) | Interleave(l, r) | ExtChoice(l, r) | IntChoice(l, r)
            | Interrupt(l, r) => vec![l, r],
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }
}

fn event_set(names: &[&str]) -> BTreeSet<EventName> {
    names.iter().map(|n| EventName::new(*n).expect("valid event name")).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("reference to undefined process `{name}` in definition of `{within}`")]
    Unresolved { name: String, within: String },
    #[error("unguarded recursion through {cycle:?}")]
    Unguarded { cycle: Vec<String> },
    #[error("`tock` may not appear in a {context} set")]
    TockInSet { context: &'static str },
    #[error("renaming maps `{0}` twice")]
    DuplicateRename(String),
    #[error("main process `{0}` is not defined")]
    MissingMain(String),
    #[error("process `{0}` is defined twice")]
    DuplicateDefinition(String),
    #[error("the internal terminated state cannot appear in a specification")]
    Omega,
}

/// A closed set of named process definitions with a distinguished main process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspSpec {
    definitions: IndexMap<String, CspProcess>,
    main: String,
}

impl CspSpec {
    /// Checks closure, guardedness and the set invariants.
    pub fn new(definitions: IndexMap<String, CspProcess>, main: impl Into<String>) -> Result<Self, SpecError> {
        let main = main.into();
        if !definitions.contains_key(&main) {
            return Err(SpecError::MissingMain(main));
        }
        let spec = CspSpec { definitions, main };
        for (name, body) in &spec.definitions {
            check_body(name, body, &spec.definitions)?;
        }
        if let Some(cycle) = spec.unguarded_cycle() {
            return Err(SpecError::Unguarded { cycle });
        }
        Ok(spec)
    }

    /// A one-definition spec named `P`.
    pub fn single(body: CspProcess) -> Result<Self, SpecError> {
        Self::single_named("P", body)
    }

    pub fn single_named(name: &str, body: CspProcess) -> Result<Self, SpecError> {
        let mut defs = IndexMap::new();
        defs.insert(name.to_string(), body);
        CspSpec::new(defs, name)
    }

    pub fn main(&self) -> &str {
        &self.main
    }

    pub fn main_process(&self) -> &CspProcess {
        &self.definitions[&self.main]
    }

    pub fn definitions(&self) -> &IndexMap<String, CspProcess> {
        &self.definitions
    }

    pub fn get(&self, name: &str) -> Option<&CspProcess> {
        self.definitions.get(name)
    }

    /// Finds a cycle of definitions that can be re-entered without passing a prefix.
    fn unguarded_cycle(&self) -> Option<Vec<String>> {
        let names: Vec<&String> = self.definitions.keys().collect();
        let edges: Vec<Vec<usize>> = names
            .iter()
            .map(|n| {
                let mut refs = BTreeSet::new();
                unguarded_refs(&self.definitions[*n], &mut refs);
                refs.iter().filter_map(|r| self.definitions.get_index_of(r)).collect()
            })
            .collect();
        // colour-based DFS
        let mut colour = vec![0u8; names.len()];
        let mut path = Vec::new();
        fn dfs(v: usize, edges: &[Vec<usize>], colour: &mut [u8], path: &mut Vec<usize>) -> Option<Vec<usize>> {
            colour[v] = 1;
            path.push(v);
            for &w in &edges[v] {
                if colour[w] == 1 {
                    let start = path.iter().position(|&x| x == w).unwrap();
                    return Some(path[start..].to_vec());
                }
                if colour[w] == 0 {
                    if let Some(c) = dfs(w, edges, colour, path) {
                        return Some(c);
                    }
                }
            }
            path.pop();
            colour[v] = 2;
            None
        }
        for v in 0..names.len() {
            if colour[v] == 0 {
                if let Some(cycle) = dfs(v, &edges, &mut colour, &mut path) {
                    return Some(cycle.into_iter().map(|i| names[i].clone()).collect());
                }
            }
        }
        None
    }
}

/// References reachable without passing through a prefix.
fn unguarded_refs(p: &CspProcess, out: &mut BTreeSet<String>) {
    match p {
        CspProcess::Ref(n) => {
            out.insert(n.clone());
        }
        CspProcess::Prefix(..) => {}
        other => other.children().into_iter().for_each(|c| unguarded_refs(c, out)),
    }
}

fn check_body(within: &str, p: &CspProcess, defs: &IndexMap<String, CspProcess>) -> Result<(), SpecError> {
    match p {
        CspProcess::Ref(name) if !defs.contains_key(name) => {
            return Err(SpecError::Unresolved { name: name.clone(), within: within.to_string() })
        }
        CspProcess::GenPar(_, _, sync) if sync.iter().any(EventName::is_tock) => {
            return Err(SpecError::TockInSet { context: "synchronisation" })
        }
        CspProcess::Hide(_, hidden) if hidden.iter().any(EventName::is_tock) => {
            return Err(SpecError::TockInSet { context: "hiding" })
        }
        CspProcess::Rename(_, map) if map.iter().any(|(a, b)| a.is_tock() || b.is_tock()) => {
            return Err(SpecError::TockInSet { context: "renaming" })
        }
        CspProcess::Omega => return Err(SpecError::Omega),
        _ => {}
    }
    p.children().into_iter().try_for_each(|c| check_body(within, c, defs))
}
