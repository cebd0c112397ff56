//! Networks of UPPAAL-style timed automata.
//!
//! A [`TimedAutomaton`] is the tuple `(L, l0, C, A, E, I)`: locations, the
//! initial location, local clocks, the channels named on its edges, edges and
//! location invariants. A [`NetworkModel`] adds the global declarations and
//! records which automaton is the environment.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::csp::TOCK;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocationKind {
    Normal,
    Urgent,
    Committed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
            Relation::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "==",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }

    pub fn parse(s: &str) -> Option<Relation> {
        Some(match s {
            "<" => Relation::Lt,
            "<=" => Relation::Le,
            "==" => Relation::Eq,
            ">=" => Relation::Ge,
            ">" => Relation::Gt,
            _ => return None,
        })
    }
}

/// `clock rel value`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ClockAtom {
    pub clock: String,
    pub rel: Relation,
    pub value: i64,
}

impl fmt::Display for ClockAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.clock, self.rel.symbol(), self.value)
    }
}

/// A conjunction of clock atoms, used as a location invariant.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ClockConstraint(pub Vec<ClockAtom>);

impl fmt::Display for ClockConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&atoms.join(" && "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GuardAtom {
    Clock(ClockAtom),
    /// `(v1 + ... + vk) rel value`; a single variable prints without parentheses.
    Linear { vars: Vec<String>, rel: Relation, value: i64 },
}

impl fmt::Display for GuardAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardAtom::Clock(atom) => write!(f, "{atom}"),
            GuardAtom::Linear { vars, rel, value } if vars.len() == 1 => {
                write!(f, "{}{}{}", vars[0], rel.symbol(), value)
            }
            GuardAtom::Linear { vars, rel, value } => write!(f, "({}){}{}", vars.join(" + "), rel.symbol(), value),
        }
    }
}

/// A conjunction of atoms; the empty guard is `true`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Guard(pub Vec<GuardAtom>);

impl Guard {
    pub fn is_true(&self) -> bool {
        self.0.is_empty()
    }

    pub fn linear(vars: &[&str], rel: Relation, value: i64) -> Guard {
        Guard(vec![GuardAtom::Linear { vars: vars.iter().map(|v| v.to_string()).collect(), rel, value }])
    }

    pub fn clock(clock: &str, rel: Relation, value: i64) -> Guard {
        Guard(vec![GuardAtom::Clock(ClockAtom { clock: clock.to_string(), rel, value })])
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let atoms: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&atoms.join(" && "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Send,
    Receive,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SyncLabel {
    pub channel: String,
    pub direction: Direction,
}

impl SyncLabel {
    pub fn send(channel: impl Into<String>) -> Self {
        SyncLabel { channel: channel.into(), direction: Direction::Send }
    }

    pub fn receive(channel: impl Into<String>) -> Self {
        SyncLabel { channel: channel.into(), direction: Direction::Receive }
    }
}

impl fmt::Display for SyncLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = match self.direction {
            Direction::Send => '!',
            Direction::Receive => '?',
        };
        write!(f, "{}{}", self.channel, mark)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Update {
    Assign { var: String, value: i64 },
    Reset { clock: String },
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Update::Assign { var, value } => write!(f, "{var}:={value}"),
            Update::Reset { clock } => write!(f, "{clock}:=0"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub guard: Guard,
    pub sync: Option<SyncLabel>,
    pub updates: Vec<Update>,
}

impl Edge {
    pub fn new(source: &str, target: &str) -> Self {
        Edge {
            source: source.to_string(),
            target: target.to_string(),
            guard: Guard::default(),
            sync: None,
            updates: Vec::new(),
        }
    }

    pub fn with_sync(mut self, sync: SyncLabel) -> Self {
        self.sync = Some(sync);
        self
    }

    pub fn with_guard(mut self, guard: Guard) -> Self {
        self.guard = guard;
        self
    }

    pub fn with_update(mut self, update: Update) -> Self {
        self.updates.push(update);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Location {
    pub id: String,
    pub name: String,
    pub kind: LocationKind,
    pub invariant: Option<ClockConstraint>,
}

impl Location {
    pub fn new(id: &str, kind: LocationKind) -> Self {
        Location { id: id.to_string(), name: id.to_string(), kind, invariant: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedAutomaton {
    pub name: String,
    pub locations: Vec<Location>,
    pub initial: String,
    pub clocks: Vec<String>,
    pub edges: Vec<Edge>,
}

impl TimedAutomaton {
    pub fn new(name: impl Into<String>) -> Self {
        TimedAutomaton {
            name: name.into(),
            locations: vec![Location::new("s0", LocationKind::Normal)],
            initial: "s0".to_string(),
            clocks: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn location(&self, id: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.id == id)
    }

    /// The channels named on this automaton's edges (the `A` component).
    pub fn actions(&self) -> BTreeSet<&str> {
        self.edges.iter().filter_map(|e| e.sync.as_ref()).map(|s| s.channel.as_str()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChannelMode {
    Binary,
    Broadcast,
    UrgentBinary,
}

/// What a channel stands for. Everything except `UserEvent` and
/// `TockChannel` is deleted from traces before comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelKind {
    UserEvent,
    TockChannel,
    Flow,
    Terminating,
    Synchronisation,
    ExtChoiceCoord,
    InterruptCoord,
    ExceptionCoord,
    HiddenItau,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 9] = [
        ChannelKind::UserEvent,
        ChannelKind::TockChannel,
        ChannelKind::Flow,
        ChannelKind::Terminating,
        ChannelKind::Synchronisation,
        ChannelKind::ExtChoiceCoord,
        ChannelKind::InterruptCoord,
        ChannelKind::ExceptionCoord,
        ChannelKind::HiddenItau,
    ];

    pub fn is_erased(self) -> bool {
        !matches!(self, ChannelKind::UserEvent | ChannelKind::TockChannel)
    }

    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::UserEvent => "user",
            ChannelKind::TockChannel => "tock",
            ChannelKind::Flow => "flow",
            ChannelKind::Terminating => "terminating",
            ChannelKind::Synchronisation => "synchronisation",
            ChannelKind::ExtChoiceCoord => "extchoice",
            ChannelKind::InterruptCoord => "interrupt",
            ChannelKind::ExceptionCoord => "exception",
            ChannelKind::HiddenItau => "itau",
        }
    }

    pub fn from_label(label: &str) -> Option<ChannelKind> {
        ChannelKind::ALL.into_iter().find(|k| k.label() == label)
    }

    /// Classification by the reserved naming patterns alone.
    pub fn infer(name: &str) -> ChannelKind {
        if name == TOCK {
            ChannelKind::TockChannel
        } else if name.starts_with("startID") {
            ChannelKind::Flow
        } else if name.starts_with("finishID") {
            ChannelKind::Terminating
        } else if name.starts_with("extID") {
            ChannelKind::ExtChoiceCoord
        } else if name.starts_with("intrpID") {
            ChannelKind::InterruptCoord
        } else if name.starts_with("excpID") {
            ChannelKind::ExceptionCoord
        } else if name.ends_with("___sync") {
            ChannelKind::Synchronisation
        } else if name.starts_with("itau") {
            ChannelKind::HiddenItau
        } else {
            ChannelKind::UserEvent
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelDecl {
    pub name: String,
    pub mode: ChannelMode,
    pub kind: ChannelKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkModel {
    pub automata: Vec<TimedAutomaton>,
    pub channels: Vec<ChannelDecl>,
    pub int_vars: Vec<(String, i64)>,
    pub global_clocks: Vec<String>,
    pub environment: usize,
}

impl NetworkModel {
    pub fn channel(&self, name: &str) -> Option<&ChannelDecl> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn environment_automaton(&self) -> &TimedAutomaton {
        &self.automata[self.environment]
    }

    /// Channel names whose kind is coordinating or hidden: the actions
    /// deleted from every trace before it is compared with the source process.
    pub fn erasure_set(&self) -> BTreeSet<String> {
        self.channels.iter().filter(|c| c.kind.is_erased()).map(|c| c.name.clone()).collect()
    }

    /// Checks every structural invariant; an empty result means the network
    /// is well formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        validate(self)
    }
}

/// One violated invariant, located as precisely as possible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub automaton: Option<String>,
    pub edge: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.automaton, self.edge) {
            (Some(a), Some(e)) => write!(f, "{a}, edge {e}: {}", self.message),
            (Some(a), None) => write!(f, "{a}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

fn validate(net: &NetworkModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let global = |message: String| Diagnostic { automaton: None, edge: None, message };

    let mut names = HashSet::new();
    for c in &net.channels {
        if !names.insert(c.name.as_str()) {
            out.push(global(format!("duplicate channel `{}`", c.name)));
        }
        if c.name == TOCK && c.mode != ChannelMode::Broadcast {
            out.push(global("channel `tock` must be broadcast".into()));
        }
        if c.kind.is_erased() != ChannelKind::infer(&c.name).is_erased() {
            out.push(global(format!(
                "channel `{}` has kind {} but its name says {}",
                c.name,
                c.kind.label(),
                ChannelKind::infer(&c.name).label()
            )));
        }
    }
    let mut vars = HashSet::new();
    for (v, _) in &net.int_vars {
        if !vars.insert(v.as_str()) {
            out.push(global(format!("duplicate variable `{v}`")));
        }
    }
    if net.environment >= net.automata.len() {
        out.push(global("no environment automaton".into()));
    }

    let mut templates = HashSet::new();
    for ta in &net.automata {
        let at = |edge: Option<usize>, message: String| Diagnostic { automaton: Some(ta.name.clone()), edge, message };
        if !templates.insert(ta.name.as_str()) {
            out.push(at(None, "duplicate automaton name".into()));
        }
        let mut ids = HashSet::new();
        for l in &ta.locations {
            if !ids.insert(l.id.as_str()) {
                out.push(at(None, format!("duplicate location `{}`", l.id)));
            }
        }
        if !ids.contains(ta.initial.as_str()) {
            out.push(at(None, format!("initial location `{}` does not exist", ta.initial)));
        }
        let clock_ok = |c: &str| ta.clocks.iter().any(|k| k == c) || net.global_clocks.iter().any(|k| k == c);
        for l in &ta.locations {
            for atom in l.invariant.iter().flat_map(|i| i.0.iter()) {
                if !clock_ok(&atom.clock) {
                    out.push(at(None, format!("invariant of `{}` uses undeclared clock `{}`", l.id, atom.clock)));
                }
                if atom.value < 0 {
                    out.push(at(None, format!("invariant of `{}` compares with a negative constant", l.id)));
                }
            }
        }
        for (i, e) in ta.edges.iter().enumerate() {
            for end in [&e.source, &e.target] {
                if !ids.contains(end.as_str()) {
                    out.push(at(Some(i), format!("unknown location `{end}`")));
                }
            }
            if let Some(sync) = &e.sync {
                if net.channel(&sync.channel).is_none() {
                    out.push(at(Some(i), format!("unresolved channel `{}`", sync.channel)));
                }
            }
            for atom in &e.guard.0 {
                match atom {
                    GuardAtom::Clock(c) => {
                        if !clock_ok(&c.clock) {
                            out.push(at(Some(i), format!("guard uses undeclared clock `{}`", c.clock)));
                        }
                        if c.value < 0 {
                            out.push(at(Some(i), "clock compared with a negative constant".into()));
                        }
                    }
                    GuardAtom::Linear { vars: vs, .. } => {
                        for v in vs {
                            if !vars.contains(v.as_str()) {
                                out.push(at(Some(i), format!("guard uses undeclared variable `{v}`")));
                            }
                        }
                    }
                }
            }
            for u in &e.updates {
                match u {
                    Update::Assign { var, .. } if !vars.contains(var.as_str()) => {
                        out.push(at(Some(i), format!("update of undeclared variable `{var}`")));
                    }
                    Update::Reset { clock } if !clock_ok(clock) => {
                        out.push(at(Some(i), format!("reset of undeclared clock `{clock}`")));
                    }
                    _ => {}
                }
            }
        }
    }
    out
}
