//! Discrete-time execution of timed-automata networks.
//!
//! Time advances in unit steps ([`NetStep::TimeTick`]). Every clock
//! comparison in a model is against an integer constant, so a clock that has
//! grown past the largest constant behaves the same however much larger it
//! gets; clocks are therefore capped at that constant plus one, which keeps
//! the configuration space finite.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::explore::{bounded_traces, reachable_states, BoundExceeded, Limits, Move, TransitionSystem};
use crate::ta::{ChannelMode, Direction, GuardAtom, LocationKind, NetworkModel, Relation, Update};
use crate::trace::TraceSet;

/// A global state: one location per automaton plus all variable and clock values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    /// Location index per automaton, in the order of `NetworkModel::locations`.
    pub locations: Vec<u32>,
    pub ints: Vec<i64>,
    pub clocks: Vec<u32>,
}

/// One network transition. Automata and edges are referenced by index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NetStep {
    Silent { automaton: usize, edge: usize },
    Binary { sender: (usize, usize), receiver: (usize, usize), channel: usize },
    Broadcast { sender: (usize, usize), receivers: Vec<(usize, usize)>, channel: usize },
    TimeTick,
}

impl NetStep {
    pub fn channel(&self) -> Option<usize> {
        match self {
            NetStep::Binary { channel, .. } | NetStep::Broadcast { channel, .. } => Some(*channel),
            _ => None,
        }
    }

    fn participants(&self) -> Vec<usize> {
        match self {
            NetStep::Silent { automaton, .. } => vec![*automaton],
            NetStep::Binary { sender, receiver, .. } => vec![sender.0, receiver.0],
            NetStep::Broadcast { sender, receivers, .. } => {
                std::iter::once(sender.0).chain(receivers.iter().map(|r| r.0)).collect()
            }
            NetStep::TimeTick => vec![],
        }
    }
}

#[derive(Clone, Debug)]
enum Atom {
    Clock(usize, Relation, i64),
    Linear(Vec<usize>, Relation, i64),
}

#[derive(Clone, Debug)]
enum Effect {
    Assign(usize, i64),
    Reset(usize),
}

#[derive(Clone, Debug)]
struct CEdge {
    target: u32,
    guard: Vec<Atom>,
    sync: Option<(usize, Direction)>,
    effects: Vec<Effect>,
}

#[derive(Clone, Debug)]
struct CAutomaton {
    kinds: Vec<LocationKind>,
    invariants: Vec<Vec<(usize, Relation, i64)>>,
    initial: u32,
    edges: Vec<CEdge>,
    outgoing: Vec<Vec<usize>>,
}

/// A network compiled to index form for fast stepping.
#[derive(Clone, Debug)]
pub struct Executor<'a> {
    net: &'a NetworkModel,
    automata: Vec<CAutomaton>,
    modes: Vec<ChannelMode>,
    var_init: Vec<i64>,
    clock_count: usize,
    clock_cap: u32,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("cannot execute network: {0}")]
pub struct ExecError(pub String);

impl<'a> Executor<'a> {
    pub fn new(net: &'a NetworkModel) -> Result<Self, ExecError> {
        let chan_index: HashMap<&str, usize> = net.channels.iter().enumerate().map(|(i, c)| (c.name.as_str(), i)).collect();
        let var_index: HashMap<&str, usize> = net.int_vars.iter().enumerate().map(|(i, v)| (v.0.as_str(), i)).collect();
        let mut clock_count = net.global_clocks.len();
        let mut max_const = 0i64;
        let mut automata = Vec::new();
        for ta in &net.automata {
            let mut clocks: HashMap<&str, usize> = net.global_clocks.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
            for c in &ta.clocks {
                clocks.insert(c, clock_count);
                clock_count += 1;
            }
            let loc_index: HashMap<&str, u32> =
                ta.locations.iter().enumerate().map(|(i, l)| (l.id.as_str(), i as u32)).collect();
            let err = |what: String| ExecError(format!("{}: {what}", ta.name));
            let loc = |id: &str| loc_index.get(id).copied().ok_or_else(|| err(format!("unknown location `{id}`")));
            let clock = |c: &str| clocks.get(c).copied().ok_or_else(|| err(format!("unknown clock `{c}`")));
            let mut invariants = Vec::new();
            for l in &ta.locations {
                let mut inv = Vec::new();
                for a in l.invariant.iter().flat_map(|i| i.0.iter()) {
                    max_const = max_const.max(a.value);
                    inv.push((clock(&a.clock)?, a.rel, a.value));
                }
                invariants.push(inv);
            }
            let mut edges = Vec::new();
            let mut outgoing = vec![Vec::new(); ta.locations.len()];
            for e in &ta.edges {
                let mut guard = Vec::new();
                for atom in &e.guard.0 {
                    guard.push(match atom {
                        GuardAtom::Clock(a) => {
                            max_const = max_const.max(a.value);
                            Atom::Clock(clock(&a.clock)?, a.rel, a.value)
                        }
                        GuardAtom::Linear { vars, rel, value } => {
                            let idx = vars
                                .iter()
                                .map(|v| var_index.get(v.as_str()).copied().ok_or_else(|| err(format!("unknown variable `{v}`"))))
                                .collect::<Result<Vec<_>, _>>()?;
                            Atom::Linear(idx, *rel, *value)
                        }
                    });
                }
                let sync = match &e.sync {
                    Some(s) => Some((
                        *chan_index.get(s.channel.as_str()).ok_or_else(|| err(format!("unknown channel `{}`", s.channel)))?,
                        s.direction,
                    )),
                    None => None,
                };
                let mut effects = Vec::new();
                for u in &e.updates {
                    effects.push(match u {
                        Update::Assign { var, value } => Effect::Assign(
                            *var_index.get(var.as_str()).ok_or_else(|| err(format!("unknown variable `{var}`")))?,
                            *value,
                        ),
                        Update::Reset { clock: c } => Effect::Reset(clock(c)?),
                    });
                }
                outgoing[loc(&e.source)? as usize].push(edges.len());
                edges.push(CEdge { target: loc(&e.target)?, guard, sync, effects });
            }
            automata.push(CAutomaton {
                kinds: ta.locations.iter().map(|l| l.kind).collect(),
                invariants,
                initial: loc(&ta.initial)?,
                edges,
                outgoing,
            });
        }
        Ok(Executor {
            net,
            automata,
            modes: net.channels.iter().map(|c| c.mode).collect(),
            var_init: net.int_vars.iter().map(|v| v.1).collect(),
            clock_count,
            clock_cap: (max_const.max(0) + 1) as u32,
        })
    }

    pub fn network(&self) -> &NetworkModel {
        self.net
    }

    pub fn initial(&self) -> Configuration {
        Configuration {
            locations: self.automata.iter().map(|a| a.initial).collect(),
            ints: self.var_init.clone(),
            clocks: vec![0; self.clock_count],
        }
    }

    /// The display name of the location automaton `a` occupies.
    pub fn location_name(&self, cfg: &Configuration, a: usize) -> &str {
        &self.net.automata[a].locations[cfg.locations[a] as usize].id
    }

    pub fn channel_name(&self, channel: usize) -> &str {
        &self.net.channels[channel].name
    }

    fn guard_holds(&self, cfg: &Configuration, guard: &[Atom]) -> bool {
        guard.iter().all(|atom| match atom {
            Atom::Clock(c, rel, v) => rel.holds(cfg.clocks[*c] as i64, *v),
            Atom::Linear(vars, rel, v) => rel.holds(vars.iter().map(|i| cfg.ints[*i]).sum(), *v),
        })
    }

    fn invariant_holds(&self, a: usize, loc: u32, clocks: &[u32]) -> bool {
        self.automata[a].invariants[loc as usize].iter().all(|(c, rel, v)| rel.holds(clocks[*c] as i64, *v))
    }

    /// Edges of automaton `a` whose guard holds in `cfg`.
    fn enabled_edges(&self, cfg: &Configuration, a: usize) -> impl Iterator<Item = (usize, &CEdge)> + '_ {
        let auto = &self.automata[a];
        let cfg = cfg.clone();
        auto.outgoing[cfg.locations[a] as usize]
            .iter()
            .map(move |&i| (i, &auto.edges[i]))
            .filter(move |(_, e)| self.guard_holds(&cfg, &e.guard))
    }

    /// Every step the network can take from `cfg`.
    pub fn enabled_steps(&self, cfg: &Configuration) -> Vec<NetStep> {
        let n = self.automata.len();
        let mut sends: Vec<(usize, usize, usize)> = Vec::new();
        let mut receives: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        let mut steps = Vec::new();
        for a in 0..n {
            for (i, e) in self.enabled_edges(cfg, a) {
                match e.sync {
                    None => steps.push(NetStep::Silent { automaton: a, edge: i }),
                    Some((c, Direction::Send)) => sends.push((a, i, c)),
                    Some((c, Direction::Receive)) => receives.entry(c).or_default().push((a, i)),
                }
            }
        }
        let mut urgent_pair = false;
        for &(a, i, c) in &sends {
            let empty = Vec::new();
            let recv = receives.get(&c).unwrap_or(&empty);
            match self.modes[c] {
                ChannelMode::Binary | ChannelMode::UrgentBinary => {
                    for &(b, j) in recv.iter().filter(|(b, _)| *b != a) {
                        urgent_pair |= self.modes[c] == ChannelMode::UrgentBinary;
                        steps.push(NetStep::Binary { sender: (a, i), receiver: (b, j), channel: c });
                    }
                }
                ChannelMode::Broadcast => {
                    // one enabled receive edge from every automaton that has any
                    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
                    for b in (0..n).filter(|b| *b != a) {
                        let mine: Vec<(usize, usize)> = recv.iter().copied().filter(|r| r.0 == b).collect();
                        if !mine.is_empty() {
                            groups.push(mine);
                        }
                    }
                    let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
                    for g in groups {
                        combos = combos
                            .into_iter()
                            .flat_map(|prefix| {
                                g.iter().map(move |r| {
                                    let mut next = prefix.clone();
                                    next.push(*r);
                                    next
                                })
                            })
                            .collect();
                    }
                    for receivers in combos {
                        steps.push(NetStep::Broadcast { sender: (a, i), receivers, channel: c });
                    }
                }
            }
        }
        let committed: Vec<bool> = (0..n)
            .map(|a| self.automata[a].kinds[cfg.locations[a] as usize] == LocationKind::Committed)
            .collect();
        if committed.iter().any(|c| *c) {
            steps.retain(|s| s.participants().iter().any(|a| committed[*a]));
            return steps;
        }
        let urgent = (0..n).any(|a| self.automata[a].kinds[cfg.locations[a] as usize] == LocationKind::Urgent);
        if !urgent && !urgent_pair {
            let ticked = self.ticked_clocks(&cfg.clocks);
            if (0..n).all(|a| self.invariant_holds(a, cfg.locations[a], &ticked)) {
                steps.push(NetStep::TimeTick);
            }
        }
        steps
    }

    fn ticked_clocks(&self, clocks: &[u32]) -> Vec<u32> {
        clocks.iter().map(|c| (c + 1).min(self.clock_cap)).collect()
    }

    fn fire(&self, cfg: &mut Configuration, (a, i): (usize, usize)) {
        let edge = &self.automata[a].edges[i];
        cfg.locations[a] = edge.target;
        for eff in &edge.effects {
            match eff {
                Effect::Assign(v, value) => cfg.ints[*v] = *value,
                Effect::Reset(c) => cfg.clocks[*c] = 0,
            }
        }
    }

    /// Performs `step`; the sender's updates come before the receivers'.
    pub fn apply_step(&self, cfg: &Configuration, step: &NetStep) -> Configuration {
        let mut next = cfg.clone();
        match step {
            NetStep::Silent { automaton, edge } => self.fire(&mut next, (*automaton, *edge)),
            NetStep::Binary { sender, receiver, .. } => {
                self.fire(&mut next, *sender);
                self.fire(&mut next, *receiver);
            }
            NetStep::Broadcast { sender, receivers, .. } => {
                self.fire(&mut next, *sender);
                for r in receivers {
                    self.fire(&mut next, *r);
                }
            }
            NetStep::TimeTick => next.clocks = self.ticked_clocks(&cfg.clocks),
        }
        next
    }

    /// Searches at most `max_steps` transitions ahead of `cfg` for a
    /// configuration in which time can pass.
    pub fn time_can_progress(&self, cfg: &Configuration, max_steps: usize) -> bool {
        let mut seen = HashSet::from([cfg.clone()]);
        let mut queue = VecDeque::from([(cfg.clone(), 0usize)]);
        while let Some((current, dist)) = queue.pop_front() {
            let steps = self.enabled_steps(&current);
            if steps.contains(&NetStep::TimeTick) {
                return true;
            }
            if dist == max_steps {
                continue;
            }
            for s in steps {
                let next = self.apply_step(&current, &s);
                if seen.insert(next.clone()) {
                    queue.push_back((next, dist + 1));
                }
            }
        }
        false
    }
}

struct NetLts<'e, 'n> {
    exec: &'e Executor<'n>,
    hidden: Vec<bool>,
}

impl TransitionSystem for NetLts<'_, '_> {
    type State = Configuration;

    fn initial(&self) -> Configuration {
        self.exec.initial()
    }

    fn moves(&self, state: &Configuration) -> Vec<Move<Configuration>> {
        self.exec
            .enabled_steps(state)
            .into_iter()
            .map(|s| {
                let label = s.channel().filter(|c| !self.hidden[*c]).map(|c| self.exec.channel_name(c).to_string());
                (label, self.exec.apply_step(state, &s))
            })
            .collect()
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Bound(#[from] BoundExceeded),
}

fn lts<'e, 'n>(exec: &'e Executor<'n>, hidden: &BTreeSet<String>) -> NetLts<'e, 'n> {
    NetLts { exec, hidden: exec.net.channels.iter().map(|c| hidden.contains(&c.name)).collect() }
}

/// Traces over every channel name, coordinating ones included.
///
/// ```
/// use tockta::csp::parse;
/// use tockta::exec::traces_ta_prime;
/// use tockta::translate::{assemble_with, AssembleOptions};
///
/// let spec = parse("P = STOP").unwrap();
/// let net = assemble_with(&spec, &AssembleOptions { root_start: Some("startID0_0".into()) }).unwrap();
/// let traces = traces_ta_prime(&net, 2).unwrap();
/// assert_eq!(traces.to_canonical_text(), "<>\nstartID0_0\nstartID0_0,tock\n");
/// ```
pub fn traces_ta_prime(net: &NetworkModel, depth: usize) -> Result<TraceSet, TraceError> {
    traces_hiding(net, depth, &BTreeSet::new(), Limits::default())
}

/// Traces with every coordinating and hidden action deleted.
pub fn traces_ta(net: &NetworkModel, depth: usize) -> Result<TraceSet, TraceError> {
    traces_ta_with(net, depth, Limits::default())
}

pub fn traces_ta_with(net: &NetworkModel, depth: usize, limits: Limits) -> Result<TraceSet, TraceError> {
    traces_hiding(net, depth, &net.erasure_set(), limits)
}

/// Traces in which the channels in `hidden` count as internal moves. Exact:
/// the bound applies to the remaining actions only.
pub fn traces_hiding(
    net: &NetworkModel,
    depth: usize,
    hidden: &BTreeSet<String>,
    limits: Limits,
) -> Result<TraceSet, TraceError> {
    let exec = Executor::new(net)?;
    Ok(bounded_traces(&lts(&exec, hidden), depth, limits)?)
}

/// Configurations reachable within `depth` non-erased actions.
pub fn reachable_configurations(net: &NetworkModel, depth: usize, limits: Limits) -> Result<Vec<Configuration>, TraceError> {
    let exec = Executor::new(net)?;
    Ok(reachable_states(&lts(&exec, &net.erasure_set()), depth, limits)?)
}

/// The largest number of erased actions that can occur in a row between two
/// observable ones, over all configurations reachable within `depth`
/// observable actions. `None` if a cycle of erased actions makes it unbounded.
pub fn erased_run_bound(net: &NetworkModel, depth: usize, limits: Limits) -> Result<Option<usize>, TraceError> {
    let exec = Executor::new(net)?;
    let system = lts(&exec, &net.erasure_set());
    let nodes = reachable_states(&system, depth, limits)?;
    let index: HashMap<&Configuration, usize> = nodes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    // invisible edges with weight 1 for erased channel actions
    let mut graph: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
    for (i, cfg) in nodes.iter().enumerate() {
        for s in exec.enabled_steps(cfg) {
            let visible = s.channel().is_some_and(|c| !system.hidden[c]);
            if visible {
                continue;
            }
            let next = exec.apply_step(cfg, &s);
            let w = usize::from(s.channel().is_some());
            if let Some(&j) = index.get(&next) {
                graph[i].push((j, w));
            }
        }
    }
    let comp = strongly_connected(&graph);
    for (i, edges) in graph.iter().enumerate() {
        if edges.iter().any(|&(j, w)| w == 1 && comp[i] == comp[j]) {
            return Ok(None);
        }
    }
    // longest path over the condensation; component ids come out in reverse
    // topological order
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (i, c) in comp.iter().enumerate() {
        members[*c].push(i);
    }
    let mut best = vec![0usize; ncomp];
    for c in 0..ncomp {
        for &i in &members[c] {
            for &(j, w) in &graph[i] {
                if comp[j] != c {
                    best[c] = best[c].max(best[comp[j]] + w);
                }
            }
        }
    }
    Ok(Some(best.into_iter().max().unwrap_or(0)))
}

/// Tarjan's algorithm, iterative. Components are numbered in the order they
/// are completed, which is a reverse topological order.
fn strongly_connected(graph: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let n = graph.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut counter = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut work = vec![(root, 0usize)];
        while let Some((v, pos)) = work.pop() {
            if pos == 0 {
                index[v] = counter;
                low[v] = counter;
                counter += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if pos < graph[v].len() {
                work.push((v, pos + 1));
                let w = graph[v][pos].0;
                if index[w] == usize::MAX {
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().unwrap();
                    on_stack[w] = false;
                    comp[w] = ncomp;
                    if w == v {
                        break;
                    }
                }
                ncomp += 1;
            }
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
        }
    }
    comp
}
