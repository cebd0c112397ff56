//! Compilation of tock-CSP specifications into timed-automata networks.
//!
//! Every event occurrence becomes its own small automaton. Automata hand
//! control to each other over generated *coordinating* channels:
//!
//! * `startID<branch>_<n>` starts a sub-process (flow),
//! * `finishID<branch>_<n>` reports its termination,
//! * `extID<branch>_<n>` / `intrpID<branch>_<n>` stop the losing side of an
//!   external choice or an interrupted process,
//! * `<event>___sync` releases the participants of a multi-party event,
//! * `itau_<event>` carries a hidden event.
//!
//! Each automaton waits in its initial location `s0` until started and goes
//! back there once it has handed control on, so a recursive reference can
//! simply start the referenced definition again. Transient locations are
//! committed, which makes a chain of coordinating actions atomic.
//!
//! A separate environment automaton starts the network, accepts every
//! visible event and broadcasts `tock` once per time unit.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use indexmap::IndexMap;
use thiserror::Error;

use crate::csp::{alphabet, CspProcess, CspSpec, TOCK};
use crate::ta::{
    ChannelDecl, ChannelKind, ChannelMode, Direction, Edge, Guard, Location, LocationKind, NetworkModel, Relation,
    SyncLabel, TimedAutomaton, Update,
};

pub const ENVIRONMENT_NAME: &str = "Environment";
pub const ROOT_FINISH: &str = "finishID0";
pub const START_VAR: &str = "start";
pub const ENV_CLOCK: &str = "ck";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("not implemented: {0}")]
    Unsupported(String),
    #[error("recursion through `{name}` is not supported: {reason}")]
    UnsupportedRecursion { name: String, reason: String },
    #[error("undefined process `{0}`")]
    Undefined(String),
    #[error("internal translation error: {0}")]
    Internal(String),
}

/// Names handed to the translation of one (sub-)process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationContext {
    pub proc_name: String,
    pub branch: String,
    pub start: String,
    pub finish: String,
}

impl TranslationContext {
    pub fn root(spec: &CspSpec) -> Self {
        TranslationContext {
            proc_name: spec.main().to_string(),
            branch: "0".to_string(),
            start: format!("startID{}", spec.main()),
            finish: ROOT_FINISH.to_string(),
        }
    }
}

/// A multi-party event: fires once every participant is ready.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyncRequirement {
    /// The action reported to the environment (`itau_<e>` if hidden).
    pub event: String,
    /// Broadcast channel that releases the participants.
    pub channel: String,
    /// Readiness variables, one per participating automaton.
    pub participants: Vec<String>,
    /// Kill channels to broadcast after the release.
    pub kills: Vec<String>,
}

/// Result of [`trans_ta`]: the component automata plus everything they declare.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Translation {
    pub automata: Vec<TimedAutomaton>,
    pub requirements: Vec<SyncRequirement>,
    pub channels: Vec<ChannelDecl>,
    pub int_vars: Vec<String>,
    /// Actions the components send to the environment.
    pub emitted: BTreeSet<String>,
}

#[derive(Clone, Debug, Default)]
pub struct AssembleOptions {
    /// Overrides the root start channel (default `startID<main>`).
    pub root_start: Option<String>,
}

/// Translates the main process and closes the network with the
/// synchronisation and environment automata.
///
/// ```
/// use tockta::csp::parse;
/// use tockta::translate::assemble;
///
/// let spec = parse("Pe = (left->STOP)[](right->STOP)").unwrap();
/// let net = assemble(&spec).unwrap();
/// assert_eq!(net.automata.len(), 6);
/// assert!(net.validate().is_empty());
/// ```
pub fn assemble(spec: &CspSpec) -> Result<NetworkModel, TranslateError> {
    assemble_with(spec, &AssembleOptions::default())
}

pub fn assemble_with(spec: &CspSpec, options: &AssembleOptions) -> Result<NetworkModel, TranslateError> {
    let mut ctx = TranslationContext::root(spec);
    if let Some(start) = &options.root_start {
        ctx.start = start.clone();
    }
    let tr = trans_ta(spec, spec.main_process(), &ctx)?;
    let mut automata = tr.automata;
    if !tr.requirements.is_empty() {
        let name = format!("TA{:02}", automata.len());
        let mut sync = build_sync_ta(&tr.requirements);
        sync.name = name;
        automata.push(sync);
    }
    let mut events: BTreeSet<String> = alphabet(spec).iter().map(|e| e.to_string()).collect();
    events.extend(tr.emitted.iter().cloned());
    automata.push(build_environment_ta(&events, &ctx.start, &ctx.finish));

    let mut channels = vec![ChannelDecl { name: TOCK.into(), mode: ChannelMode::Broadcast, kind: ChannelKind::TockChannel }];
    let root_start = ChannelDecl { name: ctx.start.clone(), mode: ChannelMode::UrgentBinary, kind: ChannelKind::Flow };
    channels.push(root_start);
    for c in tr.channels {
        if c.name != ctx.start && c.name != ctx.finish && !events.contains(&c.name) {
            channels.push(c);
        }
    }
    channels.push(ChannelDecl { name: ctx.finish.clone(), mode: ChannelMode::Binary, kind: ChannelKind::Terminating });
    for e in &events {
        channels.push(ChannelDecl { name: e.clone(), mode: ChannelMode::Binary, kind: ChannelKind::infer(e) });
    }
    let mut int_vars = vec![(START_VAR.to_string(), 0)];
    int_vars.extend(tr.int_vars.into_iter().map(|v| (v, 0)));
    let environment = automata.len() - 1;
    Ok(NetworkModel { automata, channels, int_vars, global_clocks: Vec::new(), environment })
}

/// The closing automaton: one location, a receive loop per event, the
/// one-shot start, the root finish and the timed `tock` broadcast.
pub fn build_environment_ta(events: &BTreeSet<String>, start: &str, finish: &str) -> TimedAutomaton {
    let mut env = TimedAutomaton::new(ENVIRONMENT_NAME);
    env.clocks.push(ENV_CLOCK.to_string());
    for e in events {
        env.edges.push(Edge::new("s0", "s0").with_sync(SyncLabel::receive(e.as_str())));
    }
    env.edges.push(
        Edge::new("s0", "s0")
            .with_guard(Guard::linear(&[START_VAR], Relation::Eq, 0))
            .with_sync(SyncLabel::send(start))
            .with_update(Update::Assign { var: START_VAR.into(), value: 1 }),
    );
    env.edges.push(Edge::new("s0", "s0").with_sync(SyncLabel::receive(finish)));
    env.edges.push(
        Edge::new("s0", "s0")
            .with_guard(Guard::clock(ENV_CLOCK, Relation::Ge, 1))
            .with_sync(SyncLabel::send(TOCK))
            .with_update(Update::Reset { clock: ENV_CLOCK.into() }),
    );
    env
}

/// The controller of multi-party events. For each requirement it waits
/// until all readiness variables are set, reports the event, releases the
/// participants and then stops any choice the event resolved.
///
/// ```
/// use tockta::translate::{build_sync_ta, SyncRequirement};
///
/// let ta = build_sync_ta(&[SyncRequirement {
///     event: "close".into(),
///     channel: "close___sync".into(),
///     participants: vec!["g_close00_3".into(), "g_close01_2".into()],
///     kills: vec![],
/// }]);
/// assert_eq!(ta.edges[0].guard.to_string(), "(g_close00_3 + g_close01_2)==2");
/// assert_eq!(ta.edges[1].sync.as_ref().unwrap().to_string(), "close___sync!");
/// ```
pub fn build_sync_ta(reqs: &[SyncRequirement]) -> TimedAutomaton {
    let mut ta = TimedAutomaton::new("Sync");
    let mut next = 1;
    let mut fresh = |ta: &mut TimedAutomaton| {
        let id = format!("s{next}");
        next += 1;
        ta.locations.push(Location::new(&id, LocationKind::Committed));
        id
    };
    for req in reqs {
        let vars: Vec<&str> = req.participants.iter().map(String::as_str).collect();
        let ready = fresh(&mut ta);
        ta.edges.push(
            Edge::new("s0", &ready)
                .with_guard(Guard::linear(&vars, Relation::Eq, vars.len() as i64))
                .with_sync(SyncLabel::send(req.event.as_str())),
        );
        let mut at = ready;
        let mut chain: Vec<&str> = vec![req.channel.as_str()];
        chain.extend(req.kills.iter().map(String::as_str));
        for (i, ch) in chain.iter().enumerate() {
            let target = if i + 1 == chain.len() { "s0".to_string() } else { fresh(&mut ta) };
            ta.edges.push(Edge::new(&at, &target).with_sync(SyncLabel::send(*ch)));
            at = target;
        }
    }
    ta
}

/// Translates `p` under `ctx`. The result is closed except for `ctx.start`
/// (received by the first automaton), `ctx.finish` (sent on termination)
/// and the emitted actions.
pub fn trans_ta(spec: &CspSpec, p: &CspProcess, ctx: &TranslationContext) -> Result<Translation, TranslateError> {
    let mut tr = Translator::new(spec);
    let root = Ctx {
        branch: ctx.branch.clone(),
        start: ctx.start.clone(),
        finish: ctx.finish.clone(),
        layer: None,
        resolved: BTreeSet::new(),
    };
    tr.frames.push(Frame { name: ctx.proc_name.clone(), start: ctx.start.clone(), finish: ctx.finish.clone(), layer: None });
    tr.translate(p, &root)?;
    tr.finish()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RaceKind {
    Choice,
    Interrupt,
}

#[derive(Clone, Debug)]
enum Layer {
    Par { id: usize, side: usize, sync: BTreeSet<String> },
    Race { id: usize, side: usize, kind: RaceKind },
    Hide(BTreeSet<String>),
    Rename(BTreeMap<String, String>),
}

#[derive(Clone, Debug)]
struct LayerNode {
    layer: Layer,
    parent: Option<usize>,
}

#[derive(Clone, Debug)]
struct Race {
    kill: [String; 2],
    side_finish: [String; 2],
    hub_finish: String,
}

#[derive(Clone, Debug)]
struct Par {
    /// Layer enclosing the parallel operator itself.
    outer: Option<usize>,
    depth: usize,
}

#[derive(Clone, Debug)]
struct Ctx {
    branch: String,
    start: String,
    finish: String,
    layer: Option<usize>,
    /// Races already decided on the path from the enclosing definition.
    resolved: BTreeSet<usize>,
}

impl Ctx {
    fn with(&self, branch: String, start: String, finish: String, layer: Option<usize>) -> Ctx {
        Ctx { branch, start, finish, layer, resolved: self.resolved.clone() }
    }
}

/// A definition currently being translated.
#[derive(Clone, Debug)]
struct Frame {
    name: String,
    start: String,
    finish: String,
    layer: Option<usize>,
}

struct Component {
    ta: TimedAutomaton,
    layer: Option<usize>,
    /// Non-initial locations in which the automaton may rest.
    stable: Vec<String>,
    readiness: Option<String>,
}

/// One prefix whose event edge is decided after translation.
struct Occurrence {
    component: usize,
    event: String,
    branch: String,
    layer: Option<usize>,
    next: String,
}

#[derive(Clone, Debug)]
struct Offer {
    participants: Vec<usize>,
    kills: BTreeSet<String>,
}

enum Walk {
    Final { label: String, kills: BTreeSet<String> },
    Parked { par: usize, side: usize, event: String, kills: BTreeSet<String> },
}

struct Translator<'s> {
    spec: &'s CspSpec,
    components: Vec<Component>,
    layers: Vec<LayerNode>,
    races: Vec<Race>,
    pars: Vec<Par>,
    occurrences: Vec<Occurrence>,
    frames: Vec<Frame>,
    /// Generated channels in allocation order.
    registry: IndexMap<String, (ChannelMode, ChannelKind)>,
    alias: HashMap<String, String>,
    counter: usize,
    vars: Vec<String>,
}

impl<'s> Translator<'s> {
    fn new(spec: &'s CspSpec) -> Self {
        Translator {
            spec,
            components: Vec::new(),
            layers: Vec::new(),
            races: Vec::new(),
            pars: Vec::new(),
            occurrences: Vec::new(),
            frames: Vec::new(),
            registry: IndexMap::new(),
            alias: HashMap::new(),
            counter: 0,
            vars: Vec::new(),
        }
    }

    fn fresh(&mut self, prefix: &str, branch: &str, mode: ChannelMode, kind: ChannelKind) -> String {
        self.counter += 1;
        let name = format!("{prefix}{branch}_{}", self.counter);
        self.registry.insert(name.clone(), (mode, kind));
        name
    }

    fn flow(&mut self, branch: &str) -> String {
        self.fresh("startID", branch, ChannelMode::Binary, ChannelKind::Flow)
    }

    fn terminating(&mut self, branch: &str) -> String {
        self.fresh("finishID", branch, ChannelMode::Binary, ChannelKind::Terminating)
    }

    fn push_layer(&mut self, layer: Layer, parent: Option<usize>) -> usize {
        self.layers.push(LayerNode { layer, parent });
        self.layers.len() - 1
    }

    fn depth(&self, mut layer: Option<usize>) -> usize {
        let mut d = 0;
        while let Some(l) = layer {
            d += 1;
            layer = self.layers[l].parent;
        }
        d
    }

    fn component(&mut self, ctx: &Ctx) -> usize {
        let mut ta = TimedAutomaton::new(format!("TA{:02}", self.components.len()));
        ta.locations[0].kind = LocationKind::Normal;
        self.components.push(Component { ta, layer: ctx.layer, stable: Vec::new(), readiness: None });
        self.components.len() - 1
    }

    fn location(&mut self, c: usize, kind: LocationKind) -> String {
        let ta = &mut self.components[c].ta;
        let id = format!("s{}", ta.locations.len());
        ta.locations.push(Location::new(&id, kind));
        if kind == LocationKind::Normal {
            self.components[c].stable.push(id.clone());
        }
        id
    }

    fn edge(&mut self, c: usize, edge: Edge) {
        self.components[c].ta.edges.push(edge);
    }

    fn send(&mut self, c: usize, from: &str, to: &str, channel: &str) {
        self.edge(c, Edge::new(from, to).with_sync(SyncLabel::send(channel)));
    }

    fn receive(&mut self, c: usize, from: &str, to: &str, channel: &str) {
        self.edge(c, Edge::new(from, to).with_sync(SyncLabel::receive(channel)));
    }

    /// A fresh automaton `s0 --start?--> s1` whose `s1` idles on `tock`.
    fn started_idle(&mut self, ctx: &Ctx) -> (usize, String) {
        let c = self.component(ctx);
        let s1 = self.location(c, LocationKind::Normal);
        self.receive(c, "s0", &s1, &ctx.start);
        self.receive(c, &s1, &s1, TOCK);
        (c, s1)
    }

    fn translate(&mut self, p: &CspProcess, ctx: &Ctx) -> Result<(), TranslateError> {
        use CspProcess::*;
        match p {
            Stop => {
                self.started_idle(ctx);
            }
            Skip => {
                let (c, s1) = self.started_idle(ctx);
                let s2 = self.location(c, LocationKind::Committed);
                self.edge(c, Edge::new(&s1, &s2));
                self.send(c, &s2, "s0", &ctx.finish);
            }
            Prefix(e, cont) if e.is_tock() => {
                let c = self.component(ctx);
                let s1 = self.location(c, LocationKind::Normal);
                let s2 = self.location(c, LocationKind::Committed);
                let next = self.flow(&ctx.branch);
                self.receive(c, "s0", &s1, &ctx.start);
                self.receive(c, &s1, &s2, TOCK);
                self.send(c, &s2, "s0", &next);
                let inner = Ctx { start: next, ..ctx.clone() };
                self.translate(cont, &inner)?;
            }
            Prefix(e, cont) => {
                let (c, _) = self.started_idle(ctx);
                let next = self.flow(&ctx.branch);
                self.occurrences.push(Occurrence {
                    component: c,
                    event: e.to_string(),
                    branch: ctx.branch.clone(),
                    layer: ctx.layer,
                    next: next.clone(),
                });
                let mut inner = Ctx { start: next, ..ctx.clone() };
                inner.resolved.extend(self.races_resolved_by(e.as_str(), ctx.layer));
                self.translate(cont, &inner)?;
            }
            IntChoice(l, r) => {
                let c = self.component(ctx);
                let (bl, br) = (format!("{}0", ctx.branch), format!("{}1", ctx.branch));
                let (sl, sr) = (self.flow(&bl), self.flow(&br));
                let s1 = self.location(c, LocationKind::Committed);
                let s2 = self.location(c, LocationKind::Committed);
                let s3 = self.location(c, LocationKind::Committed);
                self.receive(c, "s0", &s1, &ctx.start);
                self.edge(c, Edge::new(&s1, &s2));
                self.edge(c, Edge::new(&s1, &s3));
                self.send(c, &s2, "s0", &sl);
                self.send(c, &s3, "s0", &sr);
                self.translate(l, &ctx.with(bl, sl, ctx.finish.clone(), ctx.layer))?;
                self.translate(r, &ctx.with(br, sr, ctx.finish.clone(), ctx.layer))?;
            }
            Seq(l, r) => {
                let mid = self.terminating(&ctx.branch);
                self.translate(l, &Ctx { finish: mid.clone(), ..ctx.clone() })?;
                self.translate(r, &Ctx { start: mid, ..ctx.clone() })?;
            }
            GenPar(l, r, sync) => {
                let sync = sync.iter().map(|e| e.to_string()).collect();
                self.parallel(l, r, sync, ctx)?;
            }
            Interleave(l, r) => self.parallel(l, r, BTreeSet::new(), ctx)?,
            ExtChoice(l, r) => self.race(l, r, RaceKind::Choice, ctx)?,
            Interrupt(l, r) => self.race(l, r, RaceKind::Interrupt, ctx)?,
            Hide(body, hidden) => {
                let set = hidden.iter().map(|e| e.to_string()).collect();
                let layer = self.push_layer(Layer::Hide(set), ctx.layer);
                self.translate(body, &Ctx { layer: Some(layer), ..ctx.clone() })?;
            }
            Rename(body, map) => {
                let map = map.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
                let layer = self.push_layer(Layer::Rename(map), ctx.layer);
                self.translate(body, &Ctx { layer: Some(layer), ..ctx.clone() })?;
            }
            Ref(name) => self.reference(name, ctx)?,
            Omega => return Err(TranslateError::Unsupported("the terminated state has no source syntax".into())),
        }
        Ok(())
    }

    fn parallel(&mut self, l: &CspProcess, r: &CspProcess, sync: BTreeSet<String>, ctx: &Ctx) -> Result<(), TranslateError> {
        let c = self.component(ctx);
        let (bl, br) = (format!("{}0", ctx.branch), format!("{}1", ctx.branch));
        let (sl, sr) = (self.flow(&bl), self.flow(&br));
        let (fl, fr) = (self.terminating(&bl), self.terminating(&br));
        let id = self.pars.len();
        self.pars.push(Par { outer: ctx.layer, depth: self.depth(ctx.layer) });
        let left = self.push_layer(Layer::Par { id, side: 0, sync: sync.clone() }, ctx.layer);
        let right = self.push_layer(Layer::Par { id, side: 1, sync }, ctx.layer);

        let c1 = self.location(c, LocationKind::Committed);
        let c2 = self.location(c, LocationKind::Committed);
        let c3 = self.location(c, LocationKind::Committed);
        let w0 = self.location(c, LocationKind::Normal);
        let w1 = self.location(c, LocationKind::Normal);
        let w2 = self.location(c, LocationKind::Normal);
        let done = self.location(c, LocationKind::Committed);
        self.receive(c, "s0", &c1, &ctx.start);
        // starting is one compound action, in either order
        self.send(c, &c1, &c2, &sl);
        self.send(c, &c2, &w0, &sr);
        self.send(c, &c1, &c3, &sr);
        self.send(c, &c3, &w0, &sl);
        // the two sides may finish at different times
        self.receive(c, &w0, &w1, &fl);
        self.receive(c, &w1, &done, &fr);
        self.receive(c, &w0, &w2, &fr);
        self.receive(c, &w2, &done, &fl);
        self.send(c, &done, "s0", &ctx.finish);

        self.translate(l, &ctx.with(bl, sl, fl, Some(left)))?;
        self.translate(r, &ctx.with(br, sr, fr, Some(right)))
    }

    fn race(&mut self, l: &CspProcess, r: &CspProcess, kind: RaceKind, ctx: &Ctx) -> Result<(), TranslateError> {
        let c = self.component(ctx);
        let (bl, br) = (format!("{}0", ctx.branch), format!("{}1", ctx.branch));
        let (sl, sr) = (self.flow(&bl), self.flow(&br));
        let (fl, fr) = (self.terminating(&bl), self.terminating(&br));
        let (prefix, kill_kind) = match kind {
            RaceKind::Choice => ("extID", ChannelKind::ExtChoiceCoord),
            RaceKind::Interrupt => ("intrpID", ChannelKind::InterruptCoord),
        };
        let kl = self.fresh(prefix, &bl, ChannelMode::Broadcast, kill_kind);
        let kr = self.fresh(prefix, &br, ChannelMode::Broadcast, kill_kind);
        let id = self.races.len();
        self.races.push(Race { kill: [kl.clone(), kr.clone()], side_finish: [fl.clone(), fr.clone()], hub_finish: ctx.finish.clone() });
        let left = self.push_layer(Layer::Race { id, side: 0, kind }, ctx.layer);
        let right = self.push_layer(Layer::Race { id, side: 1, kind }, ctx.layer);

        let c1 = self.location(c, LocationKind::Committed);
        let c2 = self.location(c, LocationKind::Committed);
        self.receive(c, "s0", &c1, &ctx.start);
        self.send(c, &c1, &c2, &sl);
        self.send(c, &c2, "s0", &sr);
        // whichever side terminates first stops the other
        for (finish, kill) in [(&fl, &kr), (&fr, &kl)] {
            let a = self.location(c, LocationKind::Committed);
            let b = self.location(c, LocationKind::Committed);
            self.receive(c, "s0", &a, finish);
            self.send(c, &a, &b, kill);
            self.send(c, &b, "s0", &ctx.finish);
        }

        self.translate(l, &ctx.with(bl, sl, fl, Some(left)))?;
        self.translate(r, &ctx.with(br, sr, fr, Some(right)))
    }

    fn reference(&mut self, name: &str, ctx: &Ctx) -> Result<(), TranslateError> {
        let Some(frame) = self.frames.iter().rev().find(|f| f.name == name).cloned() else {
            let body = self.spec.get(name).ok_or_else(|| TranslateError::Undefined(name.to_string()))?;
            self.frames.push(Frame { name: name.to_string(), start: ctx.start.clone(), finish: ctx.finish.clone(), layer: ctx.layer });
            let result = self.translate(body, ctx);
            self.frames.pop();
            return result;
        };
        let refuse = |reason: &str| Err(TranslateError::UnsupportedRecursion { name: name.to_string(), reason: reason.to_string() });
        // re-entering the definition is only sound if nothing between here
        // and the definition still needs this activation
        let mut cur = ctx.layer;
        while cur != frame.layer {
            let Some(l) = cur else {
                return Err(TranslateError::Internal(format!("definition `{name}` is not an enclosing scope")));
            };
            match &self.layers[l].layer {
                Layer::Hide(_) => {}
                Layer::Race { id, .. } if ctx.resolved.contains(id) => {}
                Layer::Race { kind: RaceKind::Interrupt, side: 0, .. } => return refuse("it occurs in an interrupted process"),
                Layer::Race { .. } => return refuse("it occurs in an undecided choice"),
                Layer::Par { .. } => return refuse("it occurs inside a parallel composition"),
                Layer::Rename(_) => return refuse("it occurs inside a renaming"),
            }
            cur = self.layers[l].parent;
        }
        let mut finish = ctx.finish.clone();
        while finish != frame.finish {
            let owner = self
                .races
                .iter()
                .enumerate()
                .find(|(id, r)| ctx.resolved.contains(id) && r.side_finish.contains(&finish));
            match owner {
                Some((_, race)) => finish = race.hub_finish.clone(),
                None => return refuse("it is followed by further behaviour"),
            }
        }
        self.alias.insert(ctx.start.clone(), frame.start);
        Ok(())
    }

    /// Races a visible occurrence of `event` at `layer` decides.
    fn races_resolved_by(&self, event: &str, mut layer: Option<usize>) -> Vec<usize> {
        let mut event = event.to_string();
        let mut out = Vec::new();
        while let Some(l) = layer {
            match &self.layers[l].layer {
                Layer::Rename(map) => {
                    if let Some(to) = map.get(&event) {
                        event = to.clone();
                    }
                }
                Layer::Hide(set) if set.contains(&event) => break,
                Layer::Race { id, side, kind } if *kind == RaceKind::Choice || *side == 1 => out.push(*id),
                _ => {}
            }
            layer = self.layers[l].parent;
        }
        out
    }

    /// Carries an offer outwards until it is hidden, meets a synchronising
    /// parallel operator, or reaches the top.
    fn walk(&self, event: &str, mut layer: Option<usize>, mut kills: BTreeSet<String>) -> Walk {
        let mut event = event.to_string();
        while let Some(l) = layer {
            match &self.layers[l].layer {
                Layer::Rename(map) => {
                    if let Some(to) = map.get(&event) {
                        event = to.clone();
                    }
                }
                Layer::Hide(set) if set.contains(&event) => {
                    return Walk::Final { label: format!("itau_{event}"), kills };
                }
                Layer::Hide(_) => {}
                Layer::Race { id, side, kind } => {
                    if *kind == RaceKind::Choice || *side == 1 {
                        kills.insert(self.races[*id].kill[1 - side].clone());
                    }
                }
                Layer::Par { id, side, sync } if sync.contains(&event) => {
                    return Walk::Parked { par: *id, side: *side, event, kills };
                }
                Layer::Par { .. } => {}
            }
            layer = self.layers[l].parent;
        }
        Walk::Final { label: event, kills }
    }

    fn resolve(&self, name: &str) -> String {
        let mut name = name.to_string();
        while let Some(next) = self.alias.get(&name) {
            name = next.clone();
        }
        name
    }

    fn finish(mut self) -> Result<Translation, TranslateError> {
        // parked[par][side] holds offers waiting for a partner
        let mut parked: Vec<[Vec<(Offer, String)>; 2]> = vec![[Vec::new(), Vec::new()]; self.pars.len()];
        let mut finals: Vec<(Offer, String)> = Vec::new();
        let mut emitters: Vec<(usize, String, BTreeSet<String>)> = Vec::new();
        for (i, occ) in self.occurrences.iter().enumerate() {
            match self.walk(&occ.event, occ.layer, BTreeSet::new()) {
                Walk::Final { label, kills } => emitters.push((i, label, kills)),
                Walk::Parked { par, side, event, kills } => {
                    let offer = Offer { participants: vec![i], kills };
                    parked[par][side].push((offer, event));
                }
            }
        }
        // innermost parallel operators first
        let mut order: Vec<usize> = (0..self.pars.len()).collect();
        order.sort_by_key(|p| std::cmp::Reverse(self.pars[*p].depth));
        for par in order {
            let [left, right] = std::mem::take(&mut parked[par]);
            for (lo, le) in &left {
                for (ro, re) in &right {
                    if le != re {
                        continue;
                    }
                    let mut participants = lo.participants.clone();
                    participants.extend(&ro.participants);
                    let kills: BTreeSet<String> = lo.kills.union(&ro.kills).cloned().collect();
                    match self.walk(le, self.pars[par].outer, kills) {
                        Walk::Final { label, kills } => finals.push((Offer { participants, kills }, label)),
                        Walk::Parked { par: outer, side, event, kills } => {
                            parked[outer][side].push((Offer { participants, kills }, event));
                        }
                    }
                }
            }
        }

        // participants get readiness variables
        let mut readiness: BTreeMap<usize, String> = BTreeMap::new();
        let participant_set: BTreeSet<usize> = {
            let emitting: BTreeSet<usize> = emitters.iter().map(|e| e.0).collect();
            (0..self.occurrences.len()).filter(|i| !emitting.contains(i)).collect()
        };
        for &i in &participant_set {
            self.counter += 1;
            let occ = &self.occurrences[i];
            let var = format!("g_{}{}_{}", occ.event, occ.branch, self.counter);
            self.vars.push(var.clone());
            readiness.insert(i, var);
        }

        let mut emitted = BTreeSet::new();
        for (i, label, kills) in emitters {
            let c = self.occurrences[i].component;
            let next = self.occurrences[i].next.clone();
            let mut at = self.location(c, LocationKind::Committed);
            self.send(c, "s1", &at, &label);
            emitted.insert(label);
            for k in kills {
                let to = self.location(c, LocationKind::Committed);
                self.send(c, &at, &to, &k);
                at = to;
            }
            self.send(c, &at, "s0", &next);
        }

        let mut requirements = Vec::new();
        let mut combo_count: HashMap<String, usize> = HashMap::new();
        let mut released: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (offer, label) in finals {
            let base = label.strip_prefix("itau_").unwrap_or(&label).to_string();
            let n = combo_count.entry(base.clone()).or_insert(0);
            *n += 1;
            let channel = if *n == 1 { format!("{base}___sync") } else { format!("{base}___{n}___sync") };
            self.registry.insert(channel.clone(), (ChannelMode::Broadcast, ChannelKind::Synchronisation));
            for p in &offer.participants {
                released.entry(*p).or_default().push(channel.clone());
            }
            emitted.insert(label.clone());
            requirements.push(SyncRequirement {
                event: label,
                channel,
                participants: offer.participants.iter().map(|p| readiness[p].clone()).collect(),
                kills: offer.kills.into_iter().collect(),
            });
        }
        for (&i, var) in &readiness {
            let c = self.occurrences[i].component;
            let next = self.occurrences[i].next.clone();
            self.components[c].readiness = Some(var.clone());
            self.components[c].ta.edges[0].updates.push(Update::Assign { var: var.clone(), value: 1 });
            let channels = released.remove(&i).unwrap_or_default();
            if channels.is_empty() {
                continue;
            }
            let go = self.location(c, LocationKind::Committed);
            for ch in channels {
                self.edge(
                    c,
                    Edge::new("s1", &go).with_sync(SyncLabel::receive(ch)).with_update(Update::Assign { var: var.clone(), value: 0 }),
                );
            }
            self.send(c, &go, "s0", &next);
        }

        self.add_kill_edges();
        self.apply_aliases();
        self.local_jumps()?;
        let used: BTreeSet<String> = self
            .components
            .iter()
            .flat_map(|c| c.ta.edges.iter())
            .filter_map(|e| e.sync.as_ref().map(|s| s.channel.clone()))
            .chain(requirements.iter().flat_map(|r| std::iter::once(r.channel.clone()).chain(r.kills.iter().cloned())))
            .collect();
        let channels = self
            .registry
            .iter()
            .filter(|(name, _)| used.contains(*name) && self.resolve(name) == **name)
            .map(|(name, (mode, kind))| ChannelDecl { name: name.clone(), mode: *mode, kind: *kind })
            .collect();
        Ok(Translation {
            automata: self.components.into_iter().map(|c| c.ta).collect(),
            requirements,
            channels,
            int_vars: self.vars,
            emitted,
        })
    }

    fn add_kill_edges(&mut self) {
        for c in 0..self.components.len() {
            let mut kills = Vec::new();
            let mut layer = self.components[c].layer;
            while let Some(l) = layer {
                if let Layer::Race { id, side, .. } = &self.layers[l].layer {
                    kills.push(self.races[*id].kill[*side].clone());
                }
                layer = self.layers[l].parent;
            }
            let stable = self.components[c].stable.clone();
            let readiness = self.components[c].readiness.clone();
            for kill in kills {
                for loc in &stable {
                    let mut e = Edge::new(loc, "s0").with_sync(SyncLabel::receive(kill.as_str()));
                    if let Some(var) = &readiness {
                        e = e.with_update(Update::Assign { var: var.clone(), value: 0 });
                    }
                    self.edge(c, e);
                }
            }
        }
    }

    fn apply_aliases(&mut self) {
        let resolved: HashMap<String, String> = self.alias.keys().map(|k| (k.clone(), self.resolve(k))).collect();
        for comp in &mut self.components {
            for e in &mut comp.ta.edges {
                if let Some(s) = &mut e.sync {
                    if let Some(to) = resolved.get(&s.channel) {
                        s.channel = to.clone();
                    }
                }
            }
        }
    }

    /// A send whose only receivers live in the sending automaton itself
    /// becomes an internal jump to the receiving edge's target.
    fn local_jumps(&mut self) -> Result<(), TranslateError> {
        let mut receivers: HashMap<String, Vec<(usize, usize)>> = HashMap::new();
        for (c, comp) in self.components.iter().enumerate() {
            for (i, e) in comp.ta.edges.iter().enumerate() {
                if let Some(SyncLabel { channel, direction: Direction::Receive }) = &e.sync {
                    receivers.entry(channel.clone()).or_default().push((c, i));
                }
            }
        }
        for c in 0..self.components.len() {
            for i in 0..self.components[c].ta.edges.len() {
                let Some(SyncLabel { channel, direction: Direction::Send }) = self.components[c].ta.edges[i].sync.clone() else {
                    continue;
                };
                if self.registry.get(&channel).is_some_and(|(mode, _)| *mode == ChannelMode::Broadcast) {
                    continue;
                }
                let Some(recv) = receivers.get(&channel) else { continue };
                if recv.iter().all(|(rc, _)| *rc != c) {
                    continue;
                }
                let [(_, j)] = recv.as_slice() else {
                    return Err(TranslateError::Internal(format!("channel `{channel}` loops back ambiguously")));
                };
                let target = self.components[c].ta.edges[*j].clone();
                let edge = &mut self.components[c].ta.edges[i];
                if edge.target != target.source {
                    return Err(TranslateError::Internal(format!("channel `{channel}` loops back to a busy location")));
                }
                edge.sync = None;
                edge.target = target.target;
                edge.updates.extend(target.updates);
            }
        }
        Ok(())
    }
}
