//! Bounded trace enumeration over any labelled transition relation.
//!
//! The enumerator walks the observable trace tree breadth first. For every
//! trace it keeps the set of states that can be reached by it, closed under
//! invisible moves, so each state is expanded once per trace rather than once
//! per path. Invisible closure and the observable successors of a state are
//! cached for the whole run.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use thiserror::Error;

use crate::trace::{Trace, TraceSet};

/// Resource limits for exhaustive exploration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of distinct states that may be visited.
    pub max_states: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_states: 2_000_000 }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("bound exceeded: more than {limit} states visited")]
pub struct BoundExceeded {
    pub limit: usize,
}

/// One move of a transition system. `label == None` marks an invisible move.
pub(crate) type Move<S> = (Option<String>, S);

pub(crate) trait TransitionSystem {
    type State: Clone + Eq + Hash;

    fn initial(&self) -> Self::State;

    fn moves(&self, state: &Self::State) -> Vec<Move<Self::State>>;
}

struct Cache<S> {
    observable: HashMap<S, Vec<(String, S)>>,
    seen: HashSet<S>,
    limit: usize,
}

impl<S: Clone + Eq + Hash> Cache<S> {
    fn note(&mut self, state: &S) -> Result<bool, BoundExceeded> {
        if self.seen.contains(state) {
            return Ok(false);
        }
        if self.seen.len() >= self.limit {
            return Err(BoundExceeded { limit: self.limit });
        }
        self.seen.insert(state.clone());
        Ok(true)
    }

    /// Observable moves available from anywhere in the invisible closure of `state`.
    fn observable<T>(&mut self, system: &T, state: &S) -> Result<Vec<(String, S)>, BoundExceeded>
    where
        T: TransitionSystem<State = S>,
    {
        if let Some(found) = self.observable.get(state) {
            return Ok(found.clone());
        }
        let mut closure = HashSet::new();
        let mut stack = vec![state.clone()];
        closure.insert(state.clone());
        self.note(state)?;
        let mut out = Vec::new();
        let mut dedup = HashSet::new();
        while let Some(current) = stack.pop() {
            for (label, next) in system.moves(&current) {
                match label {
                    None => {
                        if closure.insert(next.clone()) {
                            self.note(&next)?;
                            stack.push(next);
                        }
                    }
                    Some(label) => {
                        if dedup.insert((label.clone(), next.clone())) {
                            self.note(&next)?;
                            out.push((label, next));
                        }
                    }
                }
            }
        }
        self.observable.insert(state.clone(), out.clone());
        Ok(out)
    }
}

/// All observable traces of length at most `depth`.
pub(crate) fn bounded_traces<T: TransitionSystem>(
    system: &T,
    depth: usize,
    limits: Limits,
) -> Result<TraceSet, BoundExceeded> {
    let mut cache = Cache {
        observable: HashMap::new(),
        seen: HashSet::new(),
        limit: limits.max_states,
    };
    let mut result = TraceSet::new(depth);
    let mut frontier: BTreeMap<Trace, HashSet<T::State>> = BTreeMap::new();
    frontier.insert(Trace::empty(), HashSet::from([system.initial()]));
    for _ in 0..depth {
        let mut next: BTreeMap<Trace, HashSet<T::State>> = BTreeMap::new();
        for (trace, states) in &frontier {
            for state in states {
                for (label, succ) in cache.observable(system, state)? {
                    next.entry(trace.extended(&label)).or_default().insert(succ);
                }
            }
        }
        for trace in next.keys() {
            result.insert_closed(trace.clone());
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(result)
}

/// Every state reached by some trace of length at most `depth`, closed under
/// invisible moves.
pub(crate) fn reachable_states<T: TransitionSystem>(
    system: &T,
    depth: usize,
    limits: Limits,
) -> Result<Vec<T::State>, BoundExceeded> {
    let mut seen: HashSet<T::State> = HashSet::new();
    let mut order = Vec::new();
    let mut layer = vec![system.initial()];
    for level in 0..=depth {
        // invisible closure of the current layer
        let mut stack = Vec::new();
        let mut fresh = Vec::new();
        for s in layer.drain(..) {
            if seen.insert(s.clone()) {
                stack.push(s.clone());
                order.push(s.clone());
                fresh.push(s);
            }
        }
        while let Some(current) = stack.pop() {
            for (label, next) in system.moves(&current) {
                if label.is_none() && seen.insert(next.clone()) {
                    if seen.len() > limits.max_states {
                        return Err(BoundExceeded { limit: limits.max_states });
                    }
                    order.push(next.clone());
                    fresh.push(next.clone());
                    stack.push(next);
                }
            }
        }
        if level == depth {
            break;
        }
        for s in &fresh {
            for (label, next) in system.moves(s) {
                if label.is_some() && !seen.contains(&next) {
                    layer.push(next);
                }
            }
        }
    }
    Ok(order)
}
