//! Finite traces and bounded, prefix-closed trace sets.
//!
//! Both semantic engines produce a [`TraceSet`]: all observable action
//! sequences up to a fixed length. The canonical text form is one trace per
//! line, events separated by commas, lines sorted, with `<>` standing for the
//! empty trace.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A finite sequence of observable action names.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace(Vec<String>);

impl Trace {
    pub fn empty() -> Self {
        Trace(Vec::new())
    }

    pub fn new<I, S>(events: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Trace(events.into_iter().map(Into::into).collect())
    }

    pub fn events(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Returns a new trace extended by one action.
    pub fn extended(&self, event: &str) -> Trace {
        let mut events = self.0.clone();
        events.push(event.to_string());
        Trace(events)
    }

    pub fn prefix(&self, len: usize) -> Trace {
        Trace(self.0[..len.min(self.0.len())].to_vec())
    }

    /// Removes every action accepted by `erase`, keeping the order of the rest.
    pub fn without<F: Fn(&str) -> bool>(&self, erase: F) -> Trace {
        Trace(self.0.iter().filter(|e| !erase(e)).cloned().collect())
    }

    pub fn contains(&self, event: &str) -> bool {
        self.0.iter().any(|e| e == event)
    }

    pub fn count(&self, event: &str) -> usize {
        self.0.iter().filter(|e| *e == event).count()
    }

    /// The canonical single-line rendering (`<>` for the empty trace).
    pub fn to_line(&self) -> String {
        if self.0.is_empty() {
            "<>".to_string()
        } else {
            self.0.join(",")
        }
    }

    pub fn parse_line(line: &str) -> Result<Trace, TraceFormatError> {
        let line = line.trim();
        if line == "<>" {
            return Ok(Trace::empty());
        }
        let mut events = Vec::new();
        for part in line.split(',') {
            let part = part.trim();
            if part.is_empty() || !part.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(TraceFormatError::BadEvent(line.to_string()));
            }
            events.push(part.to_string());
        }
        Ok(Trace(events))
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "<>")
        } else {
            write!(f, "<{}>", self.0.join(", "))
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceFormatError {
    #[error("malformed trace line `{0}`")]
    BadEvent(String),
    #[error("trace `{trace}` is longer than the declared depth {depth}")]
    TooLong { trace: String, depth: usize },
    #[error("trace set is not prefix-closed: `{0}` has a missing prefix")]
    NotPrefixClosed(String),
}

/// A prefix-closed set of traces, each no longer than `depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceSet {
    depth: usize,
    traces: BTreeSet<Trace>,
}

impl TraceSet {
    /// The set containing only the empty trace.
    pub fn new(depth: usize) -> Self {
        let mut traces = BTreeSet::new();
        traces.insert(Trace::empty());
        TraceSet { depth, traces }
    }

    /// Builds the prefix closure of `traces`. Traces longer than `depth` are
    /// truncated.
    pub fn from_traces<I: IntoIterator<Item = Trace>>(depth: usize, traces: I) -> Self {
        let mut set = TraceSet::new(depth);
        for t in traces {
            set.insert_closed(t);
        }
        set
    }

    /// Inserts a trace together with all of its prefixes.
    pub fn insert_closed(&mut self, trace: Trace) {
        let trace = trace.prefix(self.depth);
        for len in (1..=trace.len()).rev() {
            if !self.traces.insert(trace.prefix(len)) {
                break;
            }
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn contains(&self, trace: &Trace) -> bool {
        self.traces.contains(trace)
    }

    pub fn contains_events(&self, events: &[&str]) -> bool {
        self.traces.contains(&Trace::new(events.iter().copied()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Trace> {
        self.traces.iter()
    }

    pub fn traces(&self) -> &BTreeSet<Trace> {
        &self.traces
    }

    pub fn is_prefix_closed(&self) -> bool {
        self.traces.contains(&Trace::empty())
            && self
                .traces
                .iter()
                .all(|t| t.is_empty() || self.traces.contains(&t.prefix(t.len() - 1)))
    }

    pub fn is_subset(&self, other: &TraceSet) -> bool {
        self.traces.is_subset(&other.traces)
    }

    /// Deletes the erased actions from every trace and re-truncates to `depth`.
    pub fn erase<F: Fn(&str) -> bool>(&self, depth: usize, erase: F) -> TraceSet {
        TraceSet::from_traces(depth, self.traces.iter().map(|t| t.without(&erase)))
    }

    /// Restricts the set to traces of length at most `depth`.
    pub fn truncated(&self, depth: usize) -> TraceSet {
        TraceSet {
            depth,
            traces: self.traces.iter().filter(|t| t.len() <= depth).cloned().collect(),
        }
    }

    /// Canonical text: sorted lines, one trace each, terminated by a newline.
    pub fn to_canonical_text(&self) -> String {
        let mut lines: Vec<String> = self.traces.iter().map(Trace::to_line).collect();
        lines.sort();
        let mut out = lines.join("\n");
        out.push('\n');
        out
    }

    /// Parses the canonical text form. The result must be prefix-closed and
    /// no trace may exceed `depth`.
    pub fn parse_canonical(text: &str, depth: usize) -> Result<TraceSet, TraceFormatError> {
        let mut traces = BTreeSet::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let trace = Trace::parse_line(line)?;
            if trace.len() > depth {
                return Err(TraceFormatError::TooLong { trace: trace.to_line(), depth });
            }
            traces.insert(trace);
        }
        let set = TraceSet { depth, traces };
        if let Some(bad) = set
            .traces
            .iter()
            .find(|t| !t.is_empty() && !set.traces.contains(&t.prefix(t.len() - 1)))
        {
            return Err(TraceFormatError::NotPrefixClosed(bad.to_line()));
        }
        if !set.traces.contains(&Trace::empty()) && !set.traces.is_empty() {
            return Err(TraceFormatError::NotPrefixClosed("<>".into()));
        }
        if set.traces.is_empty() {
            return Ok(TraceSet::new(depth));
        }
        Ok(set)
    }
}

impl<'a> IntoIterator for &'a TraceSet {
    type Item = &'a Trace;
    type IntoIter = std::collections::btree_set::Iter<'a, Trace>;

    fn into_iter(self) -> Self::IntoIter {
        self.traces.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_closes_under_prefix() {
        let mut set = TraceSet::new(3);
        set.insert_closed(Trace::new(["a", "b", "c"]));
        assert_eq!(set.len(), 4);
        assert!(set.is_prefix_closed());
        assert!(set.contains_events(&["a", "b"]));
    }

    #[test]
    fn insert_truncates_to_depth() {
        let mut set = TraceSet::new(1);
        set.insert_closed(Trace::new(["a", "b"]));
        assert_eq!(set.len(), 2);
        assert!(!set.contains_events(&["a", "b"]));
    }

    #[test]
    fn canonical_text_sorts_lines() {
        let set = TraceSet::from_traces(2, [Trace::new(["tock", "tock"]), Trace::new(["a"])]);
        assert_eq!(set.to_canonical_text(), "<>\na\ntock\ntock,tock\n");
        let back = TraceSet::parse_canonical(&set.to_canonical_text(), 2).unwrap();
        assert_eq!(back, set);
    }

    #[test]
    fn parse_rejects_open_sets() {
        assert_eq!(
            TraceSet::parse_canonical("<>\na,b\n", 2),
            Err(TraceFormatError::NotPrefixClosed("a,b".into()))
        );
        assert!(matches!(
            TraceSet::parse_canonical("<>\na\na,b\n", 1),
            Err(TraceFormatError::TooLong { .. })
        ));
    }

    #[test]
    fn erase_shortens_and_recloses() {
        let set = TraceSet::from_traces(3, [Trace::new(["startID0_0", "tock", "tock"])]);
        let erased = set.erase(2, |e| e.starts_with("startID"));
        assert_eq!(erased, TraceSet::from_traces(2, [Trace::new(["tock", "tock"])]));
    }
}
