//! UPPAAL 4.x flat XML: writing networks out and reading them back.
//!
//! Channel kinds have no place in the UPPAAL format, so they travel in a
//! single XML comment that stock UPPAAL ignores:
//!
//! ```text
//! <!-- tockta-metadata
//! environment Environment
//! kind tock tock
//! kind startIDP flow
//! -->
//! ```
//!
//! Documents without the comment are classified by the reserved names.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;

use thiserror::Error;

use crate::ta::{
    ChannelDecl, ChannelKind, ChannelMode, ClockAtom, ClockConstraint, Direction, Edge, Guard, GuardAtom, Location,
    LocationKind, NetworkModel, Relation, SyncLabel, TimedAutomaton, Update,
};

const DOCTYPE: &str = "<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' 'http://www.it.uu.se/research/group/darts/uppaal/flat-1_2.dtd'>";
const METADATA: &str = "tockta-metadata";
const GRID: i64 = 150;
const COLUMNS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum XmlError {
    #[error("malformed XML: {0}")]
    Malformed(String),
    #[error("template `{template}`: missing initial location")]
    MissingInit { template: String },
    #[error("{place}: unsupported expression `{text}`")]
    Unsupported { place: String, text: String },
    #[error("{place}: {message}")]
    Invalid { place: String, message: String },
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

fn position(i: usize) -> (i64, i64) {
    ((i % COLUMNS) as i64 * GRID, (i / COLUMNS) as i64 * GRID)
}

/// Serialises `net`. Equal networks give byte-identical documents.
pub fn emit(net: &NetworkModel) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
    out.push_str(DOCTYPE);
    out.push_str("\n<nta>\n");

    let _ = writeln!(out, "\t<!-- {METADATA}");
    let _ = writeln!(out, "environment {}", net.automata.get(net.environment).map_or("", |a| a.name.as_str()));
    for c in &net.channels {
        let _ = writeln!(out, "kind {} {}", c.name, c.kind.label());
    }
    out.push_str("-->\n");

    let mut decl = String::new();
    for c in &net.channels {
        let mode = match c.mode {
            ChannelMode::Binary => "chan",
            ChannelMode::Broadcast => "broadcast chan",
            ChannelMode::UrgentBinary => "urgent chan",
        };
        let _ = writeln!(decl, "{mode} {};", c.name);
    }
    for (v, init) in &net.int_vars {
        let _ = writeln!(decl, "int {v} = {init};");
    }
    for c in &net.global_clocks {
        let _ = writeln!(decl, "clock {c};");
    }
    let _ = writeln!(out, "\t<declaration>{}</declaration>", escape(&decl));

    for ta in &net.automata {
        write_template(&mut out, ta);
    }
    let names: Vec<&str> = net.automata.iter().map(|a| a.name.as_str()).collect();
    let _ = writeln!(out, "\t<system>system {};</system>", names.join(", "));
    out.push_str("\t<queries>\n\t</queries>\n</nta>\n");
    out
}

fn write_template(out: &mut String, ta: &TimedAutomaton) {
    let loc_ref = |id: &str| format!("{}__{}", ta.name, id);
    out.push_str("\t<template>\n");
    let _ = writeln!(out, "\t\t<name x=\"5\" y=\"5\">{}</name>", escape(&ta.name));
    let decl: String = ta.clocks.iter().map(|c| format!("clock {c};\n")).collect();
    let _ = writeln!(out, "\t\t<declaration>{}</declaration>", escape(&decl));
    let mut coords = HashMap::new();
    for (i, l) in ta.locations.iter().enumerate() {
        let (x, y) = position(i);
        coords.insert(l.id.as_str(), (x, y));
        let _ = writeln!(out, "\t\t<location id=\"{}\" x=\"{x}\" y=\"{y}\">", escape(&loc_ref(&l.id)));
        let _ = writeln!(out, "\t\t\t<name x=\"{}\" y=\"{}\">{}</name>", x - 10, y - 34, escape(&l.name));
        if let Some(inv) = &l.invariant {
            if !inv.0.is_empty() {
                let _ = writeln!(
                    out,
                    "\t\t\t<label kind=\"invariant\" x=\"{}\" y=\"{}\">{}</label>",
                    x - 10,
                    y + 17,
                    escape(&inv.to_string())
                );
            }
        }
        match l.kind {
            LocationKind::Normal => {}
            LocationKind::Urgent => out.push_str("\t\t\t<urgent/>\n"),
            LocationKind::Committed => out.push_str("\t\t\t<committed/>\n"),
        }
        out.push_str("\t\t</location>\n");
    }
    let _ = writeln!(out, "\t\t<init ref=\"{}\"/>", escape(&loc_ref(&ta.initial)));
    for e in &ta.edges {
        out.push_str("\t\t<transition>\n");
        let _ = writeln!(out, "\t\t\t<source ref=\"{}\"/>", escape(&loc_ref(&e.source)));
        let _ = writeln!(out, "\t\t\t<target ref=\"{}\"/>", escape(&loc_ref(&e.target)));
        let (sx, sy) = coords.get(e.source.as_str()).copied().unwrap_or((0, 0));
        let (tx, ty) = coords.get(e.target.as_str()).copied().unwrap_or((0, 0));
        let (mx, my) = ((sx + tx) / 2, (sy + ty) / 2);
        let mut labels = Vec::new();
        if !e.guard.is_true() {
            labels.push(("guard", e.guard.to_string()));
        }
        if let Some(s) = &e.sync {
            labels.push(("synchronisation", s.to_string()));
        }
        if !e.updates.is_empty() {
            let ups: Vec<String> = e.updates.iter().map(ToString::to_string).collect();
            labels.push(("assignment", ups.join(", ")));
        }
        for (k, (kind, text)) in labels.iter().enumerate() {
            let _ = writeln!(
                out,
                "\t\t\t<label kind=\"{kind}\" x=\"{mx}\" y=\"{}\">{}</label>",
                my - 17 + 17 * k as i64,
                escape(text)
            );
        }
        out.push_str("\t\t</transition>\n");
    }
    out.push_str("\t</template>\n");
}

/// Reads a document in the emitted dialect, or a foreign one that stays
/// within the same expression grammar.
pub fn load(doc: &str) -> Result<NetworkModel, XmlError> {
    let options = roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() };
    let parsed = roxmltree::Document::parse_with_options(doc, options).map_err(|e| XmlError::Malformed(e.to_string()))?;
    let root = parsed.root_element();
    if root.tag_name().name() != "nta" {
        return Err(XmlError::Malformed(format!("root element is <{}>, expected <nta>", root.tag_name().name())));
    }

    let mut kinds: BTreeMap<String, ChannelKind> = BTreeMap::new();
    let mut env_name: Option<String> = None;
    for node in root.descendants().filter(|n| n.is_comment()) {
        let text = node.text().unwrap_or("");
        let Some(body) = text.trim_start().strip_prefix(METADATA) else { continue };
        for line in body.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["environment", name] => env_name = Some(name.to_string()),
                ["kind", name, label] => {
                    let kind = ChannelKind::from_label(label).ok_or_else(|| XmlError::Invalid {
                        place: "metadata".into(),
                        message: format!("unknown channel kind `{label}`"),
                    })?;
                    kinds.insert(name.to_string(), kind);
                }
                _ => {
                    return Err(XmlError::Invalid { place: "metadata".into(), message: format!("cannot read `{line}`") })
                }
            }
        }
    }

    let global_text = child(root, "declaration").and_then(|d| d.text()).unwrap_or("");
    let globals = parse_declarations(global_text, "global declaration")?;
    let channels: Vec<ChannelDecl> = globals
        .channels
        .into_iter()
        .map(|(name, mode)| {
            let kind = kinds.get(&name).copied().unwrap_or_else(|| ChannelKind::infer(&name));
            ChannelDecl { name, mode, kind }
        })
        .collect();

    let mut templates = Vec::new();
    for t in root.children().filter(|n| n.has_tag_name("template")) {
        templates.push(read_template(t, &globals.clocks)?);
    }

    let automata = match child(root, "system").and_then(|s| s.text()) {
        Some(system) => order_by_system(templates, system)?,
        None => templates,
    };
    let environment = match env_name {
        Some(name) => automata.iter().position(|a| a.name == name),
        None => automata.iter().position(|a| a.name == crate::translate::ENVIRONMENT_NAME),
    }
    .unwrap_or(automata.len().saturating_sub(1));

    Ok(NetworkModel { automata, channels, int_vars: globals.ints, global_clocks: globals.clocks, environment })
}

fn child<'a, 'i>(node: roxmltree::Node<'a, 'i>, tag: &str) -> Option<roxmltree::Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(tag))
}

#[derive(Default)]
struct Declarations {
    channels: Vec<(String, ChannelMode)>,
    ints: Vec<(String, i64)>,
    clocks: Vec<String>,
}

fn strip_comments(text: &str) -> String {
    let mut out = String::new();
    let mut rest = text;
    while let Some(i) = rest.find("/*") {
        out.push_str(&rest[..i]);
        rest = match rest[i..].find("*/") {
            Some(j) => &rest[i + j + 2..],
            None => "",
        };
    }
    out.push_str(rest);
    out.lines().map(|l| l.split("//").next().unwrap_or("")).collect::<Vec<_>>().join("\n")
}

fn parse_declarations(text: &str, place: &str) -> Result<Declarations, XmlError> {
    let mut decls = Declarations::default();
    let unsupported = |stmt: &str| XmlError::Unsupported { place: place.to_string(), text: stmt.to_string() };
    for stmt in strip_comments(text).split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let words: Vec<&str> = stmt.split_whitespace().collect();
        let tail = |n: usize| words[n..].join(" ");
        let (mode, rest) = match words.as_slice() {
            ["chan", ..] => (Some(ChannelMode::Binary), tail(1)),
            ["broadcast", "chan", ..] => (Some(ChannelMode::Broadcast), tail(2)),
            ["urgent", "chan", ..] => (Some(ChannelMode::UrgentBinary), tail(2)),
            ["int", ..] => (None, tail(1)),
            ["clock", ..] => {
                for name in tail(1).split(',').map(str::trim) {
                    if !is_name(name) {
                        return Err(unsupported(stmt));
                    }
                    decls.clocks.push(name.to_string());
                }
                continue;
            }
            _ => return Err(unsupported(stmt)),
        };
        for item in rest.split(',').map(str::trim) {
            match mode {
                Some(mode) => {
                    if !is_name(item) {
                        return Err(unsupported(stmt));
                    }
                    decls.channels.push((item.to_string(), mode));
                }
                None => {
                    let (name, init) = match item.split_once('=') {
                        Some((n, v)) => (n.trim(), v.trim().parse::<i64>().map_err(|_| unsupported(stmt))?),
                        None => (item, 0),
                    };
                    if !is_name(name) {
                        return Err(unsupported(stmt));
                    }
                    decls.ints.push((name.to_string(), init));
                }
            }
        }
    }
    Ok(decls)
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_') && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn read_template(t: roxmltree::Node, global_clocks: &[String]) -> Result<TimedAutomaton, XmlError> {
    let name = child(t, "name").and_then(|n| n.text()).map(str::trim).unwrap_or("").to_string();
    let place = format!("template `{name}`");
    if child(t, "parameter").is_some_and(|p| p.text().is_some_and(|s| !s.trim().is_empty())) {
        return Err(XmlError::Unsupported { place, text: "template parameters".into() });
    }
    let local = parse_declarations(child(t, "declaration").and_then(|d| d.text()).unwrap_or(""), &place)?;
    if !local.channels.is_empty() || !local.ints.is_empty() {
        return Err(XmlError::Unsupported { place, text: "local channels or variables".into() });
    }
    let clocks: Vec<String> = global_clocks.iter().chain(local.clocks.iter()).cloned().collect();
    let prefix = format!("{name}__");
    let local_id = |raw: &str| raw.strip_prefix(&prefix).unwrap_or(raw).to_string();

    let mut locations = Vec::new();
    for l in t.children().filter(|n| n.has_tag_name("location")) {
        let raw = l.attribute("id").ok_or_else(|| XmlError::Invalid { place: place.clone(), message: "location without id".into() })?;
        let id = local_id(raw);
        let display = child(l, "name").and_then(|n| n.text()).map(|s| s.trim().to_string()).unwrap_or_else(|| id.clone());
        let kind = if child(l, "committed").is_some() {
            LocationKind::Committed
        } else if child(l, "urgent").is_some() {
            LocationKind::Urgent
        } else {
            LocationKind::Normal
        };
        let mut invariant = None;
        for label in l.children().filter(|n| n.has_tag_name("label")) {
            if label.attribute("kind") == Some("invariant") {
                let text = label.text().unwrap_or("");
                let lp = format!("{place}, location `{id}`");
                let mut atoms = Vec::new();
                for atom in parse_guard(text, &clocks, &lp)?.0 {
                    match atom {
                        GuardAtom::Clock(c) => atoms.push(c),
                        GuardAtom::Linear { .. } => return Err(XmlError::Unsupported { place: lp, text: text.to_string() }),
                    }
                }
                invariant = Some(ClockConstraint(atoms));
            }
        }
        locations.push(Location { id, name: display, kind, invariant });
    }
    let initial = child(t, "init")
        .and_then(|i| i.attribute("ref"))
        .map(local_id)
        .ok_or_else(|| XmlError::MissingInit { template: name.clone() })?;

    let mut edges = Vec::new();
    for (i, tr) in t.children().filter(|n| n.has_tag_name("transition")).enumerate() {
        let tp = format!("{place}, transition {i}");
        let end = |tag: &str| {
            child(tr, tag)
                .and_then(|n| n.attribute("ref"))
                .map(local_id)
                .ok_or_else(|| XmlError::Invalid { place: tp.clone(), message: format!("missing <{tag}>") })
        };
        let mut edge = Edge::new(&end("source")?, &end("target")?);
        for label in tr.children().filter(|n| n.has_tag_name("label")) {
            let text = label.text().unwrap_or("").trim();
            match label.attribute("kind") {
                Some("guard") => edge.guard = parse_guard(text, &clocks, &tp)?,
                Some("synchronisation") => edge.sync = Some(parse_sync(text, &tp)?),
                Some("assignment") => edge.updates = parse_updates(text, &clocks, &tp)?,
                Some("comments") | Some("testcode") => {}
                _ => return Err(XmlError::Unsupported { place: tp.clone(), text: text.to_string() }),
            }
        }
        edges.push(edge);
    }
    Ok(TimedAutomaton { name, locations, initial, clocks: local.clocks, edges })
}

fn parse_guard(text: &str, clocks: &[String], place: &str) -> Result<Guard, XmlError> {
    let unsupported = || XmlError::Unsupported { place: place.to_string(), text: text.to_string() };
    let text = text.trim();
    if text.is_empty() || text == "true" {
        return Ok(Guard::default());
    }
    let mut atoms = Vec::new();
    for part in text.split("&&").map(str::trim) {
        let (pos, op) = ["<=", ">=", "==", "<", ">"]
            .iter()
            .filter_map(|op| part.find(op).map(|p| (p, *op)))
            .min_by_key(|(p, op)| (*p, std::cmp::Reverse(op.len())))
            .ok_or_else(unsupported)?;
        let rel = Relation::parse(op).ok_or_else(unsupported)?;
        let lhs = part[..pos].trim();
        let value: i64 = part[pos + op.len()..].trim().parse().map_err(|_| unsupported())?;
        let inner = lhs.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(lhs);
        let vars: Vec<String> = inner.split('+').map(|v| v.trim().to_string()).collect();
        if vars.iter().any(|v| !is_name(v)) {
            return Err(unsupported());
        }
        if vars.len() == 1 && clocks.contains(&vars[0]) {
            atoms.push(GuardAtom::Clock(ClockAtom { clock: vars[0].clone(), rel, value }));
        } else if vars.iter().any(|v| clocks.contains(v)) {
            return Err(unsupported());
        } else {
            atoms.push(GuardAtom::Linear { vars, rel, value });
        }
    }
    Ok(Guard(atoms))
}

fn parse_sync(text: &str, place: &str) -> Result<SyncLabel, XmlError> {
    let (name, direction) = if let Some(n) = text.strip_suffix('!') {
        (n.trim(), Direction::Send)
    } else if let Some(n) = text.strip_suffix('?') {
        (n.trim(), Direction::Receive)
    } else {
        return Err(XmlError::Unsupported { place: place.to_string(), text: text.to_string() });
    };
    if !is_name(name) {
        return Err(XmlError::Unsupported { place: place.to_string(), text: text.to_string() });
    }
    Ok(SyncLabel { channel: name.to_string(), direction })
}

fn parse_updates(text: &str, clocks: &[String], place: &str) -> Result<Vec<Update>, XmlError> {
    let unsupported = || XmlError::Unsupported { place: place.to_string(), text: text.to_string() };
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (lhs, rhs) = part.split_once(":=").or_else(|| part.split_once('=')).ok_or_else(unsupported)?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        let value: i64 = rhs.parse().map_err(|_| unsupported())?;
        if !is_name(lhs) {
            return Err(unsupported());
        }
        if clocks.iter().any(|c| c == lhs) {
            if value != 0 {
                return Err(unsupported());
            }
            out.push(Update::Reset { clock: lhs.to_string() });
        } else {
            out.push(Update::Assign { var: lhs.to_string(), value });
        }
    }
    Ok(out)
}

fn order_by_system(templates: Vec<TimedAutomaton>, system: &str) -> Result<Vec<TimedAutomaton>, XmlError> {
    let body = strip_comments(system);
    let mut listed = None;
    for stmt in body.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        match stmt.strip_prefix("system") {
            Some(rest) => listed = Some(rest.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>()),
            None => return Err(XmlError::Unsupported { place: "system declaration".into(), text: stmt.to_string() }),
        }
    }
    let Some(listed) = listed else { return Ok(templates) };
    let mut by_name: HashMap<String, TimedAutomaton> = templates.into_iter().map(|t| (t.name.clone(), t)).collect();
    listed
        .into_iter()
        .map(|n| {
            by_name.remove(&n).ok_or_else(|| XmlError::Invalid {
                place: "system declaration".into(),
                message: format!("`{n}` is not a template"),
            })
        })
        .collect()
}
