//! Text front end for `.tcsp` files.
//!
//! The concrete syntax follows the FDR-style ASCII listings:
//!
//! ```text
//! -- comment
//! ADS        = Controller [|{close}|] Lighting
//! Controller = open -> tock -> close -> Controller
//! Lighting   = close -> offLight -> Lighting
//! ```
//!
//! Binding strength, tightest first: postfix `\ {..}` and `[[a <- b]]`,
//! prefix `->`, interrupt `/\`, sequence `;`, the parallel operators
//! `[|{..}|]` and `|||`, external choice `[]`, internal choice `|~|`.
//! All binary operators associate to the left. The definition named `MAIN`
//! is the main process if present, otherwise the first definition is.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use super::ast::{is_identifier, CspProcess, CspSpec, EventName, NameError, SpecError, TOCK};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{at}: syntax error: expected {}, found {found}", expected.join(" or "))]
    Syntax { at: Position, expected: Vec<String>, found: String },
    #[error("{at}: {source}")]
    Name { at: Position, source: NameError },
    #[error("{0}")]
    Spec(#[from] SpecError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Arrow,
    LeftArrow,
    ExtChoice,
    IntChoice,
    Interleave,
    ParOpen,
    ParClose,
    Interrupt,
    Backslash,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    RenameOpen,
    RenameClose,
    Equals,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        let s = match self {
            Tok::Ident(name) => return format!("identifier `{name}`"),
            Tok::Arrow => "->",
            Tok::LeftArrow => "<-",
            Tok::ExtChoice => "[]",
            Tok::IntChoice => "|~|",
            Tok::Interleave => "|||",
            Tok::ParOpen => "[|",
            Tok::ParClose => "|]",
            Tok::Interrupt => "/\\",
            Tok::Backslash => "\\",
            Tok::Semi => ";",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::RenameOpen => "[[",
            Tok::RenameClose => "]]",
            Tok::Equals => "=",
            Tok::Eof => return "end of input".to_string(),
        };
        format!("`{s}`")
    }
}

fn lex(source: &str) -> Result<Vec<(Tok, Position)>, ParseError> {
    const SYMBOLS: [(&str, Tok); 18] = [
        ("|~|", Tok::IntChoice),
        ("|||", Tok::Interleave),
        ("->", Tok::Arrow),
        ("<-", Tok::LeftArrow),
        ("[]", Tok::ExtChoice),
        ("[|", Tok::ParOpen),
        ("|]", Tok::ParClose),
        ("[[", Tok::RenameOpen),
        ("]]", Tok::RenameClose),
        ("/\\", Tok::Interrupt),
        ("\\", Tok::Backslash),
        (";", Tok::Semi),
        ("(", Tok::LParen),
        (")", Tok::RParen),
        ("{", Tok::LBrace),
        ("}", Tok::RBrace),
        (",", Tok::Comma),
        ("=", Tok::Equals),
    ];
    let mut out = Vec::new();
    for (line_no, line) in source.lines().enumerate() {
        let line = match line.find("--") {
            Some(i) => &line[..i],
            None => line,
        };
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let at = Position { line: line_no + 1, column: line[..i].chars().count() + 1 };
            let c = bytes[i] as char;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' || c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(line[start..i].to_string()), at));
                continue;
            }
            match SYMBOLS.iter().find(|(sym, _)| line[i..].starts_with(sym)) {
                Some((sym, tok)) => {
                    out.push((tok.clone(), at));
                    i += sym.len();
                }
                None => {
                    let found = line[i..].chars().next().unwrap();
                    return Err(ParseError::Syntax {
                        at,
                        expected: vec!["an operator or identifier".into()],
                        found: format!("`{found}`"),
                    });
                }
            }
        }
    }
    let end = Position { line: source.lines().count().max(1), column: 1 };
    out.push((Tok::Eof, end));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        &self.toks[(self.pos + offset).min(self.toks.len() - 1)].0
    }

    fn here(&self) -> Position {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            at: self.here(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(&[&tok.describe()])
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Position), ParseError> {
        let at = self.here();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok((name, at))
            }
            _ => self.error(&[what]),
        }
    }

    fn event(&mut self) -> Result<EventName, ParseError> {
        let (name, at) = self.ident("an event name")?;
        if name == TOCK {
            return Ok(EventName::tock());
        }
        EventName::new(name).map_err(|source| ParseError::Name { at, source })
    }

    fn spec(&mut self) -> Result<CspSpec, ParseError> {
        let mut defs: IndexMap<String, CspProcess> = IndexMap::new();
        while *self.peek() != Tok::Eof {
            let (name, at) = self.ident("a process name")?;
            if !is_identifier(&name) || name == "STOP" || name == "SKIP" {
                return Err(ParseError::Name { at, source: NameError::Malformed(name) });
            }
            self.expect(Tok::Equals)?;
            let body = self.int_choice()?;
            if defs.insert(name.clone(), body).is_some() {
                return Err(SpecError::DuplicateDefinition(name).into());
            }
            // anything other than the start of the next definition is junk
            if *self.peek() != Tok::Eof && !matches!((self.peek(), self.peek_at(1)), (Tok::Ident(_), Tok::Equals)) {
                return self.error(&["an operator", "a new definition", "end of input"]);
            }
        }
        if defs.is_empty() {
            return self.error(&["a process definition"]);
        }
        let main = if defs.contains_key("MAIN") {
            "MAIN".to_string()
        } else {
            defs.get_index(0).unwrap().0.clone()
        };
        Ok(CspSpec::new(defs, main)?)
    }

    fn int_choice(&mut self) -> Result<CspProcess, ParseError> {
        let mut left = self.ext_choice()?;
        while *self.peek() == Tok::IntChoice {
            self.bump();
            let right = self.ext_choice()?;
            left = CspProcess::IntChoice(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn ext_choice(&mut self) -> Result<CspProcess, ParseError> {
        let mut left = self.parallel()?;
        while *self.peek() == Tok::ExtChoice {
            self.bump();
            let right = self.parallel()?;
            left = CspProcess::ExtChoice(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn parallel(&mut self) -> Result<CspProcess, ParseError> {
        let mut left = self.sequence()?;
        loop {
            match self.peek() {
                Tok::Interleave => {
                    self.bump();
                    let right = self.sequence()?;
                    left = CspProcess::Interleave(Box::new(left), Box::new(right));
                }
                Tok::ParOpen => {
                    self.bump();
                    let sync = self.event_set()?;
                    self.expect(Tok::ParClose)?;
                    let right = self.sequence()?;
                    left = CspProcess::GenPar(Box::new(left), Box::new(right), sync);
                }
                _ => return Ok(left),
            }
        }
    }

    fn sequence(&mut self) -> Result<CspProcess, ParseError> {
        let mut left = self.interrupt()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let right = self.interrupt()?;
            left = CspProcess::Seq(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn interrupt(&mut self) -> Result<CspProcess, ParseError> {
        let mut left = self.prefix()?;
        while *self.peek() == Tok::Interrupt {
            self.bump();
            let right = self.prefix()?;
            left = CspProcess::Interrupt(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn prefix(&mut self) -> Result<CspProcess, ParseError> {
        if matches!((self.peek(), self.peek_at(1)), (Tok::Ident(_), Tok::Arrow)) {
            let event = self.event()?;
            self.bump();
            let cont = self.prefix()?;
            return Ok(CspProcess::Prefix(event, Box::new(cont)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<CspProcess, ParseError> {
        let mut p = self.atom()?;
        loop {
            match self.peek() {
                Tok::Backslash => {
                    self.bump();
                    let hidden = self.event_set()?;
                    p = CspProcess::Hide(Box::new(p), hidden);
                }
                Tok::RenameOpen => {
                    self.bump();
                    let map = self.rename_map()?;
                    p = CspProcess::Rename(Box::new(p), map);
                }
                _ => return Ok(p),
            }
        }
    }

    fn atom(&mut self) -> Result<CspProcess, ParseError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let p = self.int_choice()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(name) if name == "STOP" => {
                self.bump();
                Ok(CspProcess::Stop)
            }
            Tok::Ident(name) if name == "SKIP" => {
                self.bump();
                Ok(CspProcess::Skip)
            }
            Tok::Ident(name) if *self.peek_at(1) != Tok::Equals => {
                let at = self.here();
                if !is_identifier(&name) {
                    return Err(ParseError::Name { at, source: NameError::Malformed(name) });
                }
                self.bump();
                Ok(CspProcess::Ref(name))
            }
            _ => self.error(&["`STOP`", "`SKIP`", "a process name", "an event prefix", "`(`"]),
        }
    }

    fn event_set(&mut self) -> Result<BTreeSet<EventName>, ParseError> {
        self.expect(Tok::LBrace)?;
        let mut set = BTreeSet::new();
        if *self.peek() == Tok::RBrace {
            self.bump();
            return Ok(set);
        }
        loop {
            set.insert(self.event()?);
            match self.bump() {
                Tok::Comma => continue,
                Tok::RBrace => return Ok(set),
                _ => {
                    self.pos -= 1;
                    return self.error(&["`,`", "`}`"]);
                }
            }
        }
    }

    fn rename_map(&mut self) -> Result<BTreeMap<EventName, EventName>, ParseError> {
        let mut map = BTreeMap::new();
        loop {
            let from = self.event()?;
            self.expect(Tok::LeftArrow)?;
            let to = self.event()?;
            if map.insert(from.clone(), to).is_some() {
                return Err(SpecError::DuplicateRename(from.to_string()).into());
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::RenameClose => return Ok(map),
                _ => {
                    self.pos -= 1;
                    return self.error(&["`,`", "`]]`"]);
                }
            }
        }
    }
}

/// Parses a `.tcsp` source into a closed, guarded specification.
pub fn parse(source: &str) -> Result<CspSpec, ParseError> {
    let toks = lex(source)?;
    Parser { toks, pos: 0 }.spec()
}

/// Parses a single process expression (no definitions, no references).
pub fn parse_process(source: &str) -> Result<CspProcess, ParseError> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    let proc = p.int_choice()?;
    if *p.peek() != Tok::Eof {
        return p.error(&["an operator", "end of input"]);
    }
    Ok(proc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ads_parses_with_three_definitions() {
        let spec = parse(
            "ADS = Controller [|{close}|] Lighting\n\
             Controller = open -> tock -> close -> Controller\n\
             Lighting = close -> offLight -> Lighting",
        )
        .unwrap();
        assert_eq!(spec.definitions().len(), 3);
        assert_eq!(spec.main(), "ADS");
        match spec.main_process() {
            CspProcess::GenPar(_, _, sync) => {
                assert_eq!(sync.iter().map(|e| e.as_str()).collect::<Vec<_>>(), vec!["close"]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stop_alone() {
        let spec = parse("P = STOP").unwrap();
        assert_eq!(spec.main(), "P");
        assert_eq!(spec.main_process(), &CspProcess::Stop);
    }

    #[test]
    fn external_choice_of_prefixes() {
        let spec = parse("Pe = (left->STOP)[](right->STOP)").unwrap();
        assert_eq!(
            spec.main_process(),
            &CspProcess::ext_choice(
                CspProcess::prefix("left", CspProcess::Stop),
                CspProcess::prefix("right", CspProcess::Stop)
            )
        );
    }

    #[test]
    fn main_definition_wins_over_first() {
        let spec = parse("A = STOP\nMAIN = A").unwrap();
        assert_eq!(spec.main(), "MAIN");
    }

    #[test]
    fn precedence_matches_documentation() {
        // hiding binds tighter than prefix, prefix tighter than interrupt, ...
        let p = parse_process("a -> STOP \\ {a} /\\ b -> SKIP ; SKIP ||| STOP [] STOP |~| SKIP").unwrap();
        let expected = CspProcess::int_choice(
            CspProcess::ext_choice(
                CspProcess::interleave(
                    CspProcess::seq(
                        CspProcess::interrupt(
                            CspProcess::prefix("a", CspProcess::hide(CspProcess::Stop, &["a"])),
                            CspProcess::prefix("b", CspProcess::Skip),
                        ),
                        CspProcess::Skip,
                    ),
                    CspProcess::Stop,
                ),
                CspProcess::Stop,
            ),
            CspProcess::Skip,
        );
        assert_eq!(p, expected);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let spec = parse("-- a comment\n\nP = a -> STOP -- trailing\n").unwrap();
        assert_eq!(spec.main_process(), &CspProcess::prefix("a", CspProcess::Stop));
    }

    #[test]
    fn syntax_error_reports_position_and_expectation() {
        let err = parse("P = a -> ").unwrap_err();
        match err {
            ParseError::Syntax { expected, .. } => assert!(expected.iter().any(|e| e.contains("STOP"))),
            other => panic!("{other:?}"),
        }
        let err = parse("P = (a -> STOP").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { ref expected, .. } if expected == &vec!["`)`".to_string()]));
        let err = parse("P = a -> STOP\n  & Q").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { at: Position { line: 2, column: 3 }, .. }));
    }

    #[test]
    fn semantic_errors_surface() {
        assert!(matches!(parse("P = Q"), Err(ParseError::Spec(SpecError::Unresolved { .. }))));
        assert!(matches!(parse("P = P [] STOP"), Err(ParseError::Spec(SpecError::Unguarded { .. }))));
        assert!(matches!(parse("P = tau -> STOP"), Err(ParseError::Name { .. })));
        assert!(matches!(parse("P = a -> STOP \\ {tock}"), Err(ParseError::Spec(SpecError::TockInSet { .. }))));
        assert!(matches!(
            parse("P = (a -> STOP)[[a <- b, a <- c]]"),
            Err(ParseError::Spec(SpecError::DuplicateRename(_)))
        ));
        assert!(matches!(parse("P = STOP\nP = SKIP"), Err(ParseError::Spec(SpecError::DuplicateDefinition(_)))));
    }

    #[test]
    fn rename_and_sets() {
        let p = parse_process("(a -> STOP)[[a <- b]] [|{}|] STOP").unwrap();
        assert_eq!(
            p,
            CspProcess::gen_par(CspProcess::rename(CspProcess::prefix("a", CspProcess::Stop), &[("a", "b")]), CspProcess::Stop, &[])
        );
    }
}
