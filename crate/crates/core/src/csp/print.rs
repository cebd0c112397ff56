use std::fmt::Write;

use super::ast::{CspProcess, CspSpec, EventName};

/// Renders a process in the concrete syntax accepted by [`parse_process`].
/// Every compound operand is parenthesised, so the output never depends on
/// operator precedence.
///
/// [`parse_process`]: super::parse_process
pub fn print_process(p: &CspProcess) -> String {
    let mut out = String::new();
    write_process(&mut out, p);
    out
}

/// Renders a whole specification, main definition first unless it is `MAIN`.
pub fn print_spec(spec: &CspSpec) -> String {
    let mut out = String::new();
    let mut names: Vec<&String> = spec.definitions().keys().collect();
    if spec.main() != "MAIN" {
        names.retain(|n| *n != spec.main());
        names.insert(0, spec.definitions().get_key_value(spec.main()).unwrap().0);
    }
    for name in names {
        let _ = write!(out, "{name} = ");
        write_process(&mut out, &spec.definitions()[name]);
        out.push('\n');
    }
    out
}

fn write_process(out: &mut String, p: &CspProcess) {
    use CspProcess::*;
    match p {
        Prefix(e, cont) => {
            let _ = write!(out, "{e} -> ");
            match **cont {
                Prefix(..) => write_process(out, cont),
                _ => write_operand(out, cont),
            }
        }
        Seq(l, r) => binary(out, l, " ; ", r),
        Interleave(l, r) => binary(out, l, " ||| ", r),
        ExtChoice(l, r) => binary(out, l, " [] ", r),
        IntChoice(l, r) => binary(out, l, " |~| ", r),
        Interrupt(l, r) => binary(out, l, " /\\ ", r),
        GenPar(l, r, sync) => {
            write_operand(out, l);
            out.push_str(" [|");
            write_set(out, sync.iter());
            out.push_str("|] ");
            write_operand(out, r);
        }
        Hide(body, hidden) => {
            write_operand(out, body);
            out.push_str(" \\ ");
            write_set(out, hidden.iter());
        }
        Rename(body, map) => {
            write_operand(out, body);
            out.push_str("[[");
            let pairs: Vec<String> = map.iter().map(|(a, b)| format!("{a} <- {b}")).collect();
            out.push_str(&pairs.join(", "));
            out.push_str("]]");
        }
        Stop | Skip | Ref(_) | Omega => write_operand(out, p),
    }
}

fn binary(out: &mut String, l: &CspProcess, op: &str, r: &CspProcess) {
    write_operand(out, l);
    out.push_str(op);
    write_operand(out, r);
}

fn write_operand(out: &mut String, p: &CspProcess) {
    match p {
        CspProcess::Stop => out.push_str("STOP"),
        CspProcess::Skip => out.push_str("SKIP"),
        // not parseable; only shows up in diagnostics of intermediate states
        CspProcess::Omega => out.push_str("Omega"),
        CspProcess::Ref(name) => out.push_str(name),
        other => {
            out.push('(');
            write_process(out, other);
            out.push(')');
        }
    }
}

fn write_set<'a>(out: &mut String, events: impl Iterator<Item = &'a EventName>) {
    let names: Vec<&str> = events.map(EventName::as_str).collect();
    let _ = write!(out, "{{{}}}", names.join(", "));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{parse, parse_process};

    #[test]
    fn prints_ads_readably() {
        let src = "ADS = Controller [|{close}|] Lighting\n\
                   Controller = open -> tock -> close -> Controller\n\
                   Lighting = close -> offLight -> Lighting\n";
        let spec = parse(src).unwrap();
        assert_eq!(
            print_spec(&spec),
            src
        );
        assert_eq!(parse(&print_spec(&spec)).unwrap(), spec);
    }

    #[test]
    fn postfix_operators_round_trip() {
        let p = parse_process("((a -> STOP) \\ {a})[[b <- c]] /\\ SKIP").unwrap();
        assert_eq!(parse_process(&print_process(&p)).unwrap(), p);
    }
}
