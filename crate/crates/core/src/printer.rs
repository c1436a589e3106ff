//! Pretty-printer for expressions, machines and contexts.
//!
//! ASCII output parses back to a structurally equal tree (parentheses are
//! inserted only where precedence or associativity demands them). The
//! Unicode notation is meant for documentation and is not re-parsed.

use crate::ast::{Assoc, Context, Event, EventKind, Expr, Labelled, Machine, Quantifier, UnOp};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Notation {
    #[default]
    Ascii,
    Unicode,
}

/// Binding strength of an expression when it appears as an operand.
fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Unary(UnOp::Not, _) => 5,
        _ => 20,
    }
}

pub fn print_expr(e: &Expr, n: Notation) -> String {
    let mut out = String::new();
    write_expr(e, n, &mut out);
    out
}

fn write_operand(e: &Expr, n: Notation, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_expr(e, n, out);
        out.push(')');
    } else {
        write_expr(e, n, out);
    }
}

fn write_list(items: &[Expr], n: Notation, out: &mut String) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(item, n, out);
    }
}

fn write_expr(e: &Expr, n: Notation, out: &mut String) {
    let uni = n == Notation::Unicode;
    match e {
        Expr::Ident(name) => out.push_str(name),
        Expr::Int(v) => out.push_str(&v.to_string()),
        Expr::Bool(true) => out.push_str("TRUE"),
        Expr::Bool(false) => out.push_str("FALSE"),
        Expr::Lit(v @ Value::Pair(_)) => {
            out.push('(');
            out.push_str(&v.render());
            out.push(')');
        }
        Expr::Lit(v) => out.push_str(&v.render()),
        Expr::SetEnum(items) => {
            if items.is_empty() && uni {
                out.push('∅');
            } else {
                out.push('{');
                write_list(items, n, out);
                out.push('}');
            }
        }
        Expr::Comprehension { pattern, pred, .. } => {
            out.push('{');
            write_expr(pattern, n, out);
            out.push_str(" | ");
            write_expr(pred, n, out);
            out.push('}');
        }
        Expr::Quant { q, vars, body } => {
            out.push_str(match (q, uni) {
                (Quantifier::ForAll, false) => "!",
                (Quantifier::Exists, false) => "#",
                (Quantifier::ForAll, true) => "∀",
                (Quantifier::Exists, true) => "∃",
            });
            out.push_str(&vars.iter().map(|v| &**v).collect::<Vec<_>>().join(","));
            out.push_str(".(");
            write_expr(body, n, out);
            out.push(')');
        }
        Expr::Partition(items) => {
            out.push_str("partition(");
            write_list(items, n, out);
            out.push(')');
        }
        Expr::Unary(UnOp::Not, x) => {
            out.push_str(if uni { "¬" } else { "not " });
            write_operand(x, n, strength(x) < 6, out);
        }
        Expr::Unary(UnOp::Inverse, x) => {
            write_operand(x, n, strength(x) < 20, out);
            out.push(if uni { '∼' } else { '~' });
        }
        Expr::Unary(op, x) => {
            out.push_str(match (op, uni) {
                (UnOp::Dom, _) => "dom",
                (UnOp::Ran, _) => "ran",
                (UnOp::Pow, false) => "POW",
                (UnOp::Pow, true) => "ℙ",
                (UnOp::Card, _) => "card",
                _ => unreachable!(),
            });
            out.push('(');
            write_expr(x, n, out);
            out.push(')');
        }
        Expr::Image(r, s) => {
            write_operand(r, n, strength(r) < 20, out);
            out.push('[');
            write_expr(s, n, out);
            out.push(']');
        }
        Expr::Apply(f, x) => {
            write_operand(f, n, strength(f) < 20, out);
            out.push('(');
            write_expr(x, n, out);
            out.push(')');
        }
        Expr::Binary(op, l, r) => {
            let p = op.precedence();
            let (sl, sr) = (strength(l), strength(r));
            // different set operators are never mixed without parentheses
            let mixed = |x: &Expr| matches!(x, Expr::Binary(o, ..) if p == 9 && *o != *op);
            let wrap_l = sl < p || (sl == p && (op.assoc() != Assoc::Left || mixed(l)));
            let wrap_r = sr < p || (sr == p && op.assoc() != Assoc::Right);
            write_operand(l, n, wrap_l, out);
            out.push(' ');
            out.push_str(if uni { op.unicode() } else { op.ascii() });
            out.push(' ');
            write_operand(r, n, wrap_r, out);
        }
    }
}

fn write_labelled(items: &[Labelled], indent: &str, n: Notation, out: &mut String) {
    for l in items {
        out.push_str(&format!(
            "{indent}@{} {}\n",
            l.label,
            print_expr(&l.pred, n)
        ));
    }
}

fn write_event(e: &Event, n: Notation, out: &mut String) {
    out.push_str(&format!("  event {}", e.name));
    match &e.kind {
        EventKind::Plain => {}
        EventKind::Extends(p) => out.push_str(&format!(" extends {p}")),
        EventKind::Refines(p) => out.push_str(&format!(" refines {p}")),
    }
    out.push('\n');
    if !e.params.is_empty() {
        let ps: Vec<&str> = e.params.iter().map(|p| &**p).collect();
        out.push_str(&format!("  any {} where\n", ps.join(" ")));
        write_labelled(&e.guards, "    ", n, out);
    } else if !e.guards.is_empty() {
        out.push_str("  where\n");
        write_labelled(&e.guards, "    ", n, out);
    }
    if !e.actions.is_empty() {
        out.push_str("  then\n");
        for a in &e.actions {
            let lhs = match &a.arg {
                Some(arg) => format!("{}({})", a.var, print_expr(arg, n)),
                None => a.var.to_string(),
            };
            out.push_str(&format!(
                "    @{} {lhs} := {}\n",
                a.label,
                print_expr(&a.value, n)
            ));
        }
    }
    out.push_str("  end\n");
}

pub fn print_machine(m: &Machine, n: Notation) -> String {
    let mut out = format!("machine {}", m.name);
    if let Some(r) = &m.refines {
        out.push_str(&format!(" refines {r}"));
    }
    if !m.sees.is_empty() {
        out.push_str(&format!(" sees {}", m.sees.join(" ")));
    }
    out.push('\n');
    if !m.variables.is_empty() {
        let vs: Vec<&str> = m.variables.iter().map(|v| &**v).collect();
        out.push_str(&format!("variables {}\n", vs.join(" ")));
    }
    if !m.invariants.is_empty() {
        out.push_str("invariants\n");
        write_labelled(&m.invariants, "  ", n, &mut out);
    }
    if !m.events.is_empty() {
        out.push_str("events\n");
        for e in &m.events {
            write_event(e, n, &mut out);
        }
    }
    out.push_str("end\n");
    out
}

pub fn print_context(c: &Context, n: Notation) -> String {
    let mut out = format!("context {}", c.name);
    if let Some(p) = &c.extends {
        out.push_str(&format!(" extends {p}"));
    }
    out.push('\n');
    if !c.sets.is_empty() {
        let s: Vec<&str> = c.sets.iter().map(|v| &**v).collect();
        out.push_str(&format!("sets {}\n", s.join(" ")));
    }
    if !c.constants.is_empty() {
        let s: Vec<&str> = c.constants.iter().map(|v| &**v).collect();
        out.push_str(&format!("constants {}\n", s.join(" ")));
    }
    if !c.axioms.is_empty() {
        out.push_str("axioms\n");
        write_labelled(&c.axioms, "  ", n, &mut out);
    }
    out.push_str("end\n");
    out
}
