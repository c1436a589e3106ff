//! Scope analysis: every free identifier must name a carrier set, a constant,
//! a machine variable, an event parameter or a bound variable.

use std::collections::HashSet;

use crate::ast::{Context, Expr, Machine, Name};
use crate::error::{Diagnostic, Pos};

fn unresolved(
    e: &Expr,
    known: &dyn Fn(&str) -> bool,
    pos: Pos,
    label: &str,
    what: &str,
) -> Vec<Diagnostic> {
    e.free_vars()
        .iter()
        .filter(|n| !known(n))
        .map(|n| {
            Diagnostic::error(
                "E_SCOPE",
                pos,
                format!("unknown identifier `{n}` in {what}"),
            )
            .with_label(label)
        })
        .collect()
}

/// Checks a context chain (root first); `extra` are names supplied by
/// scopes (e.g. explicitly named route atoms).
pub fn check_contexts(chain: &[&Context], extra: &HashSet<Name>) -> Vec<Diagnostic> {
    let mut known: HashSet<Name> = extra.clone();
    let mut out = Vec::new();
    for c in chain {
        known.extend(c.sets.iter().cloned());
        known.extend(c.constants.iter().cloned());
    }
    for c in chain {
        for ax in &c.axioms {
            out.extend(unresolved(
                &ax.pred,
                &|n| known.contains(n),
                ax.pos,
                &ax.label,
                &format!("axiom of `{}`", c.name),
            ));
        }
    }
    out
}

/// Checks a (flattened) machine against the names of its contexts.
/// Identifiers in `abstract_vars` are accepted in invariants only: those
/// invariants glue the machine to the one it refines.
pub fn check_machine(
    m: &Machine,
    statics: &HashSet<Name>,
    abstract_vars: &[Name],
) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let is_var = |n: &str| m.variables.iter().any(|v| &**v == n);
    for inv in &m.invariants {
        out.extend(unresolved(
            &inv.pred,
            &|n| statics.contains(n) || is_var(n) || abstract_vars.iter().any(|a| &**a == n),
            inv.pos,
            &inv.label,
            "invariant",
        ));
    }
    for e in &m.events {
        let known =
            |n: &str| statics.contains(n) || is_var(n) || e.params.iter().any(|p| &**p == n);
        let what = format!("event `{}`", e.name);
        for g in &e.guards {
            out.extend(unresolved(&g.pred, &known, g.pos, &g.label, &what));
        }
        for a in &e.actions {
            if !is_var(&a.var) {
                out.push(
                    Diagnostic::error(
                        "E_SCOPE",
                        a.pos,
                        format!(
                            "action assigns `{}`, which is not a variable of `{}`",
                            a.var, m.name
                        ),
                    )
                    .with_label(&a.label),
                );
            }
            if let Some(arg) = &a.arg {
                out.extend(unresolved(arg, &known, a.pos, &a.label, &what));
            }
            out.extend(unresolved(&a.value, &known, a.pos, &a.label, &what));
        }
    }
    match m.initialisation() {
        None => out.push(Diagnostic::error(
            "E_NO_INITIALISATION",
            Pos::default(),
            format!("machine `{}` has no INITIALISATION event", m.name),
        )),
        Some(init) => {
            if !init.params.is_empty() || !init.guards.is_empty() {
                out.push(Diagnostic::error(
                    "E_INIT_GUARDED",
                    Pos::default(),
                    "INITIALISATION may have neither parameters nor guards",
                ));
            }
            for v in &m.variables {
                if !init.actions.iter().any(|a| a.var == *v && a.arg.is_none()) {
                    out.push(Diagnostic::error(
                        "E_INIT_INCOMPLETE",
                        Pos::default(),
                        format!("INITIALISATION of `{}` does not assign `{v}`", m.name),
                    ));
                }
            }
        }
    }
    out
}
