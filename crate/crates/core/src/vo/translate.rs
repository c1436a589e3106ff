//! Translation of abstract expressions through a functional gluing map.

use std::collections::BTreeSet;

use crate::ast::{Expr, Name};
use crate::error::{Error, Result};
use crate::project::GluingMap;

/// Replaces every free abstract variable of `e` by its gluing expression.
/// Bound variables that would capture a name of a gluing expression are
/// renamed first. `abstract_vars` are the abstract machine's variables;
/// each one occurring free in `e` needs a glue entry.
pub fn translate_expression(e: &Expr, glue: &GluingMap, abstract_vars: &[Name]) -> Result<Expr> {
    let free = e.free_vars();
    let missing: Vec<&str> = abstract_vars
        .iter()
        .filter(|v| free.contains(*v) && glue.get(v).is_none())
        .map(|v| &**v)
        .collect();
    if !missing.is_empty() {
        return Err(Error::check(
            "E_UNGLUED_VARIABLE",
            format!("no glue for {}", missing.join(", ")),
        ));
    }
    let map: Vec<(Name, Expr)> = glue
        .glue
        .iter()
        .filter(|(v, _)| abstract_vars.contains(v))
        .cloned()
        .collect();
    Ok(substitute(e, &map))
}

/// Capture-avoiding simultaneous substitution of free identifiers.
pub fn substitute(e: &Expr, map: &[(Name, Expr)]) -> Expr {
    if map.is_empty() {
        return e.clone();
    }
    let sub = |x: &Expr| Box::new(substitute(x, map));
    match e {
        Expr::Ident(n) => match map.iter().find(|(v, _)| v == n) {
            Some((_, r)) => r.clone(),
            None => e.clone(),
        },
        Expr::Int(_) | Expr::Bool(_) | Expr::Lit(_) => e.clone(),
        Expr::SetEnum(items) => Expr::SetEnum(items.iter().map(|x| substitute(x, map)).collect()),
        Expr::Partition(items) => {
            Expr::Partition(items.iter().map(|x| substitute(x, map)).collect())
        }
        Expr::Unary(op, x) => Expr::Unary(*op, sub(x)),
        Expr::Binary(op, l, r) => Expr::Binary(*op, sub(l), sub(r)),
        Expr::Image(l, r) => Expr::Image(sub(l), sub(r)),
        Expr::Apply(l, r) => Expr::Apply(sub(l), sub(r)),
        Expr::Quant { q, vars, body } => {
            let (vars, mut parts) = under_binder(vars, vec![(**body).clone()], map);
            Expr::Quant {
                q: *q,
                vars,
                body: Box::new(parts.remove(0)),
            }
        }
        Expr::Comprehension {
            vars,
            pattern,
            pred,
        } => {
            let (vars, mut parts) =
                under_binder(vars, vec![(**pattern).clone(), (**pred).clone()], map);
            let pred = parts.pop().unwrap();
            let pattern = parts.pop().unwrap();
            Expr::Comprehension {
                vars,
                pattern: Box::new(pattern),
                pred: Box::new(pred),
            }
        }
    }
}

/// Substitutes inside the scope of `vars`, renaming bound variables that
/// occur free in an incoming replacement.
fn under_binder(vars: &[Name], parts: Vec<Expr>, map: &[(Name, Expr)]) -> (Vec<Name>, Vec<Expr>) {
    let inner: Vec<(Name, Expr)> = map
        .iter()
        .filter(|(v, _)| !vars.contains(v) && parts.iter().any(|p| p.mentions(v)))
        .cloned()
        .collect();
    let incoming: BTreeSet<Name> = inner.iter().flat_map(|(_, r)| r.free_vars()).collect();
    let mut used: BTreeSet<Name> = incoming.clone();
    for p in &parts {
        used.extend(p.free_vars());
    }
    used.extend(vars.iter().cloned());

    let mut new_vars = Vec::with_capacity(vars.len());
    let mut renames: Vec<(Name, Expr)> = Vec::new();
    for v in vars {
        if incoming.contains(v) {
            let fresh = fresh_name(v, &used);
            used.insert(fresh.clone());
            renames.push((v.clone(), Expr::Ident(fresh.clone())));
            new_vars.push(fresh);
        } else {
            new_vars.push(v.clone());
        }
    }
    let parts = parts
        .iter()
        .map(|p| substitute(&substitute(p, &renames), &inner))
        .collect();
    (new_vars, parts)
}

fn fresh_name(base: &Name, used: &BTreeSet<Name>) -> Name {
    (1..)
        .map(|k| Name::from(format!("{base}_{k}")))
        .find(|n| !used.contains(n))
        .unwrap()
}
