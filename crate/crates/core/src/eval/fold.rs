//! Constant folding: closed subexpressions are evaluated once and replaced by
//! their value, so that e.g. `rtbl~` is not recomputed in every state.

use crate::ast::{Expr, Name, UnOp};

use super::{Env, Frame};

/// Replaces every maximal subexpression of `e` that mentions only constants
/// of `env` by its value. Names in `shadow` (state variables, parameters)
/// are never treated as constants. Relation spaces and powersets are kept
/// symbolic, since membership in them is decided lazily; subexpressions
/// whose evaluation fails are kept as they are, so the error surfaces with
/// its usual context at run time.
pub fn fold_constants(e: &Expr, env: &Env, shadow: &[Name]) -> Expr {
    let mut shadow = shadow.to_vec();
    fold(e, env, &mut shadow)
}

fn fold(e: &Expr, env: &Env, shadow: &mut Vec<Name>) -> Expr {
    if worth_folding(e) && !symbolic(e) {
        let closed = e
            .free_vars()
            .iter()
            .all(|n| env.contains(n) && !shadow.contains(n));
        if closed {
            if let Ok(v) = Frame::new(env).eval(e) {
                return Expr::Lit(v);
            }
        }
    }
    let boxed = |x: &Expr, shadow: &mut Vec<Name>| Box::new(fold(x, env, shadow));
    match e {
        Expr::Ident(_) | Expr::Int(_) | Expr::Bool(_) | Expr::Lit(_) => e.clone(),
        Expr::SetEnum(items) => Expr::SetEnum(items.iter().map(|x| fold(x, env, shadow)).collect()),
        Expr::Partition(items) => {
            Expr::Partition(items.iter().map(|x| fold(x, env, shadow)).collect())
        }
        Expr::Comprehension {
            vars,
            pattern,
            pred,
        } => {
            let n = shadow.len();
            shadow.extend(vars.iter().cloned());
            // the pattern is left alone: its identifiers are the bound variables
            let pred = boxed(pred, shadow);
            shadow.truncate(n);
            Expr::Comprehension {
                vars: vars.clone(),
                pattern: pattern.clone(),
                pred,
            }
        }
        Expr::Quant { q, vars, body } => {
            let n = shadow.len();
            shadow.extend(vars.iter().cloned());
            let body = boxed(body, shadow);
            shadow.truncate(n);
            Expr::Quant {
                q: *q,
                vars: vars.clone(),
                body,
            }
        }
        Expr::Unary(op, x) => Expr::Unary(*op, boxed(x, shadow)),
        Expr::Binary(op, l, r) => Expr::Binary(*op, boxed(l, shadow), boxed(r, shadow)),
        Expr::Image(l, r) => Expr::Image(boxed(l, shadow), boxed(r, shadow)),
        Expr::Apply(l, r) => Expr::Apply(boxed(l, shadow), boxed(r, shadow)),
    }
}

/// Leaves are already as cheap as a literal.
fn worth_folding(e: &Expr) -> bool {
    !matches!(
        e,
        Expr::Ident(_) | Expr::Int(_) | Expr::Bool(_) | Expr::Lit(_)
    )
}

/// Mentions a relation space or powerset, which must stay lazy.
fn symbolic(e: &Expr) -> bool {
    match e {
        Expr::Binary(op, _, _) if op.is_function_space() => true,
        Expr::Unary(UnOp::Pow, _) => true,
        Expr::Ident(_) | Expr::Int(_) | Expr::Bool(_) | Expr::Lit(_) => false,
        Expr::SetEnum(items) | Expr::Partition(items) => items.iter().any(symbolic),
        Expr::Comprehension { pattern, pred, .. } => symbolic(pattern) || symbolic(pred),
        Expr::Quant { body, .. } => symbolic(body),
        Expr::Unary(_, x) => symbolic(x),
        Expr::Binary(_, l, r) | Expr::Image(l, r) | Expr::Apply(l, r) => symbolic(l) || symbolic(r),
    }
}
