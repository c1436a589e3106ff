//! Front-end for the specification DSL (`.mch`, `.ctx`), VO files (`.vo`)
//! and value/expression snippets used by traces, glue files and the CLI.
//!
//! The surface syntax is ASCII B: `:` membership, `<:` subset, `\/` and
//! `/\`, `|->` maplets, `<-> --> +-> >+>` relation spaces, `!x.(P)` and
//! `#x.(P)` quantifiers, `{x | P}` comprehension and `@label` annotations.

mod component;
mod expr;
mod lexer;
mod vo;

pub use component::{parse_context, parse_machine};
pub use vo::parse_vo_file;

use crate::ast::{BinOp, Expr};
use crate::error::{Diagnostic, Diagnostics, Pos};
use crate::value::Value;
use expr::TokenStream;

/// Parses a standalone expression or predicate.
pub fn parse_expr(text: &str) -> Result<Expr, Diagnostics> {
    let mut ts = TokenStream::new(lexer::tokenize(text)?);
    let e = ts.expr()?;
    if !ts.at_eof() {
        return Err(ts.unexpected("end of expression").into());
    }
    Ok(e)
}

/// Parses a literal value: identifiers become atoms, `{..}` sets, `a |-> b`
/// pairs.
pub fn parse_value(text: &str) -> Result<Value, Diagnostics> {
    let e = parse_expr(text)?;
    literal_value(&e).ok_or_else(|| {
        Diagnostics::single(Diagnostic::error(
            "E_NOT_A_VALUE",
            Pos { line: 1, col: 1 },
            format!("`{text}` is not a literal value"),
        ))
    })
}

pub(crate) fn literal_value(e: &Expr) -> Option<Value> {
    Some(match e {
        Expr::Ident(n) => Value::Atom(n.clone()),
        Expr::Int(n) => Value::Int(*n),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Lit(v) => v.clone(),
        Expr::SetEnum(items) => Value::set(
            items
                .iter()
                .map(literal_value)
                .collect::<Option<Vec<_>>>()?,
        ),
        Expr::Binary(BinOp::Maplet, l, r) => Value::pair(literal_value(l)?, literal_value(r)?),
        _ => return None,
    })
}
