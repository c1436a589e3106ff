use std::collections::HashSet;
use std::sync::Arc;

use super::expr::TokenStream;
use super::lexer::{tokenize, Tok};
use crate::ast::{Action, Context, Event, EventKind, Labelled, Machine, Name};
use crate::error::{Diagnostic, Diagnostics, Pos};

type PResult<T> = Result<T, Diagnostic>;

/// Section keywords that end an identifier list.
const SECTION_WORDS: &[&str] = &[
    "refines",
    "sees",
    "extends",
    "variables",
    "invariants",
    "events",
    "event",
    "any",
    "where",
    "when",
    "then",
    "end",
    "sets",
    "constants",
    "axioms",
];

pub fn parse_machine(text: &str) -> Result<Machine, Diagnostics> {
    let mut ts = TokenStream::new(tokenize(text)?);
    let m = machine(&mut ts)?;
    if !ts.at_eof() {
        return Err(ts.unexpected("end of file").into());
    }
    let problems = check_machine(&m);
    if problems.is_empty() {
        Ok(m)
    } else {
        Err(Diagnostics(problems))
    }
}

pub fn parse_context(text: &str) -> Result<Context, Diagnostics> {
    let mut ts = TokenStream::new(tokenize(text)?);
    let c = context(&mut ts)?;
    if !ts.at_eof() {
        return Err(ts.unexpected("end of file").into());
    }
    let problems = check_context(&c);
    if problems.is_empty() {
        Ok(c)
    } else {
        Err(Diagnostics(problems))
    }
}

fn names(ts: &mut TokenStream) -> Vec<(String, Pos)> {
    let mut out = Vec::new();
    loop {
        match ts.peek() {
            Tok::Ident(w) if SECTION_WORDS.contains(&w.as_str()) => break,
            _ => {}
        }
        match ts.maybe_ident() {
            Some(n) => out.push(n),
            None => break,
        }
    }
    out
}

fn labelled_preds(ts: &mut TokenStream) -> PResult<Vec<Labelled>> {
    let mut out = Vec::new();
    while let Tok::Label(l) = ts.peek().clone() {
        let pos = ts.pos();
        ts.bump();
        let pred = ts.expr()?;
        out.push(Labelled {
            label: l,
            pred,
            pos,
        });
    }
    Ok(out)
}

fn machine(ts: &mut TokenStream) -> PResult<Machine> {
    ts.expect_word("machine")?;
    let name = ts.expect_ident()?;
    let refines = if ts.eat_word("refines") {
        Some(ts.expect_ident()?)
    } else {
        None
    };
    let mut sees = Vec::new();
    if ts.eat_word("sees") {
        sees = names(ts).into_iter().map(|(n, _)| n).collect();
        if sees.is_empty() {
            return Err(ts.unexpected("context name"));
        }
    }
    let mut variables = Vec::new();
    let mut var_pos = Vec::new();
    if ts.eat_word("variables") {
        for (n, p) in names(ts) {
            variables.push(Arc::<str>::from(n.as_str()));
            var_pos.push(p);
        }
    }
    let invariants = if ts.eat_word("invariants") {
        labelled_preds(ts)?
    } else {
        Vec::new()
    };
    let mut events = Vec::new();
    let mut event_pos = Vec::new();
    if ts.eat_word("events") {
        while ts.is_word("event") {
            event_pos.push(ts.pos());
            events.push(event(ts)?);
        }
    }
    ts.expect_word("end")?;
    let m = Machine {
        name,
        refines,
        sees,
        variables,
        invariants,
        events,
    };
    // duplicate variables and events are positional errors
    let mut seen = HashSet::new();
    for (v, p) in m.variables.iter().zip(&var_pos) {
        if !seen.insert(v.clone()) {
            return Err(Diagnostic::error(
                "E_DUP_VARIABLE",
                *p,
                format!("variable `{v}` declared twice"),
            ));
        }
    }
    let mut seen = HashSet::new();
    for (e, p) in m.events.iter().zip(&event_pos) {
        if !seen.insert(e.name.as_str()) {
            return Err(Diagnostic::error(
                "E_DUP_EVENT",
                *p,
                format!("event `{}` declared twice", e.name),
            ));
        }
    }
    Ok(m)
}

fn event(ts: &mut TokenStream) -> PResult<Event> {
    ts.expect_word("event")?;
    let name = match ts.peek().clone() {
        Tok::Ident(w) if !super::expr::is_keyword(&w) => {
            ts.bump();
            w
        }
        _ => return Err(ts.unexpected("event name")),
    };
    let kind = if ts.eat_word("extends") {
        EventKind::Extends(ts.expect_ident()?)
    } else if ts.eat_word("refines") {
        EventKind::Refines(ts.expect_ident()?)
    } else {
        EventKind::Plain
    };
    let mut params: Vec<Name> = Vec::new();
    let mut guards = Vec::new();
    if ts.eat_word("any") {
        let ps = names(ts);
        if ps.is_empty() {
            return Err(ts.unexpected("parameter name"));
        }
        let mut seen = HashSet::new();
        for (p, pos) in ps {
            if !seen.insert(p.clone()) {
                return Err(Diagnostic::error(
                    "E_DUP_PARAM",
                    pos,
                    format!("parameter `{p}` declared twice"),
                ));
            }
            params.push(Arc::from(p.as_str()));
        }
        if ts.eat_word("where") || ts.eat_word("when") {
            guards = labelled_preds(ts)?;
        }
    } else if ts.eat_word("where") || ts.eat_word("when") {
        guards = labelled_preds(ts)?;
    }
    let mut actions = Vec::new();
    if ts.eat_word("then") {
        while let Tok::Label(l) = ts.peek().clone() {
            let pos = ts.pos();
            ts.bump();
            let var = ts.expect_ident()?;
            let arg = if ts.eat_op("(") {
                let a = ts.expr()?;
                ts.expect_op(")")?;
                Some(a)
            } else {
                None
            };
            ts.expect_op(":=")?;
            let value = ts.expr()?;
            actions.push(Action {
                label: l,
                var: Arc::from(var.as_str()),
                arg,
                value,
                pos,
            });
        }
    }
    ts.expect_word("end")?;
    Ok(Event {
        name,
        kind,
        params,
        guards,
        actions,
    })
}

fn context(ts: &mut TokenStream) -> PResult<Context> {
    ts.expect_word("context")?;
    let name = ts.expect_ident()?;
    let extends = if ts.eat_word("extends") {
        Some(ts.expect_ident()?)
    } else {
        None
    };
    let mut declared: Vec<(String, Pos)> = Vec::new();
    let mut sets = Vec::new();
    if ts.eat_word("sets") {
        for (n, p) in names(ts) {
            sets.push(Arc::<str>::from(n.as_str()));
            declared.push((n, p));
        }
    }
    let mut constants = Vec::new();
    if ts.eat_word("constants") {
        for (n, p) in names(ts) {
            constants.push(Arc::<str>::from(n.as_str()));
            declared.push((n, p));
        }
    }
    let axioms = if ts.eat_word("axioms") {
        labelled_preds(ts)?
    } else {
        Vec::new()
    };
    ts.expect_word("end")?;
    let mut seen = HashSet::new();
    for (n, p) in &declared {
        if !seen.insert(n.as_str()) {
            return Err(Diagnostic::error(
                "E_DUP_CONSTANT",
                *p,
                format!("`{n}` declared twice"),
            ));
        }
    }
    Ok(Context {
        name,
        extends,
        sets,
        constants,
        axioms,
    })
}

fn dup_labels<'a>(
    items: impl Iterator<Item = (&'a str, Pos)>,
    scope: &str,
    out: &mut Vec<Diagnostic>,
) {
    let mut seen = HashSet::new();
    for (l, p) in items {
        if !seen.insert(l) {
            out.push(
                Diagnostic::error(
                    "E_DUP_LABEL",
                    p,
                    format!("label `@{l}` used twice in {scope}"),
                )
                .with_label(l),
            );
        }
    }
}

fn check_machine(m: &Machine) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    dup_labels(
        m.invariants.iter().map(|i| (i.label.as_str(), i.pos)),
        "invariants",
        &mut out,
    );
    for e in &m.events {
        let labels = e
            .guards
            .iter()
            .map(|g| (g.label.as_str(), g.pos))
            .chain(e.actions.iter().map(|a| (a.label.as_str(), a.pos)));
        dup_labels(labels, &format!("event `{}`", e.name), &mut out);
        let mut assigned = HashSet::new();
        for a in &e.actions {
            if !assigned.insert(a.var.clone()) {
                out.push(Diagnostic::error(
                    "E_DUP_ASSIGNMENT",
                    a.pos,
                    format!("variable `{}` assigned twice in event `{}`", a.var, e.name),
                ));
            }
        }
    }
    out
}

fn check_context(c: &Context) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    dup_labels(
        c.axioms.iter().map(|a| (a.label.as_str(), a.pos)),
        "axioms",
        &mut out,
    );
    out
}
