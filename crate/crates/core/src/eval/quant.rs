//! Domain inference and enumeration for bound variables.
//!
//! A bound variable gets its domain from a conjunct of the guard:
//! `x : E` (elements of `E`), `x <: E` (subsets of `E`), `x = E` (the single
//! value of `E`), a maplet pattern `x |-> y : E`, or a disjunction
//! `x : E1 or x : E2` (union). Definers are picked in dependency order, so a
//! domain may mention variables bound earlier (`r : dom(nxt) & b : ran(nxt(r))`).
//! Every other conjunct filters as soon as all its bound variables have values.

use std::sync::Arc;

use super::{spaces, Frame, POW_LIMIT};
use crate::ast::{BinOp, Expr, Name};
use crate::error::EvalError;
use crate::value::{self, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
enum Source<'e> {
    /// Union of the elements of each set.
    In(Vec<&'e Expr>),
    /// Subsets of the set.
    Sub(&'e Expr),
    Eq(&'e Expr),
}

#[derive(Debug, Clone)]
struct Step<'e> {
    pattern: &'e Expr,
    source: Source<'e>,
    /// Filters that become closed once this step has bound its variables.
    checks: Vec<&'e Expr>,
}

#[derive(Debug, Clone)]
pub(crate) struct Plan<'e> {
    /// Conjuncts with no bound variables; checked once up front.
    pre: Vec<&'e Expr>,
    steps: Vec<Step<'e>>,
    /// Conjuncts that are not definers when filtering is disabled.
    pub rest: Vec<&'e Expr>,
}

fn pattern_vars(p: &Expr, out: &mut Vec<Name>) -> bool {
    match p {
        Expr::Ident(n) => {
            out.push(n.clone());
            true
        }
        Expr::Binary(BinOp::Maplet, l, r) => pattern_vars(l, out) && pattern_vars(r, out),
        _ => false,
    }
}

/// Recognises a domain-defining conjunct.
fn definer(c: &Expr) -> Option<(&Expr, Source<'_>)> {
    match c {
        Expr::Binary(BinOp::In, p, e) => Some((p, Source::In(vec![e]))),
        Expr::Binary(BinOp::Subset, p, e) if matches!(**p, Expr::Ident(_)) => {
            Some((p, Source::Sub(e)))
        }
        Expr::Binary(BinOp::Eq, p, e) if matches!(**p, Expr::Ident(_)) => Some((p, Source::Eq(e))),
        Expr::Binary(BinOp::Or, ..) => {
            let mut alts = Vec::new();
            fn flatten<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
                match e {
                    Expr::Binary(BinOp::Or, l, r) => {
                        flatten(l, out);
                        flatten(r, out);
                    }
                    other => out.push(other),
                }
            }
            flatten(c, &mut alts);
            let mut pattern = None;
            let mut sets = Vec::new();
            for a in alts {
                let Expr::Binary(BinOp::In, p, e) = a else {
                    return None;
                };
                match pattern {
                    None => pattern = Some(&**p),
                    Some(q) if q == &**p => {}
                    Some(_) => return None,
                }
                sets.push(&**e);
            }
            Some((pattern?, Source::In(sets)))
        }
        _ => None,
    }
}

impl<'e> Plan<'e> {
    /// Plans enumeration of `vars` constrained by `conjuncts`. On failure
    /// returns the name of a variable with no usable definer.
    pub fn build(vars: &[Name], conjuncts: &[&'e Expr], filters: bool) -> Result<Plan<'e>, String> {
        let mut defined: Vec<Name> = Vec::new();
        let mut used = vec![false; conjuncts.len()];
        let mut steps: Vec<Step<'e>> = Vec::new();
        let free: Vec<Vec<Name>> = conjuncts
            .iter()
            .map(|c| {
                c.free_vars()
                    .into_iter()
                    .filter(|n| vars.contains(n))
                    .collect()
            })
            .collect();

        while defined.len() < vars.len() {
            let mut progress = false;
            for (i, c) in conjuncts.iter().enumerate() {
                if used[i] {
                    continue;
                }
                let Some((pattern, source)) = definer(c) else {
                    continue;
                };
                let mut pv = Vec::new();
                if !pattern_vars(pattern, &mut pv) {
                    continue;
                }
                let fresh = pv.iter().all(|v| vars.contains(v) && !defined.contains(v)) && {
                    let mut sorted = pv.clone();
                    sorted.sort();
                    sorted.windows(2).all(|w| w[0] != w[1])
                };
                if !fresh {
                    continue;
                }
                let deps_ok = source_exprs(&source).iter().all(|e| {
                    e.free_vars()
                        .iter()
                        .all(|n| !vars.contains(n) || (defined.contains(n) && !pv.contains(n)))
                });
                if !deps_ok {
                    continue;
                }
                used[i] = true;
                defined.extend(pv);
                steps.push(Step {
                    pattern,
                    source,
                    checks: Vec::new(),
                });
                progress = true;
                break;
            }
            if !progress {
                let missing = vars.iter().find(|v| !defined.contains(v)).unwrap();
                return Err(missing.to_string());
            }
        }

        // Step at which each variable becomes bound.
        let bound_at: Vec<(Name, usize)> = steps
            .iter()
            .enumerate()
            .flat_map(|(k, s)| {
                let mut pv = Vec::new();
                pattern_vars(s.pattern, &mut pv);
                pv.into_iter().map(move |v| (v, k))
            })
            .collect();
        let step_of = |name: &Name| -> usize {
            bound_at
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, k)| *k)
                .expect("every variable is planned")
        };

        let mut pre = Vec::new();
        let mut rest = Vec::new();
        for (i, c) in conjuncts.iter().enumerate() {
            if used[i] {
                continue;
            }
            if !filters {
                rest.push(*c);
                continue;
            }
            match free[i].iter().map(step_of).max() {
                None => pre.push(*c),
                Some(k) => steps[k].checks.push(*c),
            }
        }
        Ok(Plan { pre, steps, rest })
    }

    /// Enumerates all bindings that satisfy the definers and filters, calling
    /// `leaf` with the bindings pushed onto the frame.
    pub fn run(
        &self,
        frame: &mut Frame<'_>,
        leaf: &mut dyn FnMut(&mut Frame<'_>) -> Result<Flow, EvalError>,
    ) -> Result<Flow, EvalError> {
        for c in &self.pre {
            if !frame.pred(c)? {
                return Ok(Flow::Continue);
            }
        }
        self.run_step(0, frame, leaf)
    }

    fn run_step(
        &self,
        k: usize,
        frame: &mut Frame<'_>,
        leaf: &mut dyn FnMut(&mut Frame<'_>) -> Result<Flow, EvalError>,
    ) -> Result<Flow, EvalError> {
        let Some(step) = self.steps.get(k) else {
            return leaf(frame);
        };
        let domain = domain(frame, &step.source)?;
        let mark = frame.mark();
        for v in domain.iter() {
            if !destructure(frame, step.pattern, v) {
                frame.reset(mark);
                continue;
            }
            let mut ok = true;
            for c in &step.checks {
                if !frame.pred(c)? {
                    ok = false;
                    break;
                }
            }
            let flow = if ok {
                self.run_step(k + 1, frame, leaf)?
            } else {
                Flow::Continue
            };
            frame.reset(mark);
            if flow == Flow::Stop {
                return Ok(Flow::Stop);
            }
        }
        Ok(Flow::Continue)
    }
}

fn source_exprs<'a>(s: &Source<'a>) -> Vec<&'a Expr> {
    match s {
        Source::In(v) => v.clone(),
        Source::Sub(e) | Source::Eq(e) => vec![*e],
    }
}

/// Candidate values in canonical order.
fn domain(frame: &mut Frame<'_>, source: &Source<'_>) -> Result<Arc<[Value]>, EvalError> {
    match source {
        Source::In(sets) => {
            let first = frame.eval(sets[0])?;
            first.expect_set()?;
            let Value::Set(mut acc) = first else {
                unreachable!()
            };
            for s in &sets[1..] {
                let v = frame.eval(s)?;
                acc = Arc::from(value::union(&acc, v.expect_set()?));
            }
            Ok(acc)
        }
        Source::Sub(e) => {
            let base = frame.eval(e)?;
            let base = base.expect_set()?;
            if base.len() > POW_LIMIT {
                return Err(EvalError::PowLimit {
                    size: base.len(),
                    limit: POW_LIMIT,
                });
            }
            let mut subsets = spaces::powerset(base)?;
            subsets.sort_unstable();
            Ok(Arc::from(subsets))
        }
        Source::Eq(e) => Ok(Arc::from(vec![frame.eval(e)?])),
    }
}

/// Binds the identifiers of `pattern` against `v`; false on shape mismatch.
pub(crate) fn destructure(frame: &mut Frame<'_>, pattern: &Expr, v: &Value) -> bool {
    match pattern {
        Expr::Ident(n) => {
            frame.bind(n.clone(), v.clone());
            true
        }
        Expr::Binary(BinOp::Maplet, l, r) => match v.as_pair() {
            Some((a, b)) => destructure(frame, l, a) && destructure(frame, r, b),
            None => false,
        },
        _ => false,
    }
}
