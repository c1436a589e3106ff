//! Evaluation of expressions and predicates over finite universes.
//!
//! Membership in relation/function spaces and powersets is decided lazily
//! (`f : A --> B` never materialises `A --> B`). Bound variables take their
//! domains from domain-defining conjuncts, see [`quant`].

mod fold;
mod instantiate;
pub(crate) mod quant;
mod spaces;

use rustc_hash::FxHashMap;

pub use fold::fold_constants;
pub use instantiate::{instantiate_context, Instance, Scope, Universe};

use crate::ast::{BinOp, Expr, Name, Quantifier, UnOp};
use crate::error::EvalError;
use crate::value::{self, Value};
use quant::Flow;

/// Largest set the evaluator will construct.
pub const ENUM_LIMIT: usize = 1_000_000;
/// Largest base set for powersets and subset quantification.
pub const POW_LIMIT: usize = 16;

type EResult<T> = Result<T, EvalError>;

/// Values of carrier sets and constants.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Env {
    values: FxHashMap<Name, Value>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn insert(&mut self, name: impl Into<Name>, value: Value) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    /// Bound names in sorted order.
    pub fn names(&self) -> Vec<Name> {
        let mut v: Vec<Name> = self.values.keys().cloned().collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Evaluates `e` with only the constants of `env` in scope.
pub fn eval(e: &Expr, env: &Env) -> EResult<Value> {
    Frame::new(env).eval(e)
}

/// Evaluates predicate `p` with only the constants of `env` in scope.
pub fn eval_pred(p: &Expr, env: &Env) -> EResult<bool> {
    Frame::new(env).pred(p)
}

/// An evaluation scope: constants, one state valuation and bound names.
pub struct Frame<'a> {
    env: &'a Env,
    vars: &'a [Name],
    vals: &'a [Value],
    locals: Vec<(Name, Value)>,
}

impl<'a> Frame<'a> {
    pub fn new(env: &'a Env) -> Self {
        Frame {
            env,
            vars: &[],
            vals: &[],
            locals: Vec::new(),
        }
    }

    /// Scope with machine variables `vars` valued by `vals` (same order).
    pub fn with_state(env: &'a Env, vars: &'a [Name], vals: &'a [Value]) -> Self {
        debug_assert_eq!(vars.len(), vals.len());
        Frame {
            env,
            vars,
            vals,
            locals: Vec::new(),
        }
    }

    pub fn bind(&mut self, name: Name, value: Value) {
        self.locals.push((name, value));
    }

    pub(crate) fn mark(&self) -> usize {
        self.locals.len()
    }

    pub(crate) fn reset(&mut self, mark: usize) {
        self.locals.truncate(mark);
    }

    pub(crate) fn locals(&self) -> &[(Name, Value)] {
        &self.locals
    }

    pub fn lookup(&self, name: &str) -> EResult<&Value> {
        if let Some((_, v)) = self.locals.iter().rev().find(|(n, _)| &**n == name) {
            return Ok(v);
        }
        if let Some(i) = self.vars.iter().position(|n| &**n == name) {
            return Ok(&self.vals[i]);
        }
        self.env
            .get(name)
            .ok_or_else(|| EvalError::Unbound(name.to_string()))
    }

    pub fn eval_set(&mut self, e: &Expr) -> EResult<Value> {
        let v = self.eval(e)?;
        v.expect_set()?;
        Ok(v)
    }

    pub fn eval(&mut self, e: &Expr) -> EResult<Value> {
        match e {
            Expr::Ident(n) => self.lookup(n).cloned(),
            Expr::Int(n) => Ok(Value::Int(*n)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Lit(v) => Ok(v.clone()),
            Expr::SetEnum(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.eval(item)?);
                }
                Ok(Value::set(out))
            }
            Expr::Comprehension { pattern, pred, .. } => self.comprehension(e, pattern, pred),
            Expr::Quant { .. } | Expr::Partition(_) => Ok(Value::Bool(self.pred(e)?)),
            Expr::Unary(UnOp::Not, _) => Ok(Value::Bool(self.pred(e)?)),
            Expr::Unary(op, x) => {
                let v = self.eval(x)?;
                unary(*op, &v)
            }
            Expr::Image(r, s) if matches!(**r, Expr::Unary(UnOp::Inverse, _)) => {
                let Expr::Unary(_, inner) = &**r else {
                    unreachable!()
                };
                let r = self.eval(inner)?;
                match singleton(s) {
                    Some(x) => {
                        let x = self.eval(x)?;
                        preimage(&r, std::slice::from_ref(&x))
                    }
                    None => {
                        let s = self.eval(s)?;
                        preimage(&r, s.expect_set()?)
                    }
                }
            }
            Expr::Image(r, s) if singleton(s).is_some() => {
                let r = self.eval(r)?;
                let x = self.eval(singleton(s).unwrap())?;
                image(&r, std::slice::from_ref(&x))
            }
            Expr::Image(r, s) => {
                let r = self.eval(r)?;
                let s = self.eval(s)?;
                image(&r, s.expect_set()?)
            }
            Expr::Apply(f, x) => {
                let fv = self.eval(f)?;
                let xv = self.eval(x)?;
                apply(&fv, &xv)
            }
            Expr::Binary(op, l, r) => {
                if op.precedence() <= 6 {
                    return Ok(Value::Bool(self.pred(e)?));
                }
                let lv = self.eval(l)?;
                let rv = self.eval(r)?;
                binary(*op, &lv, &rv)
            }
        }
    }

    pub fn pred(&mut self, p: &Expr) -> EResult<bool> {
        use BinOp::*;
        match p {
            Expr::Bool(b) => Ok(*b),
            Expr::Lit(v) => v.expect_bool(),
            Expr::Unary(UnOp::Not, x) => Ok(!self.pred(x)?),
            Expr::Binary(op, l, r) => match op {
                And => Ok(self.pred(l)? && self.pred(r)?),
                Or => Ok(self.pred(l)? || self.pred(r)?),
                Implies => Ok(!self.pred(l)? || self.pred(r)?),
                Equiv => Ok(self.pred(l)? == self.pred(r)?),
                Eq | NotEq if is_empty_literal(r) || is_empty_literal(l) => {
                    let other = if is_empty_literal(r) { l } else { r };
                    Ok(self.is_empty(other)? == (*op == Eq))
                }
                Eq => Ok(self.eval(l)? == self.eval(r)?),
                NotEq => Ok(self.eval(l)? != self.eval(r)?),
                In => {
                    let v = self.eval(l)?;
                    self.member(&v, r)
                }
                NotIn => {
                    let v = self.eval(l)?;
                    Ok(!self.member(&v, r)?)
                }
                Subset | NotSubset | StrictSubset | NotStrictSubset => {
                    let a = self.eval(l)?;
                    let b = self.eval(r)?;
                    let (a, b) = (a.expect_set()?, b.expect_set()?);
                    let sub = value::is_subset(a, b);
                    Ok(match op {
                        Subset => sub,
                        NotSubset => !sub,
                        StrictSubset => sub && a.len() < b.len(),
                        _ => !(sub && a.len() < b.len()),
                    })
                }
                Lt | Le | Gt | Ge => {
                    let a = self.eval(l)?.expect_int()?;
                    let b = self.eval(r)?.expect_int()?;
                    Ok(match op {
                        Lt => a < b,
                        Le => a <= b,
                        Gt => a > b,
                        _ => a >= b,
                    })
                }
                _ => self.eval(p)?.expect_bool(),
            },
            Expr::Quant { q, vars, body } => self.quantifier(*q, vars, body),
            Expr::Partition(items) => {
                let whole = self.eval(&items[0])?;
                let whole = whole.expect_set()?;
                let mut total = 0usize;
                let mut acc: Vec<Value> = Vec::new();
                for part in &items[1..] {
                    let v = self.eval(part)?;
                    let s = v.expect_set()?;
                    total += s.len();
                    acc = value::union(&acc, s);
                }
                Ok(total == acc.len() && acc.as_slice() == whole)
            }
            _ => self.eval(p)?.expect_bool(),
        }
    }

    /// `e = {}`; intersections are tested for disjointness without being
    /// built.
    fn is_empty(&mut self, e: &Expr) -> EResult<bool> {
        if let Expr::Binary(BinOp::Inter, a, b) = e {
            let a = self.eval(a)?;
            let b = self.eval(b)?;
            return Ok(value::disjoint(a.expect_set()?, b.expect_set()?));
        }
        match self.eval(e)? {
            Value::Set(items) => Ok(items.is_empty()),
            _ => Ok(false),
        }
    }

    /// `v : set_expr`, without materialising relation spaces or powersets.
    pub fn member(&mut self, v: &Value, set_expr: &Expr) -> EResult<bool> {
        match set_expr {
            Expr::Binary(op, a, b) if op.is_function_space() => self.space_member(v, *op, a, b),
            Expr::Unary(UnOp::Pow, base) => {
                let Some(items) = v.as_set() else {
                    return Ok(false);
                };
                for x in items {
                    if !self.member(x, base)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Expr::Binary(BinOp::Union, a, b) => Ok(self.member(v, a)? || self.member(v, b)?),
            Expr::Binary(BinOp::Inter, a, b) => Ok(self.member(v, a)? && self.member(v, b)?),
            Expr::Binary(BinOp::Diff, a, b) => Ok(self.member(v, a)? && !self.member(v, b)?),
            Expr::Binary(BinOp::Product, a, b) => match v.as_pair() {
                Some((x, y)) => Ok(self.member(x, a)? && self.member(y, b)?),
                None => Ok(false),
            },
            Expr::SetEnum(items) => {
                for item in items {
                    if self.eval(item)? == *v {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Expr::Comprehension { pattern, pred, .. } => {
                let mark = self.mark();
                let matched = quant::destructure(self, pattern, v);
                let r = if matched { self.pred(pred) } else { Ok(false) };
                self.reset(mark);
                r
            }
            _ => {
                let s = self.eval(set_expr)?;
                s.expect_set()?;
                Ok(s.contains(v))
            }
        }
    }

    fn space_member(&mut self, v: &Value, op: BinOp, a: &Expr, b: &Expr) -> EResult<bool> {
        let Some(pairs) = v.as_set() else {
            return Ok(false);
        };
        let mut prev_left: Option<&Value> = None;
        let mut distinct_lefts = 0usize;
        for p in pairs {
            let Some((x, y)) = p.as_pair() else {
                return Ok(false);
            };
            if prev_left == Some(x) {
                if op != BinOp::Relation {
                    return Ok(false); // not functional
                }
            } else {
                distinct_lefts += 1;
                if !self.member(x, a)? {
                    return Ok(false);
                }
            }
            prev_left = Some(x);
            if !self.member(y, b)? {
                return Ok(false);
            }
        }
        match op {
            BinOp::TotalFn => {
                let dom = self.eval(a)?;
                Ok(distinct_lefts == dom.expect_set()?.len())
            }
            BinOp::PartialInj => {
                let mut rights: Vec<&Value> = pairs
                    .iter()
                    .filter_map(|p| p.as_pair())
                    .map(|p| p.1)
                    .collect();
                rights.sort_unstable();
                Ok(rights.windows(2).all(|w| w[0] != w[1]))
            }
            _ => Ok(true),
        }
    }

    fn comprehension(&mut self, whole: &Expr, pattern: &Expr, pred: &Expr) -> EResult<Value> {
        let Expr::Comprehension { vars, .. } = whole else {
            unreachable!()
        };
        let conjuncts = pred.conjuncts();
        let plan =
            quant::Plan::build(vars, &conjuncts, true).map_err(EvalError::UnboundedQuantifier)?;
        let mut out = Vec::new();
        plan.run(self, &mut |f| {
            out.push(f.eval(pattern)?);
            if out.len() > ENUM_LIMIT {
                return Err(EvalError::EnumLimit { limit: ENUM_LIMIT });
            }
            Ok(Flow::Continue)
        })?;
        Ok(Value::set(out))
    }

    fn quantifier(&mut self, q: Quantifier, vars: &[Name], body: &Expr) -> EResult<bool> {
        match q {
            Quantifier::ForAll => {
                let (guard, goal): (Vec<&Expr>, Vec<&Expr>) = match body {
                    Expr::Binary(BinOp::Implies, g, p) => (g.conjuncts(), vec![&**p]),
                    _ => (body.conjuncts(), Vec::new()),
                };
                let filters = !goal.is_empty();
                let plan = quant::Plan::build(vars, &guard, filters)
                    .map_err(EvalError::UnboundedQuantifier)?;
                let goal: Vec<&Expr> = if filters { goal } else { plan.rest.clone() };
                let mut holds = true;
                plan.run(self, &mut |f| {
                    for g in &goal {
                        if !f.pred(g)? {
                            holds = false;
                            return Ok(Flow::Stop);
                        }
                    }
                    Ok(Flow::Continue)
                })?;
                Ok(holds)
            }
            Quantifier::Exists => {
                let conjuncts = body.conjuncts();
                let plan = quant::Plan::build(vars, &conjuncts, true)
                    .map_err(EvalError::UnboundedQuantifier)?;
                let mut found = false;
                plan.run(self, &mut |_| {
                    found = true;
                    Ok(Flow::Stop)
                })?;
                Ok(found)
            }
        }
    }

    /// First binding of a universally quantified predicate that falsifies it.
    pub(crate) fn counterexample(&mut self, p: &Expr) -> EResult<Option<Vec<(Name, Value)>>> {
        let Expr::Quant {
            q: Quantifier::ForAll,
            vars,
            body,
        } = p
        else {
            return Ok(None);
        };
        let (guard, goal): (Vec<&Expr>, Vec<&Expr>) = match &**body {
            Expr::Binary(BinOp::Implies, g, p) => (g.conjuncts(), vec![&**p]),
            _ => (body.conjuncts(), Vec::new()),
        };
        let filters = !goal.is_empty();
        let plan =
            quant::Plan::build(vars, &guard, filters).map_err(EvalError::UnboundedQuantifier)?;
        let goal: Vec<&Expr> = if filters { goal } else { plan.rest.clone() };
        let base = self.mark();
        let mut witness = None;
        plan.run(self, &mut |f| {
            for g in &goal {
                if !f.pred(g)? {
                    witness = Some(f.locals()[base..].to_vec());
                    return Ok(Flow::Stop);
                }
            }
            Ok(Flow::Continue)
        })?;
        Ok(witness)
    }
}

fn check_size(n: usize) -> EResult<()> {
    if n > ENUM_LIMIT {
        Err(EvalError::EnumLimit { limit: ENUM_LIMIT })
    } else {
        Ok(())
    }
}

/// The elements of a set of pairs.
fn relation(v: &Value) -> EResult<&[Value]> {
    let s = v.expect_set()?;
    for p in s {
        p.expect_pair()?;
    }
    Ok(s)
}

fn pairs(v: &Value) -> EResult<impl Iterator<Item = (&Value, &Value)>> {
    Ok(relation(v)?.iter().filter_map(|p| p.as_pair()))
}

fn unary(op: UnOp, v: &Value) -> EResult<Value> {
    match op {
        UnOp::Inverse => Ok(Value::set(
            pairs(v)?.map(|(a, b)| Value::pair(b.clone(), a.clone())),
        )),
        UnOp::Dom => {
            let mut out: Vec<Value> = pairs(v)?.map(|(a, _)| a.clone()).collect();
            out.dedup();
            Ok(Value::set_from_sorted(out))
        }
        UnOp::Ran => Ok(Value::set(pairs(v)?.map(|(_, b)| b.clone()))),
        UnOp::Card => Ok(Value::Int(v.expect_set()?.len() as i64)),
        UnOp::Pow => {
            let s = v.expect_set()?;
            Ok(Value::set(spaces::powerset(s)?))
        }
        UnOp::Not => Ok(Value::Bool(!v.expect_bool()?)),
    }
}

fn singleton(e: &Expr) -> Option<&Expr> {
    match e {
        Expr::SetEnum(items) if items.len() == 1 => Some(&items[0]),
        _ => None,
    }
}

fn is_empty_literal(e: &Expr) -> bool {
    match e {
        Expr::SetEnum(items) => items.is_empty(),
        Expr::Lit(Value::Set(items)) => items.is_empty(),
        _ => false,
    }
}

fn image(r: &Value, s: &[Value]) -> EResult<Value> {
    let rel = r.expect_set()?;
    let mut out = Vec::new();
    for x in s {
        for p in value::pairs_with_left(rel, x) {
            out.push(p.expect_pair()?.1.clone());
        }
    }
    for p in rel {
        p.expect_pair()?;
    }
    if s.len() <= 1 {
        // the pairs of one left element are sorted by their right element
        Ok(Value::set_from_sorted(out))
    } else {
        Ok(Value::set(out))
    }
}

/// `r~[s]` without building the inverse.
fn preimage(r: &Value, s: &[Value]) -> EResult<Value> {
    let mut out: Vec<Value> = Vec::new();
    for (a, b) in pairs(r)? {
        if s.binary_search(b).is_ok() && out.last() != Some(a) {
            out.push(a.clone());
        }
    }
    Ok(Value::set_from_sorted(out))
}

pub(crate) fn apply(f: &Value, x: &Value) -> EResult<Value> {
    let rel = f.expect_set()?;
    let hits = value::pairs_with_left(rel, x);
    match hits.len() {
        0 => {
            // distinguish "not a relation" from "outside the domain"
            for p in rel {
                p.expect_pair()?;
            }
            Err(EvalError::ApplyUndefined {
                func: short(f),
                arg: x.render(),
            })
        }
        1 => Ok(hits[0].expect_pair()?.1.clone()),
        _ => Err(EvalError::ApplyAmbiguous {
            func: short(f),
            arg: x.render(),
        }),
    }
}

pub(crate) fn short(v: &Value) -> String {
    let s = v.render();
    if s.len() > 80 {
        let cut = s.char_indices().nth(77).map(|(i, _)| i).unwrap_or(s.len());
        format!("{}...", &s[..cut])
    } else {
        s
    }
}

pub(crate) fn binary(op: BinOp, l: &Value, r: &Value) -> EResult<Value> {
    use BinOp::*;
    match op {
        Maplet => Ok(Value::pair(l.clone(), r.clone())),
        Union => Ok(Value::set_from_sorted(value::union(
            l.expect_set()?,
            r.expect_set()?,
        ))),
        Inter => Ok(Value::set_from_sorted(value::intersection(
            l.expect_set()?,
            r.expect_set()?,
        ))),
        Diff => Ok(Value::set_from_sorted(value::difference(
            l.expect_set()?,
            r.expect_set()?,
        ))),
        Product => {
            let (a, b) = (l.expect_set()?, r.expect_set()?);
            check_size(a.len().saturating_mul(b.len()))?;
            let mut out = Vec::with_capacity(a.len() * b.len());
            for x in a {
                for y in b {
                    out.push(Value::pair(x.clone(), y.clone()));
                }
            }
            Ok(Value::set_from_sorted(out))
        }
        DomRes | DomSub => {
            let s = l.expect_set()?;
            let keep = op == DomRes;
            let out: Vec<Value> = relation(r)?
                .iter()
                .filter(|p| s.binary_search(p.as_pair().unwrap().0).is_ok() == keep)
                .cloned()
                .collect();
            Ok(Value::set_from_sorted(out))
        }
        RanRes | RanSub => {
            let s = r.expect_set()?;
            let keep = op == RanRes;
            let out: Vec<Value> = relation(l)?
                .iter()
                .filter(|p| s.binary_search(p.as_pair().unwrap().1).is_ok() == keep)
                .cloned()
                .collect();
            Ok(Value::set_from_sorted(out))
        }
        Override => {
            let right = r.expect_set()?;
            for p in right {
                p.expect_pair()?;
            }
            let kept: Vec<Value> = relation(l)?
                .iter()
                .filter(|p| value::pairs_with_left(right, p.as_pair().unwrap().0).is_empty())
                .cloned()
                .collect();
            // disjoint left components, so a merge of the two sorted lists
            Ok(Value::set_from_sorted(value::union(&kept, right)))
        }
        Relation | TotalFn | PartialFn | PartialInj => {
            spaces::function_space(op, l.expect_set()?, r.expect_set()?).map(Value::set)
        }
        _ => unreachable!("predicate operator {op:?} evaluated as expression"),
    }
}

#[cfg(test)]
mod tests;
