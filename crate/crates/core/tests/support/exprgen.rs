//! Random well-typed expressions with a brute-force reference semantics.
//!
//! Expressions are generated as a small typed tree, rendered to concrete
//! syntax with full parentheses and evaluated here on `BTreeSet`s. The
//! engine parses the text and evaluates it; both results must agree.

use std::collections::BTreeSet;

use proptest::prelude::*;
use vok_core::eval::Env;
use vok_core::Value;

/// Reference values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum V {
    Int(i64),
    Bool(bool),
    Pair(Box<V>, Box<V>),
    Set(BTreeSet<V>),
}

pub fn from_value(v: &Value) -> V {
    match v {
        Value::Int(i) => V::Int(*i),
        Value::Bool(b) => V::Bool(*b),
        Value::Pair(p) => V::Pair(Box::new(from_value(&p.0)), Box::new(from_value(&p.1))),
        Value::Set(s) => V::Set(s.iter().map(from_value).collect()),
        Value::Atom(a) => panic!("no atoms in generated expressions: {a}"),
    }
}

fn to_value(v: &V) -> Value {
    match v {
        V::Int(i) => Value::Int(*i),
        V::Bool(b) => Value::Bool(*b),
        V::Pair(a, b) => Value::pair(to_value(a), to_value(b)),
        V::Set(s) => Value::set(s.iter().map(to_value)),
    }
}

/// Sets of integers.
#[derive(Debug, Clone)]
pub enum S {
    Var(&'static str),
    Lit(Vec<i64>),
    Union(Box<S>, Box<S>),
    Inter(Box<S>, Box<S>),
    Diff(Box<S>, Box<S>),
    Dom(Box<R>),
    Ran(Box<R>),
    Image(Box<R>, Box<S>),
    /// `{x | x : s & p}`
    Filter(Box<S>, Box<P>),
}

/// Relations on integers.
#[derive(Debug, Clone)]
pub enum R {
    Var(&'static str),
    Lit(Vec<(i64, i64)>),
    Union(Box<R>, Box<R>),
    Inter(Box<R>, Box<R>),
    Diff(Box<R>, Box<R>),
    Inverse(Box<R>),
    Product(Box<S>, Box<S>),
    DomRes(Box<S>, Box<R>),
    DomSub(Box<S>, Box<R>),
    RanRes(Box<R>, Box<S>),
    RanSub(Box<R>, Box<S>),
    Override(Box<R>, Box<R>),
}

/// Integers.
#[derive(Debug, Clone)]
pub enum I {
    Lit(i64),
    Var(&'static str),
    /// The variable bound by the enclosing quantifier or filter.
    Bound,
    Card(Box<S>),
}

/// Predicates. Quantifiers bind `x` and do not nest.
#[derive(Debug, Clone)]
pub enum P {
    In(I, S),
    Subset(S, S),
    SetEq(S, S),
    RelEq(R, R),
    Le(I, I),
    IntEq(I, I),
    And(Box<P>, Box<P>),
    Or(Box<P>, Box<P>),
    Not(Box<P>),
    Implies(Box<P>, Box<P>),
    Forall(S, Box<P>),
    Exists(S, Box<P>),
    TotalFn(R, S, S),
    PartialFn(R, S, S),
}

pub const UNIVERSE: i64 = 4;

fn small_set() -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(0..UNIVERSE, 0..4)
}

fn small_rel() -> impl Strategy<Value = Vec<(i64, i64)>> {
    proptest::collection::vec((0..UNIVERSE, 0..UNIVERSE), 0..5)
}

fn leaf_int(bound: bool) -> BoxedStrategy<I> {
    if bound {
        prop_oneof![
            (0..UNIVERSE).prop_map(I::Lit),
            Just(I::Var("n")),
            Just(I::Bound)
        ]
        .boxed()
    } else {
        prop_oneof![(0..UNIVERSE).prop_map(I::Lit), Just(I::Var("n"))].boxed()
    }
}

fn set_rel() -> (BoxedStrategy<S>, BoxedStrategy<R>) {
    let s_leaf = prop_oneof![
        Just(S::Var("s1")),
        Just(S::Var("s2")),
        small_set().prop_map(S::Lit)
    ];
    let r_leaf = prop_oneof![
        Just(R::Var("r1")),
        Just(R::Var("r2")),
        small_rel().prop_map(R::Lit)
    ];
    let s = s_leaf.clone().prop_recursive(3, 12, 2, move |inner| {
        let r = prop_oneof![
            Just(R::Var("r1")),
            Just(R::Var("r2")),
            small_rel().prop_map(R::Lit)
        ];
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| S::Union(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| S::Inter(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| S::Diff(Box::new(a), Box::new(b))),
            r.clone().prop_map(|r| S::Dom(Box::new(r))),
            r.clone().prop_map(|r| S::Ran(Box::new(r))),
            (r, inner).prop_map(|(r, s)| S::Image(Box::new(r), Box::new(s))),
        ]
    });
    let s_for_r = s.clone();
    let r = r_leaf.prop_recursive(3, 12, 2, move |inner| {
        let s = s_for_r.clone();
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| R::Union(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| R::Inter(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| R::Diff(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|r| R::Inverse(Box::new(r))),
            (s.clone(), s.clone()).prop_map(|(a, b)| R::Product(Box::new(a), Box::new(b))),
            (s.clone(), inner.clone()).prop_map(|(a, b)| R::DomRes(Box::new(a), Box::new(b))),
            (s.clone(), inner.clone()).prop_map(|(a, b)| R::DomSub(Box::new(a), Box::new(b))),
            (inner.clone(), s.clone()).prop_map(|(a, b)| R::RanRes(Box::new(a), Box::new(b))),
            (inner.clone(), s).prop_map(|(a, b)| R::RanSub(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| R::Override(Box::new(a), Box::new(b))),
        ]
    });
    (s.boxed(), r.boxed())
}

fn int(s: BoxedStrategy<S>, bound: bool) -> BoxedStrategy<I> {
    prop_oneof![3 => leaf_int(bound), 1 => s.prop_map(|s| I::Card(Box::new(s)))].boxed()
}

/// Quantifier-free predicates; `bound` allows references to `x`.
fn flat_pred(bound: bool) -> BoxedStrategy<P> {
    let (s, r) = set_rel();
    let i = int(s.clone(), bound);
    let atom = prop_oneof![
        (i.clone(), s.clone()).prop_map(|(i, s)| P::In(i, s)),
        (s.clone(), s.clone()).prop_map(|(a, b)| P::Subset(a, b)),
        (s.clone(), s.clone()).prop_map(|(a, b)| P::SetEq(a, b)),
        (r.clone(), r.clone()).prop_map(|(a, b)| P::RelEq(a, b)),
        (i.clone(), i.clone()).prop_map(|(a, b)| P::Le(a, b)),
        (i.clone(), i).prop_map(|(a, b)| P::IntEq(a, b)),
        (r.clone(), s.clone(), s.clone()).prop_map(|(r, a, b)| P::TotalFn(r, a, b)),
        (r, s.clone(), s).prop_map(|(r, a, b)| P::PartialFn(r, a, b)),
    ];
    atom.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| P::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| P::Or(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| P::Implies(Box::new(a), Box::new(b))),
            inner.prop_map(|a| P::Not(Box::new(a))),
        ]
    })
    .boxed()
}

/// Top-level predicates, possibly with one level of quantification.
pub fn pred() -> BoxedStrategy<P> {
    let (s, _) = set_rel();
    prop_oneof![
        2 => flat_pred(false),
        1 => (s.clone(), flat_pred(true)).prop_map(|(s, p)| P::Forall(s, Box::new(p))),
        1 => (s, flat_pred(true)).prop_map(|(s, p)| P::Exists(s, Box::new(p))),
    ]
    .boxed()
}

/// Set expressions, including filters over quantifier-free predicates.
pub fn set_expr() -> BoxedStrategy<S> {
    let (s, _) = set_rel();
    prop_oneof![
        3 => s.clone(),
        1 => (s, flat_pred(true)).prop_map(|(s, p)| S::Filter(Box::new(s), Box::new(p))),
    ]
    .boxed()
}

pub fn rel_expr() -> BoxedStrategy<R> {
    set_rel().1
}

/// Values of the free variables `s1 s2 r1 r2 n`.
#[derive(Debug, Clone)]
pub struct Vars {
    pub s1: BTreeSet<i64>,
    pub s2: BTreeSet<i64>,
    pub r1: BTreeSet<(i64, i64)>,
    pub r2: BTreeSet<(i64, i64)>,
    pub n: i64,
}

pub fn vars() -> impl Strategy<Value = Vars> {
    (
        small_set(),
        small_set(),
        small_rel(),
        small_rel(),
        0..UNIVERSE,
    )
        .prop_map(|(s1, s2, r1, r2, n)| Vars {
            s1: s1.into_iter().collect(),
            s2: s2.into_iter().collect(),
            r1: r1.into_iter().collect(),
            r2: r2.into_iter().collect(),
            n,
        })
}

impl Vars {
    pub fn env(&self) -> Env {
        let mut env = Env::new();
        env.insert("s1", to_value(&set_v(&self.s1)));
        env.insert("s2", to_value(&set_v(&self.s2)));
        env.insert("r1", to_value(&rel_v(&self.r1)));
        env.insert("r2", to_value(&rel_v(&self.r2)));
        env.insert("n", Value::Int(self.n));
        env
    }
}

fn set_v(s: &BTreeSet<i64>) -> V {
    V::Set(s.iter().map(|&i| V::Int(i)).collect())
}

fn rel_v(r: &BTreeSet<(i64, i64)>) -> V {
    V::Set(
        r.iter()
            .map(|&(a, b)| V::Pair(Box::new(V::Int(a)), Box::new(V::Int(b))))
            .collect(),
    )
}

// ---------------------------------------------------------------- syntax

fn list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

pub fn show_s(s: &S) -> String {
    match s {
        S::Var(v) => v.to_string(),
        S::Lit(xs) => format!("{{{}}}", list(xs, |x| x.to_string())),
        S::Union(a, b) => format!("({} \\/ {})", show_s(a), show_s(b)),
        S::Inter(a, b) => format!("({} /\\ {})", show_s(a), show_s(b)),
        S::Diff(a, b) => format!("({} \\ {})", show_s(a), show_s(b)),
        S::Dom(r) => format!("dom({})", show_r(r)),
        S::Ran(r) => format!("ran({})", show_r(r)),
        S::Image(r, s) => format!("{}[{}]", show_r(r), show_s(s)),
        S::Filter(s, p) => format!("{{x | x : {} & ({})}}", show_s(s), show_p(p)),
    }
}

pub fn show_r(r: &R) -> String {
    match r {
        R::Var(v) => v.to_string(),
        R::Lit(xs) => format!("{{{}}}", list(xs, |(a, b)| format!("{a} |-> {b}"))),
        R::Union(a, b) => format!("({} \\/ {})", show_r(a), show_r(b)),
        R::Inter(a, b) => format!("({} /\\ {})", show_r(a), show_r(b)),
        R::Diff(a, b) => format!("({} \\ {})", show_r(a), show_r(b)),
        R::Inverse(a) => format!("({})~", show_r(a)),
        R::Product(a, b) => format!("({} ** {})", show_s(a), show_s(b)),
        R::DomRes(s, r) => format!("({} <| {})", show_s(s), show_r(r)),
        R::DomSub(s, r) => format!("({} <<| {})", show_s(s), show_r(r)),
        R::RanRes(r, s) => format!("({} |> {})", show_r(r), show_s(s)),
        R::RanSub(r, s) => format!("({} |>> {})", show_r(r), show_s(s)),
        R::Override(a, b) => format!("({} <+ {})", show_r(a), show_r(b)),
    }
}

fn show_i(i: &I) -> String {
    match i {
        I::Lit(n) => n.to_string(),
        I::Var(v) => v.to_string(),
        I::Bound => "x".into(),
        I::Card(s) => format!("card({})", show_s(s)),
    }
}

pub fn show_p(p: &P) -> String {
    match p {
        P::In(i, s) => format!("{} : {}", show_i(i), show_s(s)),
        P::Subset(a, b) => format!("{} <: {}", show_s(a), show_s(b)),
        P::SetEq(a, b) => format!("{} = {}", show_s(a), show_s(b)),
        P::RelEq(a, b) => format!("{} = {}", show_r(a), show_r(b)),
        P::Le(a, b) => format!("{} <= {}", show_i(a), show_i(b)),
        P::IntEq(a, b) => format!("{} = {}", show_i(a), show_i(b)),
        P::And(a, b) => format!("({}) & ({})", show_p(a), show_p(b)),
        P::Or(a, b) => format!("({}) or ({})", show_p(a), show_p(b)),
        P::Implies(a, b) => format!("({}) => ({})", show_p(a), show_p(b)),
        P::Not(a) => format!("not ({})", show_p(a)),
        P::Forall(s, b) => format!("!x.(x : {} => ({}))", show_s(s), show_p(b)),
        P::Exists(s, b) => format!("#x.(x : {} & ({}))", show_s(s), show_p(b)),
        P::TotalFn(r, a, b) => format!("{} : {} --> {}", show_r(r), show_s(a), show_s(b)),
        P::PartialFn(r, a, b) => format!("{} : {} +-> {}", show_r(r), show_s(a), show_s(b)),
    }
}

// ------------------------------------------------------------- semantics

type Set = BTreeSet<i64>;
type Rel = BTreeSet<(i64, i64)>;

pub fn eval_s(s: &S, v: &Vars, x: Option<i64>) -> Set {
    match s {
        S::Var("s1") => v.s1.clone(),
        S::Var(_) => v.s2.clone(),
        S::Lit(xs) => xs.iter().copied().collect(),
        S::Union(a, b) => eval_s(a, v, x).union(&eval_s(b, v, x)).copied().collect(),
        S::Inter(a, b) => eval_s(a, v, x)
            .intersection(&eval_s(b, v, x))
            .copied()
            .collect(),
        S::Diff(a, b) => eval_s(a, v, x)
            .difference(&eval_s(b, v, x))
            .copied()
            .collect(),
        S::Dom(r) => eval_r(r, v, x).iter().map(|p| p.0).collect(),
        S::Ran(r) => eval_r(r, v, x).iter().map(|p| p.1).collect(),
        S::Image(r, s) => {
            let s = eval_s(s, v, x);
            eval_r(r, v, x)
                .iter()
                .filter(|p| s.contains(&p.0))
                .map(|p| p.1)
                .collect()
        }
        S::Filter(s, p) => eval_s(s, v, x)
            .into_iter()
            .filter(|&e| eval_p(p, v, Some(e)))
            .collect(),
    }
}

pub fn eval_r(r: &R, v: &Vars, x: Option<i64>) -> Rel {
    match r {
        R::Var("r1") => v.r1.clone(),
        R::Var(_) => v.r2.clone(),
        R::Lit(xs) => xs.iter().copied().collect(),
        R::Union(a, b) => eval_r(a, v, x).union(&eval_r(b, v, x)).copied().collect(),
        R::Inter(a, b) => eval_r(a, v, x)
            .intersection(&eval_r(b, v, x))
            .copied()
            .collect(),
        R::Diff(a, b) => eval_r(a, v, x)
            .difference(&eval_r(b, v, x))
            .copied()
            .collect(),
        R::Inverse(a) => eval_r(a, v, x).iter().map(|&(a, b)| (b, a)).collect(),
        R::Product(a, b) => {
            let (a, b) = (eval_s(a, v, x), eval_s(b, v, x));
            a.iter()
                .flat_map(|&i| b.iter().map(move |&j| (i, j)))
                .collect()
        }
        R::DomRes(s, r) => {
            let s = eval_s(s, v, x);
            eval_r(r, v, x)
                .into_iter()
                .filter(|p| s.contains(&p.0))
                .collect()
        }
        R::DomSub(s, r) => {
            let s = eval_s(s, v, x);
            eval_r(r, v, x)
                .into_iter()
                .filter(|p| !s.contains(&p.0))
                .collect()
        }
        R::RanRes(r, s) => {
            let s = eval_s(s, v, x);
            eval_r(r, v, x)
                .into_iter()
                .filter(|p| s.contains(&p.1))
                .collect()
        }
        R::RanSub(r, s) => {
            let s = eval_s(s, v, x);
            eval_r(r, v, x)
                .into_iter()
                .filter(|p| !s.contains(&p.1))
                .collect()
        }
        R::Override(a, b) => {
            let b = eval_r(b, v, x);
            let dom_b: Set = b.iter().map(|p| p.0).collect();
            eval_r(a, v, x)
                .into_iter()
                .filter(|p| !dom_b.contains(&p.0))
                .chain(b)
                .collect()
        }
    }
}

fn eval_i(i: &I, v: &Vars, x: Option<i64>) -> i64 {
    match i {
        I::Lit(n) => *n,
        I::Var(_) => v.n,
        I::Bound => x.expect("bound variable in scope"),
        I::Card(s) => eval_s(s, v, x).len() as i64,
    }
}

fn is_function(r: &Rel, a: &Set, b: &Set, total: bool) -> bool {
    let in_space = r.iter().all(|(x, y)| a.contains(x) && b.contains(y));
    let functional = r.iter().zip(r.iter().skip(1)).all(|(p, q)| p.0 != q.0);
    let dom: Set = r.iter().map(|p| p.0).collect();
    in_space && functional && (!total || dom == *a)
}

pub fn eval_p(p: &P, v: &Vars, x: Option<i64>) -> bool {
    match p {
        P::In(i, s) => eval_s(s, v, x).contains(&eval_i(i, v, x)),
        P::Subset(a, b) => eval_s(a, v, x).is_subset(&eval_s(b, v, x)),
        P::SetEq(a, b) => eval_s(a, v, x) == eval_s(b, v, x),
        P::RelEq(a, b) => eval_r(a, v, x) == eval_r(b, v, x),
        P::Le(a, b) => eval_i(a, v, x) <= eval_i(b, v, x),
        P::IntEq(a, b) => eval_i(a, v, x) == eval_i(b, v, x),
        P::And(a, b) => eval_p(a, v, x) && eval_p(b, v, x),
        P::Or(a, b) => eval_p(a, v, x) || eval_p(b, v, x),
        P::Implies(a, b) => !eval_p(a, v, x) || eval_p(b, v, x),
        P::Not(a) => !eval_p(a, v, x),
        P::Forall(s, b) => eval_s(s, v, x).into_iter().all(|e| eval_p(b, v, Some(e))),
        P::Exists(s, b) => eval_s(s, v, x).into_iter().any(|e| eval_p(b, v, Some(e))),
        P::TotalFn(r, a, b) => {
            is_function(&eval_r(r, v, x), &eval_s(a, v, x), &eval_s(b, v, x), true)
        }
        P::PartialFn(r, a, b) => {
            is_function(&eval_r(r, v, x), &eval_s(a, v, x), &eval_s(b, v, x), false)
        }
    }
}

pub fn set_value(s: &Set) -> V {
    set_v(s)
}

pub fn rel_value(r: &Rel) -> V {
    rel_v(r)
}
