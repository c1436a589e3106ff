use std::collections::BTreeMap;

use super::*;
use crate::parser::{parse_context, parse_expr, parse_value};

fn env_with(pairs: &[(&str, &str)]) -> Env {
    let mut env = Env::new();
    for atom in [
        "a", "b", "c", "d", "x", "y", "z", "r1", "r2", "free", "busy",
    ] {
        env.insert(atom, Value::atom(atom));
    }
    for (n, v) in pairs {
        env.insert(*n, parse_value(v).unwrap());
    }
    env
}

fn ev(src: &str, env: &Env) -> Result<Value, EvalError> {
    eval(&parse_expr(src).unwrap(), env)
}

fn pv(src: &str, env: &Env) -> Result<bool, EvalError> {
    eval_pred(&parse_expr(src).unwrap(), env)
}

fn val(s: &str) -> Value {
    parse_value(s).unwrap()
}

#[test]
fn relational_operators() {
    let env = env_with(&[("r", "{a |-> x, b |-> y, c |-> x}"), ("s", "{a, c}")]);
    assert_eq!(ev("r~", &env).unwrap(), val("{x |-> a, x |-> c, y |-> b}"));
    assert_eq!(ev("r[s]", &env).unwrap(), val("{x}"));
    assert_eq!(ev("dom(r)", &env).unwrap(), val("{a, b, c}"));
    assert_eq!(ev("ran(r)", &env).unwrap(), val("{x, y}"));
    assert_eq!(ev("s <| r", &env).unwrap(), val("{a |-> x, c |-> x}"));
    assert_eq!(ev("s <<| r", &env).unwrap(), val("{b |-> y}"));
    assert_eq!(ev("r |> {y}", &env).unwrap(), val("{b |-> y}"));
    assert_eq!(ev("r |>> {y}", &env).unwrap(), val("{a |-> x, c |-> x}"));
    assert_eq!(
        ev("r <+ {a |-> z}", &env).unwrap(),
        val("{a |-> z, b |-> y, c |-> x}")
    );
    assert_eq!(ev("r(b)", &env).unwrap(), val("y"));
    assert_eq!(ev("card(r)", &env).unwrap(), Value::Int(3));
    assert_eq!(ev("dom({})", &env).unwrap(), val("{}"));
}

#[test]
fn application_errors() {
    let env = env_with(&[("r", "{a |-> x, a |-> y}")]);
    assert_eq!(ev("r(a)", &env).unwrap_err().code(), "E_APPLY_AMBIGUOUS");
    assert_eq!(ev("r(b)", &env).unwrap_err().code(), "E_APPLY_UNDEFINED");
    assert_eq!(ev("q", &env).unwrap_err().code(), "E_UNBOUND");
}

#[test]
fn lazy_function_spaces() {
    let env = env_with(&[
        ("A", "{a, b}"),
        ("B", "{x, y}"),
        ("f", "{a |-> x, b |-> x}"),
        ("g", "{a |-> x}"),
    ]);
    assert!(pv("f : A --> B", &env).unwrap());
    assert!(!pv("g : A --> B", &env).unwrap());
    assert!(pv("g : A +-> B", &env).unwrap());
    assert!(!pv("f : A >+> B", &env).unwrap());
    assert!(pv("g : A >+> B", &env).unwrap());
    assert!(pv("f : A <-> B", &env).unwrap());
    assert!(pv("{a |-> g} : A --> (A >+> B)", &env).is_ok());
    assert!(pv("{a} : POW(A)", &env).unwrap());
    // lazily decided even though the space itself would be too large
    let big = env_with(&[("S", "{1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20}")]);
    assert!(pv("{1 |-> 2} : S +-> S", &big).unwrap());
    assert_eq!(ev("S --> S", &big).unwrap_err().code(), "E_ENUM_LIMIT");
    assert_eq!(ev("POW(S)", &big).unwrap_err().code(), "E_POW_LIMIT");
}

#[test]
fn quantifiers_and_comprehension() {
    let env = env_with(&[
        ("S", "{1, 2, 3}"),
        ("nxt", "{r1 |-> {a |-> b}, r2 |-> {c |-> d}}"),
    ]);
    assert!(pv("!x.(x : S => x > 0)", &env).unwrap());
    assert!(!pv("!x.(x : S => x > 1)", &env).unwrap());
    assert!(pv("#x.(x : S & x = 2)", &env).unwrap());
    assert!(!pv("#x.(x : {} & x = x)", &env).unwrap());
    assert!(pv("!T.(T <: S & card(T) = 3 => T = S)", &env).unwrap());
    assert_eq!(
        ev(
            "{b |-> r | r : dom(nxt) & (b : dom(nxt(r)) or b : ran(nxt(r)))}",
            &env
        )
        .unwrap(),
        val("{a |-> r1, b |-> r1, c |-> r2, d |-> r2}")
    );
    assert_eq!(
        ev("{x |-> y | x |-> y : nxt(r1) \\/ nxt(r2)}", &env).unwrap(),
        val("{a |-> b, c |-> d}")
    );
    assert_eq!(
        pv("!x.(x > 0)", &env).unwrap_err().code(),
        "E_UNBOUNDED_QUANTIFIER"
    );
}

#[test]
fn partition_predicate() {
    let env = env_with(&[("S", "{a, b, c}")]);
    assert!(pv("partition(S, {a}, {b}, {c})", &env).unwrap());
    assert!(!pv("partition(S, {a}, {b})", &env).unwrap());
    assert!(!pv("partition(S, {a, b}, {b, c})", &env).unwrap());
}

#[test]
fn scopes_and_unsolved_constants() {
    let ctx = parse_context(
        "context c sets ROUTES BLOCKS constants rtbl axioms @a1 rtbl : BLOCKS <-> ROUTES end",
    )
    .unwrap();
    let mut scopes = BTreeMap::new();
    scopes.insert("ROUTES".to_string(), Scope::Size(2));
    scopes.insert("BLOCKS".to_string(), Scope::Size(3));
    let err = instantiate_context(&[&ctx], &scopes).unwrap_err();
    assert_eq!(err.first_code(), "E_UNSOLVED_CONSTANT");

    let ctx = parse_context("context c sets S end").unwrap();
    let err = instantiate_context(&[&ctx], &BTreeMap::new()).unwrap_err();
    assert_eq!(err.first_code(), "E_NO_EXTENT");
    let inst = instantiate_context(&[&ctx], &[("S".to_string(), Scope::Size(2))].into()).unwrap();
    assert_eq!(inst.universe.get("S").unwrap(), &[val("S1"), val("S2")]);
}

#[test]
fn enumeration_idiom_and_failing_axiom() {
    let ctx = parse_context(
        "context c sets RS constants free busy f axioms
           @p partition(RS, {free}, {busy})
           @d f = {free |-> busy}
           @x f(free) = free
         end",
    )
    .unwrap();
    let err = instantiate_context(&[&ctx], &BTreeMap::new()).unwrap_err();
    assert_eq!(err.0.len(), 1);
    assert_eq!(err.0[0].code, "E_AXIOM_FAILED");
    assert_eq!(err.0[0].label.as_deref(), Some("x"));
}
