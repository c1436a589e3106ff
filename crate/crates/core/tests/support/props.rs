//! Property checks shared by the property test suites and the acceptance
//! runner. Each check returns `Err` with a message on the first failure.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use vok_core::eval::eval;
use vok_core::explorer::{explore, export_json};
use vok_core::parser::{parse_context, parse_expr, parse_machine, parse_vo_file};
use vok_core::printer::{print_context, print_expr, print_machine, Notation};
use vok_core::project::EventMap;
use vok_core::traces::{erase, replay, Step, Trace};
use vok_core::vo::{evaluate_formula, Formula};
use vok_core::{Session, Value, Verdict};

use super::exprgen::{self, from_value, P, R, S};
use super::oracle::{explore_concrete, Concrete, Move, BLOCKS, STATUS};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn report<T: std::fmt::Debug>(
    r: Result<(), proptest::test_runner::TestError<T>>,
) -> Result<(), String> {
    r.map_err(|e| e.to_string())
}

// ------------------------------------------------------------ evaluator

#[derive(Debug, Clone)]
pub enum Case {
    Pred(P),
    Set(S),
    Rel(R),
}

pub fn case() -> BoxedStrategy<Case> {
    prop_oneof![
        2 => exprgen::pred().prop_map(Case::Pred),
        1 => exprgen::set_expr().prop_map(Case::Set),
        1 => exprgen::rel_expr().prop_map(Case::Rel),
    ]
    .boxed()
}

/// Evaluates one generated case with the engine and the reference.
pub fn evaluator_agrees(c: &Case, vars: &exprgen::Vars) -> Result<(), TestCaseError> {
    let (text, expected) = match c {
        Case::Pred(p) => (
            exprgen::show_p(p),
            exprgen::V::Bool(exprgen::eval_p(p, vars, None)),
        ),
        Case::Set(s) => (
            exprgen::show_s(s),
            exprgen::set_value(&exprgen::eval_s(s, vars, None)),
        ),
        Case::Rel(r) => (
            exprgen::show_r(r),
            exprgen::rel_value(&exprgen::eval_r(r, vars, None)),
        ),
    };
    let e = parse_expr(&text).map_err(|d| TestCaseError::fail(format!("{text}: {d}")))?;
    let got = eval(&e, &vars.env()).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
    prop_assert_eq!(from_value(&got), expected, "{}", text);
    Ok(())
}

pub fn evaluator_vs_reference(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&(case(), exprgen::vars()), |(c, v)| {
        evaluator_agrees(&c, &v)
    }))
}

// -------------------------------------------------------- verdict algebra

/// A formula over tasks `T0..Tn` with the verdict each task returns.
#[derive(Debug, Clone)]
pub struct Tree {
    pub formula: Formula,
    pub verdicts: Vec<Verdict>,
}

fn verdict() -> impl Strategy<Value = Verdict> {
    prop_oneof![
        4 => Just(Verdict::Pass),
        1 => Just(Verdict::Fail),
        1 => Just(Verdict::Unknown),
        1 => Just(Verdict::Error),
    ]
}

fn shape() -> impl Strategy<Value = Formula> {
    Just(Formula::task("?")).prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::And(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::Seq(Box::new(a), Box::new(b))),
        ]
    })
}

fn number(f: &Formula, next: &mut usize) -> Formula {
    match f {
        Formula::Task { .. } => {
            *next += 1;
            Formula::task(&format!("T{}", *next - 1))
        }
        Formula::And(a, b) => {
            let a = number(a, next);
            Formula::And(Box::new(a), Box::new(number(b, next)))
        }
        Formula::Seq(a, b) => {
            let a = number(a, next);
            Formula::Seq(Box::new(a), Box::new(number(b, next)))
        }
    }
}

pub fn tree() -> impl Strategy<Value = Tree> {
    shape().prop_flat_map(|s| {
        let mut n = 0;
        let formula = number(&s, &mut n);
        proptest::collection::vec(verdict(), n).prop_map(move |verdicts| Tree {
            formula: formula.clone(),
            verdicts,
        })
    })
}

/// Runs `f`; returns the verdict, the tasks run and the tasks skipped.
pub fn run(f: &Formula, verdicts: &[Verdict]) -> (Verdict, Vec<usize>, Vec<usize>) {
    let idx = |id: &str| id[1..].parse::<usize>().unwrap();
    let mut ran = Vec::new();
    let mut skipped = Vec::new();
    let (v, _) = evaluate_formula::<()>(
        f,
        &[],
        &mut |id, _, _| {
            ran.push(idx(id));
            (verdicts[idx(id)], Vec::new())
        },
        &mut |id| skipped.push(idx(id)),
    );
    (v, ran, skipped)
}

/// Tasks skipped by the reference rule: everything right of a `;` whose
/// left side did not pass.
fn reference(f: &Formula, verdicts: &[Verdict], out_skipped: &mut Vec<usize>) -> Verdict {
    match f {
        Formula::Task { id, .. } => verdicts[id[1..].parse::<usize>().unwrap()],
        Formula::And(a, b) => {
            let (va, vb) = (
                reference(a, verdicts, out_skipped),
                reference(b, verdicts, out_skipped),
            );
            va.max(vb)
        }
        Formula::Seq(a, b) => {
            let va = reference(a, verdicts, out_skipped);
            if va == Verdict::Pass {
                reference(b, verdicts, out_skipped)
            } else {
                out_skipped.extend(
                    b.task_ids()
                        .iter()
                        .map(|id| id[1..].parse::<usize>().unwrap()),
                );
                va.max(Verdict::Skipped)
            }
        }
    }
}

pub fn verdict_laws(t: &Tree) -> Result<(), TestCaseError> {
    let (v, ran, mut skipped) = run(&t.formula, &t.verdicts);
    let mut expected_skipped = Vec::new();
    let expected = reference(&t.formula, &t.verdicts, &mut expected_skipped);
    prop_assert_eq!(v, expected);
    skipped.sort_unstable();
    expected_skipped.sort_unstable();
    prop_assert_eq!(&skipped, &expected_skipped);
    // every task is either run or skipped, exactly once
    let mut all: Vec<usize> = ran.iter().chain(&skipped).copied().collect();
    all.sort_unstable();
    prop_assert_eq!(all, (0..t.verdicts.len()).collect::<Vec<_>>());
    // FAIL and ERROR absorb: the rollup is at least every executed verdict
    for &i in &ran {
        prop_assert!(v >= t.verdicts[i]);
    }
    // PASS iff everything ran and passed
    prop_assert_eq!(
        v == Verdict::Pass,
        skipped.is_empty() && ran.iter().all(|&i| t.verdicts[i] == Verdict::Pass)
    );

    // `&` commutes and associates, `;` associates (verdict level)
    if let Formula::And(a, b) = &t.formula {
        let swapped = Formula::And(b.clone(), a.clone());
        prop_assert_eq!(run(&swapped, &t.verdicts).0, v);
    }
    for assoc in [
        reassociate(&t.formula, true),
        reassociate(&t.formula, false),
    ]
    .into_iter()
    .flatten()
    {
        prop_assert_eq!(run(&assoc, &t.verdicts).0, v);
    }
    Ok(())
}

/// `(a op b) op c` -> `a op (b op c)` at the root, for `&` or `;`.
fn reassociate(f: &Formula, and: bool) -> Option<Formula> {
    match (f, and) {
        (Formula::And(l, c), true) => match &**l {
            Formula::And(a, b) => Some(Formula::And(
                a.clone(),
                Box::new(Formula::And(b.clone(), c.clone())),
            )),
            _ => None,
        },
        (Formula::Seq(l, c), false) => match &**l {
            Formula::Seq(a, b) => Some(Formula::Seq(
                a.clone(),
                Box::new(Formula::Seq(b.clone(), c.clone())),
            )),
            _ => None,
        },
        _ => None,
    }
}

pub fn verdict_algebra(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&tree(), |t| verdict_laws(&t)))
}

// ------------------------------------------------------ parser fixpoints

/// Parse, print and re-parse every corpus model, VO file and glue
/// expression; the second print must equal the first.
pub fn parser_fixpoint() -> Result<usize, String> {
    let mut checked = 0;
    for path in super::corpus_files("mch") {
        let text = std::fs::read_to_string(&path).unwrap();
        let m = parse_machine(&text).map_err(|d| format!("{}: {d}", path.display()))?;
        let printed = print_machine(&m, Notation::Ascii);
        let again =
            parse_machine(&printed).map_err(|d| format!("{}: reprint: {d}", path.display()))?;
        if again != m || print_machine(&again, Notation::Ascii) != printed {
            return Err(format!("{} is not a print/parse fixpoint", path.display()));
        }
        checked += 1;
    }
    for path in super::corpus_files("ctx") {
        let text = std::fs::read_to_string(&path).unwrap();
        let c = parse_context(&text).map_err(|d| format!("{}: {d}", path.display()))?;
        let printed = print_context(&c, Notation::Ascii);
        let again =
            parse_context(&printed).map_err(|d| format!("{}: reprint: {d}", path.display()))?;
        if again != c || print_context(&again, Notation::Ascii) != printed {
            return Err(format!("{} is not a print/parse fixpoint", path.display()));
        }
        checked += 1;
    }
    for path in super::corpus_files("vo") {
        let text = std::fs::read_to_string(&path).unwrap();
        let f = parse_vo_file(&text).map_err(|d| format!("{}: {d}", path.display()))?;
        let printed = f.render();
        let again =
            parse_vo_file(&printed).map_err(|d| format!("{}: reprint: {d}", path.display()))?;
        if again != f || again.render() != printed {
            return Err(format!("{} is not a render/parse fixpoint", path.display()));
        }
        checked += 1;
    }
    let p = super::load_corpus();
    for l in &p.links {
        for (var, e) in l.glue.iter().flat_map(|g| g.glue.iter()) {
            let printed = print_expr(e, Notation::Ascii);
            let again = parse_expr(&printed).map_err(|d| format!("glue {var}: {d}"))?;
            if &again != e {
                return Err(format!("glue of {var} changes on reprint: {printed}"));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

// ---------------------------------------------------- explorer determinism

/// Explores the same machine `runs` times in fresh sessions and compares
/// the exported spaces byte for byte.
pub fn explorer_determinism(machine: &str, bound: usize, runs: usize) -> Result<usize, String> {
    let mut first: Option<String> = None;
    let mut states = 0;
    for _ in 0..runs {
        let s = Session::with_bound(super::load_corpus(), bound);
        let m = s.flat(machine).map_err(|e| e.to_string())?;
        let inst = s.instance(machine).map_err(|e| e.to_string())?;
        let ss = explore(&m, &inst.env, bound).map_err(|e| e.to_string())?;
        states = ss.len();
        let json = export_json(&ss);
        match &first {
            None => first = Some(json),
            Some(f) if *f == json => {}
            Some(_) => return Err(format!("{machine}: exploration differs between runs")),
        }
    }
    Ok(states)
}

// ------------------------------------------------ simulation soundness

/// Random walk on the concrete route model (hand-written rules), as the
/// choice made at each step.
pub fn walk() -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(any::<u32>(), 1..60)
}

fn walk_steps(choices: &[u32]) -> Vec<(Move, Concrete, Concrete)> {
    let mut s = Concrete::initial();
    let mut out = Vec::new();
    for &c in choices {
        let moves = s.moves();
        if moves.is_empty() {
            break;
        }
        let (m, t) = moves[c as usize % moves.len()];
        out.push((m, s, t));
        s = t;
    }
    out
}

fn route(r: usize) -> Value {
    Value::atom(&format!("R{}", r + 1))
}

/// A concrete walk is replayed by the engine, erased to the abstract
/// machine and replayed again; the abstract states must be the images of
/// the concrete ones under the glue, computed by hand.
pub fn walk_is_simulated(
    session: &Session,
    events: &EventMap,
    choices: &[u32],
) -> Result<(), TestCaseError> {
    let steps = walk_steps(choices);
    let mut trace = Trace::new("train_1_routes", Vec::new());
    for (m, _, _) in &steps {
        let mut step = match *m {
            Move::Reservation(r) | Move::Freeing(r) | Move::Formation(r) => {
                Step::new(m.event(), &[("r", route(r))])
            }
            Move::Release(r, b) => Step::new(
                m.event(),
                &[("r", route(r)), ("b", Value::atom(&BLOCKS[b].to_string()))],
            ),
        };
        step.skip = matches!(m, Move::Release(..));
        trace.steps.push(step);
    }
    let conc = session.flat("train_1_routes").unwrap();
    let conc_env = session.instance("train_1_routes").unwrap();
    let r = replay(&trace, &conc, &conc_env.env).unwrap();
    prop_assert!(r.passed(), "concrete walk rejected: {}", r.describe());

    let abs = session.flat("train_routes").unwrap();
    let abs_env = session.instance("train_routes").unwrap();
    let erased = erase(&trace, events, &abs).unwrap();
    let ra = replay(&erased, &abs, &abs_env.env).unwrap();
    prop_assert!(ra.passed(), "abstract image rejected: {}", ra.describe());

    // hand-computed images of the non-skip states
    let mut images = vec![Concrete::initial()];
    for (m, _, t) in &steps {
        if !matches!(m, Move::Release(..)) {
            images.push(*t);
        }
    }
    // ... and skip steps never change the image
    for (m, s, t) in &steps {
        if matches!(m, Move::Release(..)) {
            for r in 0..super::oracle::ROUTES {
                prop_assert_eq!(s.status(r), t.status(r));
            }
        }
    }
    prop_assert_eq!(images.len(), ra.states.len());
    for (c, a) in images.iter().zip(&ra.states) {
        let rs = Value::set(
            (0..super::oracle::ROUTES)
                .map(|r| Value::pair(route(r), Value::atom(STATUS[c.status(r) as usize]))),
        );
        prop_assert_eq!(&a[0], &rs);
    }
    Ok(())
}

pub fn simulation_walks(session: &Session, cases: u32) -> Result<(), String> {
    let link = session.project.require_link("routes-abstraction").unwrap();
    let events = link.event_map().unwrap().clone();
    report(runner(cases).run(&walk(), |w| walk_is_simulated(session, &events, &w)))
}

/// Number of reachable concrete states, by the hand-written rules.
pub fn concrete_counts() -> (usize, usize) {
    explore_concrete(|_, _| {})
}
