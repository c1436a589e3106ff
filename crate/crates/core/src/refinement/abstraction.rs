//! Alternate-view abstraction links.
//!
//! An abstraction link says that a new, more abstract machine AM describes
//! an existing model MM. MM is written once more as MM_md, a refinement of
//! AM that carries the gluing invariants; three independent gates decide
//! whether the link is sound:
//!
//! 1. MM_md adds nothing to (flattened) MM but gluing: no variables,
//!    events, axioms or non-gluing invariants of its own;
//! 2. MM_md forward-simulates AM through the link's glue and event map;
//! 3. MM_md and MM have isomorphic state spaces (same states, same
//!    labelled transitions).

use std::collections::BTreeSet;
use std::sync::Arc;

use rustc_hash::FxHashSet;

use super::simulation::{check_forward_simulation, Side, SimulationReport};
use crate::ast::{Labelled, Machine, Name};
use crate::error::{Error, Result};
use crate::eval::Instance;
use crate::explorer::{fold_machine, Semantics};
use crate::project::{Link, LinkKind};
use crate::session::Session;
use crate::value::Value;
use crate::verdict::Verdict;

#[derive(Debug, Clone)]
pub struct Gate {
    pub number: u8,
    pub name: &'static str,
    pub verdict: Verdict,
    pub code: Option<&'static str>,
    pub detail: String,
}

impl Gate {
    fn new(
        number: u8,
        name: &'static str,
        outcome: Result<(Verdict, Option<&'static str>, String)>,
    ) -> Gate {
        let (verdict, code, detail) = match outcome {
            Ok(x) => x,
            Err(e) => (Verdict::Error, Some(e.code()), e.to_string()),
        };
        Gate {
            number,
            name,
            verdict,
            code,
            detail,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AbstractionReport {
    pub link: String,
    pub gates: Vec<Gate>,
    pub simulation: Option<SimulationReport>,
}

impl AbstractionReport {
    pub fn verdict(&self) -> Verdict {
        Verdict::all(self.gates.iter().map(|g| g.verdict))
    }

    pub fn gate(&self, number: u8) -> &Gate {
        &self.gates[number as usize - 1]
    }
}

/// Runs the three gates of abstraction link `link_name`.
pub fn check_abstraction(session: &Session, link_name: &str) -> Result<AbstractionReport> {
    let p = &session.project;
    let link = p.require_link(link_name)?;
    if link.kind != LinkKind::Abstracts {
        return Err(Error::check(
            "E_LINK_KIND",
            format!(
                "link `{}` is a {} link, not an abstraction",
                link.name,
                link.kind.as_str()
            ),
        ));
    }
    let am = session.flat(link.abstract_machine())?;
    let mm_name = link.concrete_machine();
    let md_name = link.flattened.as_deref().unwrap_or(mm_name);
    let mm = session.flat(mm_name)?;
    let md_raw = p.require_machine(md_name)?;
    let md = session.flat(md_name)?;

    let gate1 = Gate::new(
        1,
        "no new information",
        new_information(session, &mm, md_raw, &am),
    );
    let mut simulation = None;
    let gate2 = Gate::new(
        2,
        "forward simulation",
        simulate(session, link, &am, &md, md_raw).map(|r| {
            let out = (
                r.verdict,
                r.code.or(r.counterexample.as_ref().map(|_| "E_SIMULATION")),
                r.describe(),
            );
            simulation = Some(r);
            out
        }),
    );
    let gate3 = Gate::new(3, "behavioural identity", {
        let (mm_inst, md_inst) = (session.instance(mm_name), session.instance(md_name));
        mm_inst.and_then(|a| md_inst.and_then(|b| isomorphic(session, &mm, &a, &md, &b)))
    });
    Ok(AbstractionReport {
        link: link.name.clone(),
        gates: vec![gate1, gate2, gate3],
        simulation,
    })
}

/// Invariants of `m` that mention a variable of `am`.
pub fn gluing_invariants<'a>(m: &'a Machine, am: &Machine) -> Vec<&'a Labelled> {
    m.invariants
        .iter()
        .filter(|i| {
            i.pred
                .free_vars()
                .iter()
                .any(|n| am.has_variable(n) && !m.has_variable(n))
        })
        .collect()
}

fn new_information(
    session: &Session,
    mm: &Machine,
    md: &Machine,
    am: &Machine,
) -> Result<(Verdict, Option<&'static str>, String)> {
    let mut found = Vec::new();
    for v in &md.variables {
        if !mm.has_variable(v) {
            found.push(format!("variable `{v}`"));
        }
    }
    for e in md.transitions() {
        if mm.event(&e.name).is_none() {
            found.push(format!("event `{}`", e.name));
        }
    }
    let glue = gluing_invariants(md, am);
    for inv in &md.invariants {
        if !glue.contains(&inv) && !mm.invariants.iter().any(|i| i.pred == inv.pred) {
            found.push(format!("invariant @{}", inv.label));
        }
    }
    let p = &session.project;
    let known: Vec<&Labelled> = p
        .contexts_seen(&mm.sees)?
        .iter()
        .flat_map(|c| c.axioms.iter())
        .collect();
    for c in p.contexts_seen(&md.sees)? {
        for ax in &c.axioms {
            if !known.iter().any(|k| k.pred == ax.pred) {
                found.push(format!("axiom @{} of `{}`", ax.label, c.name));
            }
        }
    }
    Ok(if found.is_empty() {
        let detail = format!("`{}` adds only {} gluing invariant(s)", md.name, glue.len());
        (Verdict::Pass, None, detail)
    } else {
        let detail = format!("`{}` adds {}", md.name, found.join(", "));
        (Verdict::Fail, Some("E_NEW_INFORMATION"), detail)
    })
}

fn simulate(
    session: &Session,
    link: &Link,
    am: &Machine,
    md: &Machine,
    md_raw: &Machine,
) -> Result<SimulationReport> {
    let glue = link.glue.as_ref().ok_or_else(|| {
        Error::check(
            "E_GLUE_REQUIRED",
            format!("link `{}` has no glue", link.name),
        )
    })?;
    let events = link.event_map().ok_or_else(|| {
        Error::check(
            "E_EVENT_MAP",
            format!("link `{}` has no event map", link.name),
        )
    })?;
    // static problems first: no point exploring for a broken map
    events.validate(md, am)?;
    let am_inst = session.instance(&am.name)?;
    let md_inst = session.instance(&md.name)?;
    let ss = session.explore_machine(md, &md_inst)?;
    let gluing: Vec<Labelled> = gluing_invariants(md_raw, am).into_iter().cloned().collect();
    check_forward_simulation(
        Side {
            machine: am,
            env: &am_inst.env,
        },
        Side {
            machine: md,
            env: &md_inst.env,
        },
        &ss,
        glue,
        events,
        &gluing,
    )
}

type Labelled3 = (String, Vec<(Name, Value)>, Vec<Value>);

/// State-space isomorphism under the identity on variable names: equal
/// reachable valuations and equal labelled transition relations.
///
/// Explores `a` and replays every state of it on `b`, comparing successor
/// sets; the first difference is reported. This is symmetric: if `b` could
/// reach a state `a` cannot, some common state has differing successors.
pub fn isomorphic(
    session: &Session,
    a: &Machine,
    a_inst: &Arc<Instance>,
    b: &Machine,
    b_inst: &Arc<Instance>,
) -> Result<(Verdict, Option<&'static str>, String)> {
    let names = |m: &Machine| m.variables.iter().cloned().collect::<BTreeSet<Name>>();
    if names(a) != names(b) {
        let detail = format!(
            "variables differ: `{}` has {{{}}}, `{}` has {{{}}}",
            a.name,
            join(&a.variables),
            b.name,
            join(&b.variables)
        );
        return Ok((Verdict::Fail, Some("E_NOT_ISOMORPHIC"), detail));
    }
    if a_inst.contexts == b_inst.contexts && session.same_behaviour(a, b, a_inst) {
        return Ok((Verdict::Pass, None, "identical behaviour".into()));
    }

    let ss = session.explore_machine(a, a_inst)?;
    let folded = fold_machine(b, &b_inst.env);
    let sem = Semantics::new(&folded, &b_inst.env)?;
    // b's variable order, as indices into a's
    let order: Vec<usize> = b
        .variables
        .iter()
        .map(|v| a.variables.iter().position(|x| x == v).expect("same names"))
        .collect();
    let to_a = |vals: &[Value]| -> Vec<Value> {
        let mut out = vec![Value::empty_set(); vals.len()];
        for (i, &j) in order.iter().enumerate() {
            out[j] = vals[i].clone();
        }
        out
    };
    let to_b = |vals: &[Value]| -> Vec<Value> { order.iter().map(|&j| vals[j].clone()).collect() };

    let b_init = to_a(&sem.initial()?);
    if b_init != ss.valuation(ss.initial()) {
        return Ok((
            Verdict::Fail,
            Some("E_NOT_ISOMORPHIC"),
            "initial states differ".into(),
        ));
    }
    let sorted = |mut v: Vec<(Name, Value)>| {
        v.sort();
        v
    };
    let mut succ = Vec::new();
    for s in 0..ss.len() as u32 {
        let from = ss.valuation(s);
        let expected: FxHashSet<Labelled3> = ss
            .outgoing(s)
            .iter()
            .map(|e| {
                (
                    ss.events()[e.event as usize].clone(),
                    sorted(ss.edge_params(e)),
                    ss.valuation(e.to),
                )
            })
            .collect();
        succ.clear();
        sem.successors(&to_b(&from), &mut succ)?;
        let actual: FxHashSet<Labelled3> = succ
            .drain(..)
            .map(|x| {
                let ev = sem.event(x.event);
                let params = sorted(ev.params.iter().cloned().zip(x.binding).collect());
                (ev.name.clone(), params, to_a(&x.state))
            })
            .collect();
        // a truncated exploration drops edges into unexplored states, and
        // only those
        let truncated = !ss.complete()
            && expected.is_subset(&actual)
            && actual
                .difference(&expected)
                .all(|t| ss.find(&t.2).is_none());
        if expected != actual && !truncated {
            let only = |x: &FxHashSet<Labelled3>, y: &FxHashSet<Labelled3>| {
                let mut names: Vec<&str> = x.difference(y).map(|t| t.0.as_str()).collect();
                names.sort_unstable();
                names.dedup();
                names.join(", ")
            };
            let detail = format!(
                "state {s} (depth {}): transitions only in `{}`: [{}]; only in `{}`: [{}]",
                ss.depth(s),
                a.name,
                only(&expected, &actual),
                b.name,
                only(&actual, &expected)
            );
            return Ok((Verdict::Fail, Some("E_NOT_ISOMORPHIC"), detail));
        }
    }
    Ok(if ss.complete() {
        (
            Verdict::Pass,
            None,
            format!(
                "{} states, {} transitions match",
                ss.len(),
                ss.transition_count()
            ),
        )
    } else {
        (
            Verdict::Unknown,
            Some("E_INCOMPLETE"),
            format!("first {} states match; exploration incomplete", ss.len()),
        )
    })
}

fn join(names: &[Name]) -> String {
    names
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}
