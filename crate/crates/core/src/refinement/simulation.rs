//! Forward simulation of an abstract machine by an explored concrete one.
//!
//! The gluing map gives every abstract variable as an expression over the
//! concrete state, so each concrete state `s` has one abstract image α(s).
//! A concrete step `s → s'` labelled `E` is simulated when
//!
//! * `E` maps to NEW and α(s') = α(s) (a stutter), or
//! * the abstract event `events(E)` is enabled at α(s) under some binding
//!   that agrees with `E`'s binding on shared parameter names, and leads to
//!   α(s').
//!
//! Additionally α(initial) must be the abstract initial state, abstract
//! invariants must hold at every α(s) and predicate-form gluing invariants
//! (when supplied) must hold at every pair `(s, α(s))`.
//!
//! Images, invariant results and step verdicts are memoised in id space, so
//! the cost is dominated by one hash lookup per concrete transition.

use std::fmt;
use std::hash::BuildHasherDefault;

use indexmap::IndexSet;
use rustc_hash::{FxHashMap, FxHasher};

use crate::ast::{Expr, Labelled, Machine, Name};
use crate::error::{Error, Result};
use crate::eval::{fold_constants, Env, Frame};
use crate::explorer::{eval_error, fold_machine, Edge, Semantics, StateSpace};
use crate::project::{EventMap, EventTarget, GluingMap};
use crate::traces::Step;
use crate::value::Value;
use crate::verdict::Verdict;

type FxIndexSet<T> = IndexSet<T, BuildHasherDefault<FxHasher>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Obligation {
    InitMismatch,
    StutterViolation,
    AbstractEventDisabled,
    AbstractTargetMismatch,
    AbstractInvariantViolated,
    GluingInvariantViolated,
}

impl Obligation {
    pub fn as_str(self) -> &'static str {
        match self {
            Obligation::InitMismatch => "init-mismatch",
            Obligation::StutterViolation => "stutter-violation",
            Obligation::AbstractEventDisabled => "abstract-event-disabled",
            Obligation::AbstractTargetMismatch => "abstract-target-mismatch",
            Obligation::AbstractInvariantViolated => "abstract-invariant-violated",
            Obligation::GluingInvariantViolated => "gluing-invariant-violated",
        }
    }
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub obligation: Obligation,
    /// Concrete steps from the initial state; the last one is the failing
    /// step for transition obligations.
    pub trace: Vec<Step>,
    pub detail: String,
}

impl Counterexample {
    pub fn depth(&self) -> usize {
        self.trace.len()
    }
}

#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub verdict: Verdict,
    /// `E_INCOMPLETE` when the concrete exploration hit its bound.
    pub code: Option<&'static str>,
    pub counterexample: Option<Counterexample>,
    pub states: usize,
    pub transitions: usize,
}

impl SimulationReport {
    pub fn describe(&self) -> String {
        match (&self.counterexample, self.code) {
            (Some(c), _) => format!("{} after {} step(s): {}", c.obligation, c.depth(), c.detail),
            (None, Some(code)) => format!(
                "{code}: no violation within {} states, but exploration is incomplete",
                self.states
            ),
            (None, None) => format!(
                "simulated {} states / {} transitions",
                self.states, self.transitions
            ),
        }
    }
}

/// One side of a simulation check: a flattened machine and its constants.
#[derive(Clone, Copy)]
pub struct Side<'a> {
    pub machine: &'a Machine,
    pub env: &'a Env,
}

/// Checks that the explored concrete space `ss` simulates `abs` through
/// `glue` and `events`. `gluing` are predicate-form gluing invariants over
/// both variable sets; they are checked at every `(s, α(s))`.
pub fn check_forward_simulation(
    abs: Side<'_>,
    conc: Side<'_>,
    ss: &StateSpace,
    glue: &GluingMap,
    events: &EventMap,
    gluing: &[Labelled],
) -> Result<SimulationReport> {
    events.validate(conc.machine, abs.machine)?;
    let missing: Vec<&str> = abs
        .machine
        .variables
        .iter()
        .filter(|v| glue.get(v).is_none())
        .map(|v| &**v)
        .collect();
    if !missing.is_empty() {
        return Err(Error::check(
            "E_UNGLUED_VARIABLE",
            format!("no glue for abstract variable(s) {}", missing.join(", ")),
        ));
    }

    let abs_folded = fold_machine(abs.machine, abs.env);
    let abs_sem = Semantics::new(&abs_folded, abs.env)?;
    let checker = Checker::new(abs_sem, conc, ss, glue, gluing);
    checker.run(events)
}

struct Checker<'a> {
    abs: Semantics<'a>,
    conc: Side<'a>,
    ss: &'a StateSpace,
    glue: Vec<Expr>,
    glue_reads: Vec<usize>,
    gluing: Vec<(Labelled, Vec<usize>)>,
}

fn reads(e: &Expr, vars: &[Name]) -> Vec<usize> {
    let mut out: Vec<usize> = e
        .free_vars()
        .iter()
        .filter_map(|n| vars.iter().position(|v| v == n))
        .collect();
    out.sort_unstable();
    out
}

impl<'a> Checker<'a> {
    fn new(
        abs: Semantics<'a>,
        conc: Side<'a>,
        ss: &'a StateSpace,
        glue: &GluingMap,
        gluing: &[Labelled],
    ) -> Self {
        let vars = ss.variables();
        let glue: Vec<Expr> = abs
            .variables()
            .iter()
            .map(|v| fold_constants(glue.get(v).expect("glue checked total"), conc.env, vars))
            .collect();
        let mut glue_reads: Vec<usize> = glue.iter().flat_map(|e| reads(e, vars)).collect();
        glue_reads.sort_unstable();
        glue_reads.dedup();
        let shadow: Vec<Name> = vars.iter().chain(abs.variables()).cloned().collect();
        let gluing = gluing
            .iter()
            .map(|g| {
                let pred = fold_constants(&g.pred, conc.env, &shadow);
                let r = reads(&pred, vars);
                (Labelled { pred, ..g.clone() }, r)
            })
            .collect();
        Checker {
            abs,
            conc,
            ss,
            glue,
            glue_reads,
            gluing,
        }
    }

    fn alpha(&self, state: u32) -> Result<Vec<Value>> {
        let vals = self.ss.valuation(state);
        let mut frame = Frame::with_state(self.conc.env, self.ss.variables(), &vals);
        self.glue
            .iter()
            .zip(self.abs.variables())
            .map(|(e, v)| {
                frame
                    .eval(e)
                    .map_err(|err| eval_error(err, format!("glue of `{v}`")))
            })
            .collect()
    }

    fn gluing_holds(&self, g: &Labelled, state: u32, image: &[Value]) -> Result<bool> {
        let vals = self.ss.valuation(state);
        let mut frame = Frame::with_state(self.conc.env, self.ss.variables(), &vals);
        for (v, x) in self.abs.variables().iter().zip(image) {
            frame.bind(v.clone(), x.clone());
        }
        frame
            .pred(&g.pred)
            .map_err(|e| eval_error(e, format!("gluing invariant @{}", g.label)))
    }

    fn trace_to(&self, state: u32, last: Option<&Edge>) -> Vec<Step> {
        let ss = self.ss;
        let step = |e: &Edge| Step {
            event: ss.events()[e.event as usize].clone(),
            params: ss.edge_params(e),
            skip: false,
        };
        let mut out: Vec<Step> = ss.path_to(state).iter().map(|(_, e)| step(e)).collect();
        out.extend(last.map(step));
        out
    }

    fn fail(&self, obligation: Obligation, trace: Vec<Step>, detail: String) -> SimulationReport {
        SimulationReport {
            verdict: Verdict::Fail,
            code: None,
            counterexample: Some(Counterexample {
                obligation,
                trace,
                detail,
            }),
            states: self.ss.len(),
            transitions: self.ss.transition_count(),
        }
    }

    fn render(&self, image: &[Value]) -> String {
        self.abs
            .variables()
            .iter()
            .zip(image)
            .map(|(v, x)| format!("{v} = {x}"))
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn run(&self, events: &EventMap) -> Result<SimulationReport> {
        let ss = self.ss;
        let n = ss.len();

        // α(s) for every state, interned.
        let mut images: FxIndexSet<Vec<Value>> = FxIndexSet::default();
        let mut by_reads: FxHashMap<Vec<u32>, u32> = FxHashMap::default();
        let mut alpha = Vec::with_capacity(n);
        for s in 0..n as u32 {
            let ids = ss.value_ids(s);
            let key: Vec<u32> = self.glue_reads.iter().map(|&v| ids[v]).collect();
            let a = match by_reads.get(&key) {
                Some(&a) => a,
                None => {
                    let a = images.insert_full(self.alpha(s)?).0 as u32;
                    by_reads.insert(key, a);
                    a
                }
            };
            alpha.push(a);
        }

        // (1) initial states correspond
        let abs_init = self.abs.initial()?;
        let img0 = &images[alpha[0] as usize];
        if *img0 != abs_init {
            return Ok(self.fail(
                Obligation::InitMismatch,
                Vec::new(),
                format!(
                    "α(initial) is [{}], abstract initial state is [{}]",
                    self.render(img0),
                    self.render(&abs_init)
                ),
            ));
        }

        // abstract event index of every concrete event (None = NEW)
        let targets: Vec<Option<usize>> = ss
            .events()
            .iter()
            .map(|e| match events.get(e) {
                Some(EventTarget::Abstract(a)) => self.abs.event_index(a),
                _ => None,
            })
            .collect();
        let shared: Vec<Vec<usize>> = ss
            .events()
            .iter()
            .enumerate()
            .map(|(k, _)| match targets[k] {
                None => Vec::new(),
                Some(ak) => {
                    let abs_params = &self.abs.event(ak).params;
                    ss.event_params(k)
                        .iter()
                        .enumerate()
                        .filter(|(_, p)| abs_params.contains(p))
                        .map(|(i, _)| i)
                        .collect()
                }
            })
            .collect();

        let mut inv_ok: FxHashMap<u32, Option<&str>> = FxHashMap::default();
        let mut glue_ok: FxHashMap<(usize, Vec<u32>, u32), bool> = FxHashMap::default();
        let mut step_ok: FxHashMap<(u16, Vec<Value>, u32, u32), Option<Obligation>> =
            FxHashMap::default();

        for s in 0..n as u32 {
            let a = alpha[s as usize];
            let image = &images[a as usize];

            // (3) abstract invariants at α(s)
            let violated = match inv_ok.get(&a) {
                Some(v) => *v,
                None => {
                    let v = self.abs.violated(image)?.first().copied();
                    inv_ok.insert(a, v);
                    v
                }
            };
            if let Some(label) = violated {
                return Ok(self.fail(
                    Obligation::AbstractInvariantViolated,
                    self.trace_to(s, None),
                    format!("@{label} fails at α-state [{}]", self.render(image)),
                ));
            }
            for (i, (g, r)) in self.gluing.iter().enumerate() {
                let ids = ss.value_ids(s);
                let key = (i, r.iter().map(|&v| ids[v]).collect(), a);
                let ok = match glue_ok.get(&key) {
                    Some(&ok) => ok,
                    None => {
                        let ok = self.gluing_holds(g, s, image)?;
                        glue_ok.insert(key, ok);
                        ok
                    }
                };
                if !ok {
                    return Ok(self.fail(
                        Obligation::GluingInvariantViolated,
                        self.trace_to(s, None),
                        format!("@{} fails with [{}]", g.label, self.render(image)),
                    ));
                }
            }

            // (2) every outgoing step is simulated
            for edge in ss.outgoing(s) {
                let b = alpha[edge.to as usize];
                let k = edge.event as usize;
                let binding = ss.binding(edge.binding);
                let shared_vals: Vec<Value> =
                    shared[k].iter().map(|&i| binding[i].clone()).collect();
                let key = (edge.event, shared_vals, a, b);
                let verdict = match step_ok.get(&key) {
                    Some(v) => *v,
                    None => {
                        let v = self.step(targets[k], k, &key.1, a, b, &images)?;
                        step_ok.insert(key, v);
                        v
                    }
                };
                if let Some(ob) = verdict {
                    let event = &ss.events()[k];
                    let detail = match ob {
                        Obligation::StutterViolation => format!(
                            "`{event}` maps to NEW but changes the abstract state from [{}] to [{}]",
                            self.render(image),
                            self.render(&images[b as usize])
                        ),
                        Obligation::AbstractEventDisabled => format!(
                            "abstract `{}` is not enabled at α-state [{}]",
                            self.abs.event(targets[k].unwrap()).name,
                            self.render(image)
                        ),
                        _ => format!(
                            "abstract `{}` cannot reach α-state [{}] from [{}]",
                            self.abs.event(targets[k].unwrap()).name,
                            self.render(&images[b as usize]),
                            self.render(image)
                        ),
                    };
                    return Ok(self.fail(ob, self.trace_to(s, Some(edge)), detail));
                }
            }
        }

        let complete = ss.complete();
        Ok(SimulationReport {
            verdict: if complete {
                Verdict::Pass
            } else {
                Verdict::Unknown
            },
            code: (!complete).then_some("E_INCOMPLETE"),
            counterexample: None,
            states: n,
            transitions: ss.transition_count(),
        })
    }

    /// Verdict of one concrete step between α-states `a` and `b`.
    fn step(
        &self,
        target: Option<usize>,
        k: usize,
        shared: &[Value],
        a: u32,
        b: u32,
        images: &FxIndexSet<Vec<Value>>,
    ) -> Result<Option<Obligation>> {
        let Some(ak) = target else {
            return Ok((a != b).then_some(Obligation::StutterViolation));
        };
        let fixed: Vec<(Name, Value)> = self
            .ss
            .event_params(k)
            .iter()
            .filter(|p| self.abs.event(ak).params.contains(p))
            .cloned()
            .zip(shared.iter().cloned())
            .collect();
        let succ = self.abs.instances(ak, &images[a as usize], &fixed)?;
        if succ.is_empty() {
            return Ok(Some(Obligation::AbstractEventDisabled));
        }
        let wanted = &images[b as usize];
        Ok(
            (!succ.iter().any(|x| x.state == *wanted))
                .then_some(Obligation::AbstractTargetMismatch),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::explore;
    use crate::parser::{parse_expr, parse_machine, parse_value};

    const ABS: &str = "machine a variables on invariants @t on = TRUE or on = FALSE events
        event INITIALISATION then @a on := FALSE end
        event toggle then @a on := (on = FALSE) end end";

    const CONC: &str = "machine c variables n events
        event INITIALISATION then @a n := 0 end
        event inc where @g n : dom(nx) then @a n := nx(n) end
        event wrap where @g n = 3 then @a n := 0 end end";

    fn counter_env() -> Env {
        let mut env = Env::new();
        env.insert("nx", parse_value("{0 |-> 1, 1 |-> 2, 2 |-> 3}").unwrap());
        env
    }

    fn glue(expr: &str) -> GluingMap {
        GluingMap {
            abstract_machine: "a".into(),
            concrete_machine: "c".into(),
            glue: vec![("on".into(), parse_expr(expr).unwrap())],
            events: None,
        }
    }

    fn run(expr: &str, inc: EventTarget) -> SimulationReport {
        let (a, c) = (parse_machine(ABS).unwrap(), parse_machine(CONC).unwrap());
        let env = counter_env();
        let ss = explore(&c, &env, 100).unwrap();
        let mut events = EventMap::default();
        events.0.insert("inc".into(), inc);
        events.0.insert("wrap".into(), EventTarget::New);
        let abs = Side {
            machine: &a,
            env: &env,
        };
        let conc = Side {
            machine: &c,
            env: &env,
        };
        check_forward_simulation(abs, conc, &ss, &glue(expr), &events, &[]).unwrap()
    }

    #[test]
    fn toggling_parity_simulates() {
        // n goes 0,1,2,3 then wraps to 0: wrap changes parity, so it cannot be NEW
        let r = run("n : {1, 3}", EventTarget::Abstract("toggle".into()));
        assert_eq!(r.verdict, Verdict::Fail);
        let c = r.counterexample.unwrap();
        assert_eq!(c.obligation, Obligation::StutterViolation);
        assert_eq!(c.depth(), 4);
    }

    #[test]
    fn wrong_glue_is_caught_at_the_first_step() {
        let r = run("n = 0", EventTarget::Abstract("toggle".into()));
        let c = r.counterexample.unwrap();
        assert_eq!(c.obligation, Obligation::InitMismatch);
        let r = run("n >= 2", EventTarget::Abstract("toggle".into()));
        let c = r.counterexample.unwrap();
        assert_eq!(c.obligation, Obligation::AbstractTargetMismatch);
        assert_eq!(c.depth(), 1);
    }

    #[test]
    fn identity_passes() {
        let c = parse_machine(CONC).unwrap();
        let env = counter_env();
        let ss = explore(&c, &env, 100).unwrap();
        let side = Side {
            machine: &c,
            env: &env,
        };
        let g = GluingMap::identity(&c);
        let r =
            check_forward_simulation(side, side, &ss, &g, &EventMap::identity(&c), &[]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }
}
