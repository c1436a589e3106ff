//! Traces: replay against a machine, refinement onto a concrete machine and
//! erasure back to the abstract level.
//!
//! A refined trace marks the steps it had to insert (events mapped to NEW)
//! with `skip`; it still replays as-is on the concrete machine.

use std::collections::VecDeque;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::ast::{Expr, Machine, Name};
use crate::error::{Error, Result};
use crate::eval::Env;
use crate::explorer::{eval_error, Semantics, DEFAULT_BOUND};
use crate::parser::{parse_expr, parse_value};
use crate::printer::{print_expr, Notation};
use crate::project::{EventMap, EventTarget};
use crate::value::Value;
use crate::verdict::Verdict;

/// Default number of consecutive inserted steps allowed per abstract step.
pub const DEFAULT_SKIP_BUDGET: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub event: String,
    /// Parameter values, in the order they were given.
    pub params: Vec<(Name, Value)>,
    pub skip: bool,
}

impl Step {
    pub fn new(event: &str, params: &[(&str, Value)]) -> Step {
        Step {
            event: event.to_string(),
            params: params
                .iter()
                .map(|(n, v)| (Name::from(*n), v.clone()))
                .collect(),
            skip: false,
        }
    }

    pub fn param(&self, name: &str) -> Option<&Value> {
        self.params
            .iter()
            .find(|(n, _)| &**n == name)
            .map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub machine: String,
    pub steps: Vec<Step>,
    /// Checked on the final state.
    pub postcondition: Option<Expr>,
}

#[derive(Serialize, Deserialize)]
struct JsonTrace {
    machine: String,
    steps: Vec<JsonStep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    postcondition: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonStep {
    event: String,
    #[serde(default)]
    params: IndexMap<String, String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    skip: bool,
}

impl Trace {
    pub fn new(machine: &str, steps: Vec<Step>) -> Trace {
        Trace {
            machine: machine.to_string(),
            steps,
            postcondition: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Trace> {
        let raw: JsonTrace = serde_json::from_str(text).map_err(|source| Error::Json {
            path: "<trace>".into(),
            source,
        })?;
        let mut steps = Vec::new();
        for s in raw.steps {
            let mut params = Vec::new();
            for (p, v) in s.params {
                params.push((Name::from(p.as_str()), parse_value(&v)?));
            }
            steps.push(Step {
                event: s.event,
                params,
                skip: s.skip,
            });
        }
        let postcondition = raw.postcondition.as_deref().map(parse_expr).transpose()?;
        Ok(Trace {
            machine: raw.machine,
            steps,
            postcondition,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Trace> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Trace::from_json(&text).map_err(|e| match e {
            Error::Json { source, .. } => Error::Json {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    /// Pretty-printed JSON; values are rendered canonically.
    pub fn to_json(&self) -> String {
        let raw = JsonTrace {
            machine: self.machine.clone(),
            steps: self
                .steps
                .iter()
                .map(|s| JsonStep {
                    event: s.event.clone(),
                    params: s
                        .params
                        .iter()
                        .map(|(n, v)| (n.to_string(), v.render()))
                        .collect(),
                    skip: s.skip,
                })
                .collect(),
            postcondition: self
                .postcondition
                .as_ref()
                .map(|p| print_expr(p, Notation::Ascii)),
        };
        let mut out = serde_json::to_string_pretty(&raw).expect("trace serialises");
        out.push('\n');
        out
    }

    pub fn skip_count(&self) -> usize {
        self.steps.iter().filter(|s| s.skip).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureReason {
    /// The event is unknown or names a parameter it does not declare.
    BadStep,
    /// No parameter completion satisfies the guards.
    Disabled,
    /// Unspecified parameters leave more than one possible target state.
    Ambiguous,
    InvariantViolated(String),
    PostconditionFailed,
}

impl FailureReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureReason::BadStep => "bad-step",
            FailureReason::Disabled => "disabled",
            FailureReason::Ambiguous => "ambiguous",
            FailureReason::InvariantViolated(_) => "invariant-violated",
            FailureReason::PostconditionFailed => "postcondition-failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayFailure {
    /// Index of the failing step; for invariant violations the step that
    /// reached the bad state, `None` for the initial state; for
    /// postconditions, the number of steps.
    pub step: Option<usize>,
    pub reason: FailureReason,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct ReplayResult {
    pub verdict: Verdict,
    pub failure: Option<ReplayFailure>,
    /// Initial state followed by the state after each executed step.
    pub states: Vec<Vec<Value>>,
}

impl ReplayResult {
    pub fn passed(&self) -> bool {
        self.verdict.is_pass()
    }

    /// One-line summary for reports.
    pub fn describe(&self) -> String {
        match &self.failure {
            None => format!("{} steps replayed", self.states.len() - 1),
            Some(f) => match f.step {
                Some(i) => format!("step {i}: {} ({})", f.reason.as_str(), f.detail),
                None => format!("initial state: {} ({})", f.reason.as_str(), f.detail),
            },
        }
    }
}

/// Replays `t` on `m` (already flattened). A failing replay is reported in
/// the result; only evaluation errors are returned as `Err`.
pub fn replay(t: &Trace, m: &Machine, env: &Env) -> Result<ReplayResult> {
    let sem = Semantics::new(m, env)?;
    let mut state = sem.initial()?;
    let mut states = vec![state.clone()];
    let fail = |step, reason, detail: String, states| ReplayResult {
        verdict: Verdict::Fail,
        failure: Some(ReplayFailure {
            step,
            reason,
            detail,
        }),
        states,
    };
    if let Some(label) = sem.violated(&state)?.first() {
        return Ok(fail(
            None,
            FailureReason::InvariantViolated(label.to_string()),
            format!("@{label}"),
            states,
        ));
    }
    for (i, step) in t.steps.iter().enumerate() {
        let Some(k) = sem.event_index(&step.event) else {
            return Ok(fail(
                Some(i),
                FailureReason::BadStep,
                format!("no event `{}` in `{}`", step.event, m.name),
                states,
            ));
        };
        let ev = sem.event(k);
        if let Some((p, _)) = step.params.iter().find(|(p, _)| !ev.params.contains(p)) {
            return Ok(fail(
                Some(i),
                FailureReason::BadStep,
                format!("`{}` has no parameter `{p}`", ev.name),
                states,
            ));
        }
        let mut succ = sem.instances(k, &state, &step.params)?;
        succ.sort_by(|a, b| a.state.cmp(&b.state));
        succ.dedup_by(|a, b| a.state == b.state);
        match succ.len() {
            0 => {
                return Ok(fail(
                    Some(i),
                    FailureReason::Disabled,
                    format!("`{}` is not enabled", step.event),
                    states,
                ))
            }
            1 => state = succ.pop().unwrap().state,
            n => {
                return Ok(fail(
                    Some(i),
                    FailureReason::Ambiguous,
                    format!("{n} possible target states"),
                    states,
                ))
            }
        }
        states.push(state.clone());
        if let Some(label) = sem.violated(&state)?.first() {
            return Ok(fail(
                Some(i),
                FailureReason::InvariantViolated(label.to_string()),
                format!("@{label}"),
                states,
            ));
        }
    }
    if let Some(post) = &t.postcondition {
        let ok = sem
            .holds_at(post, &state)
            .map_err(|e| eval_error(e, "postcondition"))?;
        if !ok {
            let detail = print_expr(post, Notation::Ascii);
            return Ok(fail(
                Some(t.steps.len()),
                FailureReason::PostconditionFailed,
                detail,
                states,
            ));
        }
    }
    Ok(ReplayResult {
        verdict: Verdict::Pass,
        failure: None,
        states,
    })
}

/// Search node of [`refine_trace`].
#[derive(Clone, Copy)]
struct Node {
    state: u32,
    cursor: u32,
    skips: u32,
    /// Index of the predecessor node and of the step taken, if any.
    back: Option<(u32, u32)>,
}

/// Finds a shortest trace of `c` (flattened) whose erasure through
/// `events` is `abs`. Inserted steps (events mapped to NEW) are flagged
/// `skip`; at most `skip_budget` of them may follow each other.
pub fn refine_trace(
    abs: &Trace,
    c: &Machine,
    env: &Env,
    events: &EventMap,
    skip_budget: usize,
) -> Result<Trace> {
    let sem = Semantics::new(c, env)?;
    let n_events = sem.events().count();
    let targets: Vec<Option<&EventTarget>> = (0..n_events)
        .map(|k| events.get(&sem.event(k).name))
        .collect();

    let mut state_ids: FxHashMap<Vec<Value>, u32> = FxHashMap::default();
    let mut state_vals: Vec<Vec<Value>> = Vec::new();
    let mut intern = |s: Vec<Value>, vals: &mut Vec<Vec<Value>>| -> u32 {
        let next = vals.len() as u32;
        *state_ids.entry(s.clone()).or_insert_with(|| {
            vals.push(s);
            next
        })
    };

    let init = intern(sem.initial()?, &mut state_vals);
    let mut nodes = vec![Node {
        state: init,
        cursor: 0,
        skips: 0,
        back: None,
    }];
    let mut steps: Vec<Step> = Vec::new();
    let mut seen: FxHashMap<(u32, u32, u32), ()> = FxHashMap::default();
    seen.insert((init, 0, 0), ());
    let mut queue = VecDeque::from([0u32]);
    let mut deepest = 0usize;
    let goal = abs.steps.len() as u32;

    while let Some(ni) = queue.pop_front() {
        let node = nodes[ni as usize];
        deepest = deepest.max(node.cursor as usize);
        if node.cursor == goal {
            let mut out = Vec::new();
            let mut cur = node;
            while let Some((prev, step)) = cur.back {
                out.push(steps[step as usize].clone());
                cur = nodes[prev as usize];
            }
            out.reverse();
            return Ok(Trace {
                machine: c.name.clone(),
                steps: out,
                postcondition: None,
            });
        }
        if nodes.len() > DEFAULT_BOUND {
            break;
        }
        let wanted = &abs.steps[node.cursor as usize];
        let state = state_vals[node.state as usize].clone();
        for (k, target) in targets.iter().enumerate() {
            let ev = sem.event(k);
            let (fixed, skip): (Vec<(Name, Value)>, bool) = match target {
                Some(EventTarget::New) if (node.skips as usize) < skip_budget => (Vec::new(), true),
                Some(EventTarget::Abstract(a)) if *a == wanted.event => (
                    wanted
                        .params
                        .iter()
                        .filter(|(p, _)| ev.params.contains(p))
                        .cloned()
                        .collect(),
                    false,
                ),
                _ => continue,
            };
            for succ in sem.instances(k, &state, &fixed)? {
                let to = intern(succ.state, &mut state_vals);
                let (cursor, skips) = if skip {
                    (node.cursor, node.skips + 1)
                } else {
                    (node.cursor + 1, 0)
                };
                if seen.insert((to, cursor, skips), ()).is_some() {
                    continue;
                }
                steps.push(Step {
                    event: ev.name.clone(),
                    params: ev.params.iter().cloned().zip(succ.binding).collect(),
                    skip,
                });
                nodes.push(Node {
                    state: to,
                    cursor,
                    skips,
                    back: Some((ni, steps.len() as u32 - 1)),
                });
                queue.push_back(nodes.len() as u32 - 1);
            }
        }
    }
    Err(Error::check(
        "E_NO_REFINED_TRACE",
        format!(
            "no refinement of the {}-step trace on `{}` within a skip budget of {skip_budget}; \
             deepest abstract step reached: {deepest}",
            abs.steps.len(),
            c.name
        ),
    ))
}

/// Drops inserted steps and maps the rest to abstract event names, keeping
/// the parameters the abstract event declares.
pub fn erase(t: &Trace, events: &EventMap, abstract_m: &Machine) -> Result<Trace> {
    let mut steps = Vec::new();
    for (i, s) in t.steps.iter().enumerate() {
        if s.skip {
            continue;
        }
        let target = match events.get(&s.event) {
            Some(EventTarget::Abstract(a)) => a,
            Some(EventTarget::New) => {
                return Err(Error::check(
                    "E_MAP_MISMATCH",
                    format!(
                        "step {i} (`{}`) is not marked skip but its event maps to NEW",
                        s.event
                    ),
                ))
            }
            None => {
                return Err(Error::check(
                    "E_MAP_MISMATCH",
                    format!("step {i}: event `{}` is not in the event map", s.event),
                ))
            }
        };
        let declared = abstract_m
            .event(target)
            .map(|e| e.params.clone())
            .unwrap_or_default();
        steps.push(Step {
            event: target.clone(),
            params: s
                .params
                .iter()
                .filter(|(p, _)| declared.contains(p))
                .cloned()
                .collect(),
            skip: false,
        });
    }
    Ok(Trace {
        machine: abstract_m.name.clone(),
        steps,
        postcondition: None,
    })
}
