//! JSON form of a state space:
//! `{"states": [{"id", "values"}], "transitions": [{"from", "event", "params", "to"}],
//!   "initial", "complete", ...}`.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Edge, StateSpace, Violation, NO_PARENT};
use crate::ast::Name;
use crate::error::{Error, Result};
use crate::parser::parse_value;
use crate::value::Value;

#[derive(Serialize, Deserialize)]
struct JsonSpace {
    machine: String,
    #[serde(default)]
    variables: Vec<String>,
    #[serde(default)]
    events: Vec<JsonEvent>,
    states: Vec<JsonState>,
    transitions: Vec<JsonTransition>,
    initial: u32,
    complete: bool,
    #[serde(default)]
    violations: Vec<JsonViolation>,
    #[serde(default)]
    deadlocks: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct JsonEvent {
    name: String,
    params: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonState {
    id: u32,
    values: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct JsonTransition {
    from: u32,
    event: String,
    #[serde(default)]
    params: BTreeMap<String, String>,
    to: u32,
}

#[derive(Serialize, Deserialize)]
struct JsonViolation {
    state: u32,
    label: String,
}

/// Serialises a state space (deterministic, pretty-printed).
pub fn export_json(ss: &StateSpace) -> String {
    let doc = JsonSpace {
        machine: ss.machine.clone(),
        variables: ss.variables.iter().map(|v| v.to_string()).collect(),
        events: ss
            .events
            .iter()
            .zip(&ss.params)
            .map(|(n, p)| JsonEvent {
                name: n.clone(),
                params: p.iter().map(|x| x.to_string()).collect(),
            })
            .collect(),
        states: (0..ss.len() as u32)
            .map(|s| JsonState {
                id: s,
                values: ss
                    .variables
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v.to_string(), ss.value(s, i).render()))
                    .collect(),
            })
            .collect(),
        transitions: ss
            .transitions()
            .map(|(from, e)| JsonTransition {
                from,
                event: ss.events[e.event as usize].clone(),
                params: ss
                    .edge_params(e)
                    .into_iter()
                    .map(|(n, v)| (n.to_string(), v.render()))
                    .collect(),
                to: e.to,
            })
            .collect(),
        initial: 0,
        complete: ss.complete,
        violations: ss
            .violations
            .iter()
            .map(|v| JsonViolation {
                state: v.state,
                label: v.label.clone(),
            })
            .collect(),
        deadlocks: ss.deadlocks.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("state space serialises")
}

fn bad(msg: impl Into<String>) -> Error {
    Error::check("E_BAD_STATE_SPACE", msg)
}

fn value(text: &str) -> Result<Value> {
    parse_value(text).map_err(|d| bad(format!("bad value `{text}`: {d}")))
}

/// Reads a state space written by [`export_json`].
pub fn import_json(text: &str) -> Result<StateSpace> {
    let doc: JsonSpace = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let variables: Vec<Name> = if doc.variables.is_empty() {
        doc.states
            .first()
            .map(|s| s.values.keys().map(|k| Name::from(k.as_str())).collect())
            .unwrap_or_default()
    } else {
        doc.variables
            .iter()
            .map(|v| Name::from(v.as_str()))
            .collect()
    };
    let mut events: Vec<String> = doc.events.iter().map(|e| e.name.clone()).collect();
    let mut params: Vec<Vec<Name>> = doc
        .events
        .iter()
        .map(|e| e.params.iter().map(|p| Name::from(p.as_str())).collect())
        .collect();
    for t in &doc.transitions {
        if !events.contains(&t.event) {
            events.push(t.event.clone());
            params.push(t.params.keys().map(|k| Name::from(k.as_str())).collect());
        }
    }

    let mut ss = StateSpace::empty(&doc.machine, variables.clone(), events, params);
    let mut states = doc.states;
    states.sort_by_key(|s| s.id);
    // initial state first: renumber so that it gets id 0
    let order: Vec<u32> = std::iter::once(doc.initial)
        .chain(states.iter().map(|s| s.id).filter(|&id| id != doc.initial))
        .collect();
    let mut renumber = BTreeMap::new();
    for (new, old) in order.iter().enumerate() {
        renumber.insert(*old, new as u32);
    }
    let by_id: BTreeMap<u32, &JsonState> = states.iter().map(|s| (s.id, s)).collect();
    for old in &order {
        let st = by_id
            .get(old)
            .ok_or_else(|| bad(format!("initial state {old} is not listed")))?;
        let mut vals = Vec::with_capacity(variables.len());
        for v in &variables {
            let text = st
                .values
                .get(&**v)
                .ok_or_else(|| bad(format!("state {} lacks variable `{v}`", st.id)))?;
            vals.push(value(text)?);
        }
        let key = ss.intern(vals);
        if ss.index.contains_key(&key) {
            return Err(bad(format!("state {} is listed twice", st.id)));
        }
        let id = ss.len() as u32;
        ss.states.extend_from_slice(&key);
        ss.index.insert(key, id);
        ss.parent.push(NO_PARENT);
    }

    let mut grouped: Vec<Vec<Edge>> = vec![Vec::new(); ss.len()];
    for t in &doc.transitions {
        let (Some(&from), Some(&to)) = (renumber.get(&t.from), renumber.get(&t.to)) else {
            return Err(bad(format!(
                "transition {} -> {} names an unknown state",
                t.from, t.to
            )));
        };
        let event = ss
            .events
            .iter()
            .position(|e| *e == t.event)
            .expect("collected above");
        let mut binding = Vec::new();
        for p in &ss.params[event] {
            let text = t
                .params
                .get(&**p)
                .ok_or_else(|| bad(format!("transition lacks parameter `{p}`")))?;
            binding.push(value(text)?);
        }
        let binding = ss.bindings.insert_full(binding.into_boxed_slice()).0 as u32;
        grouped[from as usize].push(Edge {
            to,
            event: event as u16,
            binding,
        });
    }
    for out in grouped {
        ss.edges.extend(out);
        ss.out_start.push(ss.edges.len() as u32);
    }

    // shortest-path parents
    let mut seen = vec![false; ss.len()];
    let mut queue = VecDeque::from([0u32]);
    if !seen.is_empty() {
        seen[0] = true;
    }
    while let Some(s) = queue.pop_front() {
        let lo = ss.out_start[s as usize] as usize;
        for (k, e) in ss.outgoing(s).to_vec().into_iter().enumerate() {
            if !seen[e.to as usize] {
                seen[e.to as usize] = true;
                ss.parent[e.to as usize] = (lo + k) as u32;
                queue.push_back(e.to);
            }
        }
    }

    ss.complete = doc.complete;
    for v in doc.violations {
        if let Some(&state) = renumber.get(&v.state) {
            ss.violations.push(Violation {
                state,
                label: v.label,
            });
        }
    }
    ss.deadlocks = doc
        .deadlocks
        .iter()
        .filter_map(|d| renumber.get(d).copied())
        .collect();
    Ok(ss)
}
