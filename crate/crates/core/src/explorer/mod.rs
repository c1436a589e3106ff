//! Breadth-first exploration of a machine's reachable state space.
//!
//! States are stored compactly: every variable has its own table of distinct
//! values, and a state is the tuple of value ids. Because value ids are
//! assigned per variable, two states are equal iff their id tuples are equal,
//! which is exactly equality of canonical valuations.
//!
//! States get ids in discovery order and are expanded in id order, which is
//! breadth-first. Transitions of a state are listed by event declaration
//! order, then by the canonical order of their parameter bindings.

mod json;
mod semantics;

use std::hash::BuildHasherDefault;
use std::rc::Rc;

use indexmap::IndexSet;
use rustc_hash::{FxHashMap, FxHasher};

pub use json::{export_json, import_json};
pub(crate) use semantics::eval_error;
pub use semantics::{fold_machine, Semantics, Successor};

use crate::ast::{Machine, Name};
use crate::error::Result;
use crate::eval::Env;
use crate::value::Value;

type FxIndexSet<T> = IndexSet<T, BuildHasherDefault<FxHasher>>;

/// Default state bound for exploration.
pub const DEFAULT_BOUND: usize = 1_000_000;

/// Labelled edge; the source is implied by its position in the edge table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub to: u32,
    pub event: u16,
    pub binding: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub state: u32,
    pub label: String,
}

/// An explored (possibly truncated) state space. Immutable once built.
#[derive(Debug, Clone)]
pub struct StateSpace {
    machine: String,
    variables: Vec<Name>,
    events: Vec<String>,
    params: Vec<Vec<Name>>,
    values: Vec<FxIndexSet<Value>>,
    states: Vec<u32>,
    index: FxHashMap<Box<[u32]>, u32>,
    out_start: Vec<u32>,
    edges: Vec<Edge>,
    bindings: FxIndexSet<Box<[Value]>>,
    parent: Vec<u32>,
    complete: bool,
    violations: Vec<Violation>,
    deadlocks: Vec<u32>,
}

const NO_PARENT: u32 = u32::MAX;

impl StateSpace {
    fn empty(
        machine: &str,
        variables: Vec<Name>,
        events: Vec<String>,
        params: Vec<Vec<Name>>,
    ) -> Self {
        StateSpace {
            machine: machine.to_string(),
            values: vec![FxIndexSet::default(); variables.len()],
            variables,
            events,
            params,
            states: Vec::new(),
            index: FxHashMap::default(),
            out_start: vec![0],
            edges: Vec::new(),
            bindings: FxIndexSet::default(),
            parent: Vec::new(),
            complete: true,
            violations: Vec::new(),
            deadlocks: Vec::new(),
        }
    }

    pub fn machine(&self) -> &str {
        &self.machine
    }

    pub fn variables(&self) -> &[Name] {
        &self.variables
    }

    /// Event names; `Edge::event` indexes this list.
    pub fn events(&self) -> &[String] {
        &self.events
    }

    pub fn event_params(&self, event: usize) -> &[Name] {
        &self.params[event]
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.edges.len()
    }

    /// The initial state is always id 0.
    pub fn initial(&self) -> u32 {
        0
    }

    /// True iff the frontier was exhausted without hitting the bound.
    pub fn complete(&self) -> bool {
        self.complete
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    pub fn deadlocks(&self) -> &[u32] {
        &self.deadlocks
    }

    pub fn value(&self, state: u32, var: usize) -> &Value {
        let n = self.variables.len();
        let id = self.states[state as usize * n + var];
        &self.values[var][id as usize]
    }

    /// Valuation of `state` in the order of [`Self::variables`].
    pub fn valuation(&self, state: u32) -> Vec<Value> {
        (0..self.variables.len())
            .map(|v| self.value(state, v).clone())
            .collect()
    }

    /// Per-variable value ids of `state`. Within one state space, equal ids
    /// of a variable mean equal values.
    pub fn value_ids(&self, state: u32) -> &[u32] {
        let n = self.variables.len();
        &self.states[state as usize * n..(state as usize + 1) * n]
    }

    /// Number of distinct values of variable `var` over all states.
    pub fn distinct_values(&self, var: usize) -> usize {
        self.values[var].len()
    }

    /// Id of the state with this valuation, if explored.
    pub fn find(&self, valuation: &[Value]) -> Option<u32> {
        let key: Option<Vec<u32>> = valuation
            .iter()
            .zip(&self.values)
            .map(|(v, table)| table.get_index_of(v).map(|i| i as u32))
            .collect();
        self.index.get(key?.as_slice()).copied()
    }

    pub fn outgoing(&self, state: u32) -> &[Edge] {
        let lo = self.out_start[state as usize] as usize;
        let hi = self.out_start[state as usize + 1] as usize;
        &self.edges[lo..hi]
    }

    /// All transitions as `(from, edge)` in canonical order.
    pub fn transitions(&self) -> impl Iterator<Item = (u32, &Edge)> + '_ {
        (0..self.len() as u32).flat_map(move |s| self.outgoing(s).iter().map(move |e| (s, e)))
    }

    pub fn binding(&self, id: u32) -> &[Value] {
        &self.bindings[id as usize]
    }

    /// `(parameter, value)` pairs of an edge.
    pub fn edge_params(&self, edge: &Edge) -> Vec<(Name, Value)> {
        self.params[edge.event as usize]
            .iter()
            .cloned()
            .zip(self.binding(edge.binding).iter().cloned())
            .collect()
    }

    /// BFS depth of `state` (0 for the initial state).
    pub fn depth(&self, state: u32) -> usize {
        self.path_to(state).len()
    }

    /// Shortest path from the initial state, as `(from, edge)` steps.
    pub fn path_to(&self, state: u32) -> Vec<(u32, Edge)> {
        let mut out = Vec::new();
        let mut cur = state;
        while self.parent[cur as usize] != NO_PARENT {
            let e = self.parent[cur as usize] as usize;
            let from = self.out_start.partition_point(|&s| s as usize <= e) as u32 - 1;
            out.push((from, self.edges[e]));
            cur = from;
        }
        out.reverse();
        out
    }

    fn intern(&mut self, valuation: Vec<Value>) -> Box<[u32]> {
        valuation
            .into_iter()
            .zip(self.values.iter_mut())
            .map(|(v, table)| table.insert_full(v).0 as u32)
            .collect()
    }

    /// Adds a state if new and below `bound`. Returns its id.
    fn add_state(&mut self, key: Box<[u32]>, parent: u32, bound: usize) -> Option<u32> {
        if let Some(&id) = self.index.get(&key) {
            return Some(id);
        }
        if self.len() >= bound {
            self.complete = false;
            return None;
        }
        let id = self.len() as u32;
        self.states.extend_from_slice(&key);
        self.index.insert(key, id);
        self.parent.push(parent);
        Some(id)
    }
}

/// Unique initial state of `m`.
pub fn initial_state(m: &Machine, env: &Env) -> Result<Vec<Value>> {
    Semantics::new(m, env)?.initial()
}

/// Enabled transitions of `m` at `state`.
pub fn enabled(m: &Machine, env: &Env, state: &[Value]) -> Result<Vec<Successor>> {
    let mut out = Vec::new();
    Semantics::new(m, env)?.successors(state, &mut out)?;
    Ok(out)
}

/// Memo tables of one exploration, all in id space. An event's enabled
/// bindings depend only on the variables its guards read, an action's
/// result only on the binding and the variables it reads, and an
/// invariant's truth only on the variables it reads; since those
/// projections repeat across many states, each is computed once.
struct Memo {
    guard_reads: Vec<Vec<usize>>,
    action_reads: Vec<Vec<Vec<usize>>>,
    action_targets: Vec<Vec<usize>>,
    invariant_reads: Vec<Vec<usize>>,
    enabled: FxHashMap<(usize, Vec<u32>), Rc<[u32]>>,
    actions: FxHashMap<(usize, usize, u32, Vec<u32>), u32>,
    invariants: FxHashMap<(usize, Vec<u32>), bool>,
}

fn project(ids: &[u32], vars: &[usize]) -> Vec<u32> {
    vars.iter().map(|&v| ids[v]).collect()
}

impl Memo {
    fn new(sem: &Semantics<'_>) -> Self {
        let n_events = sem.events().count();
        Memo {
            guard_reads: (0..n_events).map(|k| sem.guard_reads(k)).collect(),
            action_reads: (0..n_events)
                .map(|k| {
                    (0..sem.event(k).actions.len())
                        .map(|a| sem.action_reads(k, a))
                        .collect()
                })
                .collect(),
            action_targets: (0..n_events)
                .map(|k| {
                    (0..sem.event(k).actions.len())
                        .map(|a| sem.action_target(k, a))
                        .collect()
                })
                .collect(),
            invariant_reads: (0..sem.checked_invariants().len())
                .map(|i| sem.invariant_reads(i))
                .collect(),
            enabled: FxHashMap::default(),
            actions: FxHashMap::default(),
            invariants: FxHashMap::default(),
        }
    }
}

/// Explores `m` breadth-first from its initial state, keeping at most
/// `bound` states. Gluing invariants (mentioning names outside `m` and its
/// contexts) are not checked here.
pub fn explore(m: &Machine, env: &Env, bound: usize) -> Result<StateSpace> {
    let folded = fold_machine(m, env);
    let sem = Semantics::new(&folded, env)?;
    let events: Vec<String> = sem.events().map(|e| e.name.clone()).collect();
    let params = sem.events().map(|e| e.params.clone()).collect();
    let mut ss = StateSpace::empty(&m.name, m.variables.clone(), events, params);
    let init = sem.initial()?;
    let key = ss.intern(init);
    ss.add_state(key, NO_PARENT, bound.max(1));

    let mut memo = Memo::new(&sem);
    let n = ss.variables.len();
    let mut s = 0usize;
    // ids are handed out in discovery order, so id order is BFS order
    while s < ss.len() {
        let ids: Vec<u32> = ss.states[s * n..(s + 1) * n].to_vec();
        let vals = ss.valuation(s as u32);

        for (i, reads) in memo.invariant_reads.iter().enumerate() {
            let key = (i, project(&ids, reads));
            let holds = match memo.invariants.get(&key) {
                Some(&h) => h,
                None => {
                    let h = sem.invariant_holds(i, &vals)?;
                    memo.invariants.insert(key, h);
                    h
                }
            };
            if !holds {
                ss.violations.push(Violation {
                    state: s as u32,
                    label: sem.checked_invariants()[i].label.clone(),
                });
            }
        }

        let edges_before = ss.edges.len();
        let mut dropped = false;
        for k in 0..memo.guard_reads.len() {
            let key = (k, project(&ids, &memo.guard_reads[k]));
            let bindings = match memo.enabled.get(&key) {
                Some(b) => b.clone(),
                None => {
                    let found: Rc<[u32]> = sem
                        .bindings(k, &vals)?
                        .into_iter()
                        .map(|b| ss.bindings.insert_full(b.into_boxed_slice()).0 as u32)
                        .collect();
                    memo.enabled.insert(key, found.clone());
                    found
                }
            };
            for &b in bindings.iter() {
                let mut next = ids.clone();
                for a in 0..memo.action_reads[k].len() {
                    let key = (k, a, b, project(&ids, &memo.action_reads[k][a]));
                    let t = memo.action_targets[k][a];
                    next[t] = match memo.actions.get(&key) {
                        Some(&id) => id,
                        None => {
                            let v = sem.action_value(k, a, &ss.bindings[b as usize], &vals)?;
                            let id = ss.values[t].insert_full(v).0 as u32;
                            memo.actions.insert(key, id);
                            id
                        }
                    };
                }
                let edge_index = ss.edges.len() as u32;
                match ss.add_state(next.into_boxed_slice(), edge_index, bound) {
                    Some(to) => ss.edges.push(Edge {
                        to,
                        event: k as u16,
                        binding: b,
                    }),
                    None => dropped = true,
                }
            }
        }
        if ss.edges.len() == edges_before && !dropped {
            ss.deadlocks.push(s as u32);
        }
        ss.out_start.push(ss.edges.len() as u32);
        s += 1;
    }
    Ok(ss)
}
