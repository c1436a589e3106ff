use crate::ast::{BinOp, Event, Expr, Labelled, Machine, Name};
use crate::error::{Error, EvalError, Result};
use crate::eval::quant::{Flow, Plan};
use crate::eval::{binary, fold_constants, Env, Frame};
use crate::value::Value;

/// One enabled event instance and its target valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Successor {
    /// Index into [`Semantics::events`].
    pub event: usize,
    /// Parameter values in the event's declaration order.
    pub binding: Vec<Value>,
    pub state: Vec<Value>,
}

struct EventSem<'a> {
    event: &'a Event,
    plan: Plan<'a>,
    /// Target variable index of each action.
    targets: Vec<usize>,
}

/// Executable view of a machine over an instantiated context.
///
/// States are valuations in the order of `machine.variables`.
pub struct Semantics<'a> {
    pub machine: &'a Machine,
    pub env: &'a Env,
    events: Vec<EventSem<'a>>,
    invariants: Vec<&'a Labelled>,
    gluing: Vec<&'a Labelled>,
}

fn guard_conjuncts(e: &Event) -> Vec<&Expr> {
    e.guards.iter().flat_map(|g| g.pred.conjuncts()).collect()
}

pub(crate) fn eval_error(e: EvalError, context: impl std::fmt::Display) -> Error {
    Error::check(e.code(), format!("{context}: {e}"))
}

impl<'a> Semantics<'a> {
    pub fn new(machine: &'a Machine, env: &'a Env) -> Result<Self> {
        let mut events = Vec::new();
        for ev in machine.transitions() {
            let conj = guard_conjuncts(ev);
            let plan = Plan::build(&ev.params, &conj, true).map_err(|param| {
                Error::from(EvalError::UnboundedParam {
                    event: ev.name.clone(),
                    param,
                })
            })?;
            events.push(EventSem {
                event: ev,
                plan,
                targets: action_targets(machine, ev)?,
            });
        }
        let known = |n: &Name| machine.has_variable(n) || env.contains(n);
        let (invariants, gluing) = machine
            .invariants
            .iter()
            .partition(|inv| inv.pred.free_vars().iter().all(known));
        Ok(Semantics {
            machine,
            env,
            events,
            invariants,
            gluing,
        })
    }

    pub fn variables(&self) -> &'a [Name] {
        &self.machine.variables
    }

    /// Non-initialisation events, in declaration order.
    pub fn events(&self) -> impl Iterator<Item = &'a Event> + '_ {
        self.events.iter().map(|e| e.event)
    }

    pub fn event(&self, index: usize) -> &'a Event {
        self.events[index].event
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e.event.name == name)
    }

    /// Invariants mentioning names outside the machine and its contexts:
    /// these glue it to an abstraction and cannot be checked on its own.
    pub fn gluing_invariants(&self) -> &[&'a Labelled] {
        &self.gluing
    }

    pub fn checked_invariants(&self) -> &[&'a Labelled] {
        &self.invariants
    }

    /// The unique state produced by INITIALISATION.
    pub fn initial(&self) -> Result<Vec<Value>> {
        let init = self.machine.initialisation().ok_or_else(|| {
            Error::check(
                "E_NO_INITIALISATION",
                format!("machine `{}` has no INITIALISATION", self.machine.name),
            )
        })?;
        let targets = action_targets(self.machine, init)?;
        let mut state: Vec<Option<Value>> = vec![None; self.machine.variables.len()];
        let mut frame = Frame::new(self.env);
        for (a, &t) in init.actions.iter().zip(&targets) {
            let v = frame
                .eval(&a.value)
                .map_err(|e| eval_error(e, format!("INITIALISATION action @{}", a.label)))?;
            state[t] = Some(v);
        }
        state
            .into_iter()
            .zip(&self.machine.variables)
            .map(|(v, n)| {
                v.ok_or_else(|| {
                    Error::check(
                        "E_INIT_INCOMPLETE",
                        format!("INITIALISATION does not assign `{n}`"),
                    )
                })
            })
            .collect()
    }

    /// All enabled event instances at `state`, events in declaration order,
    /// bindings in canonical order.
    pub fn successors(&self, state: &[Value], out: &mut Vec<Successor>) -> Result<()> {
        for (k, ev) in self.events.iter().enumerate() {
            let mut frame = Frame::with_state(self.env, self.variables(), state);
            let mut failure = None;
            let r = ev.plan.run(&mut frame, &mut |f| {
                match self.fire_bound(ev, f, state) {
                    Ok((binding, next)) => out.push(Successor {
                        event: k,
                        binding,
                        state: next,
                    }),
                    Err(e) => {
                        failure = Some(e);
                        return Ok(Flow::Stop);
                    }
                }
                Ok(Flow::Continue)
            });
            if let Some(e) = failure.or(r.err()) {
                return Err(eval_error(e, format!("event `{}`", ev.event.name)));
            }
        }
        Ok(())
    }

    /// Instances of event `index` at `state` whose parameters agree with
    /// `fixed` (parameters not in `fixed` are enumerated).
    pub fn instances(
        &self,
        index: usize,
        state: &[Value],
        fixed: &[(Name, Value)],
    ) -> Result<Vec<Successor>> {
        let ev = &self.events[index];
        let free: Vec<Name> = ev
            .event
            .params
            .iter()
            .filter(|p| !fixed.iter().any(|(n, _)| n == *p))
            .cloned()
            .collect();
        let conj = guard_conjuncts(ev.event);
        let plan = Plan::build(&free, &conj, true).map_err(|param| {
            Error::from(EvalError::UnboundedParam {
                event: ev.event.name.clone(),
                param,
            })
        })?;
        let mut frame = Frame::with_state(self.env, self.variables(), state);
        for (n, v) in fixed {
            if ev.event.params.contains(n) {
                frame.bind(n.clone(), v.clone());
            }
        }
        let mut out = Vec::new();
        let mut failure = None;
        let r = plan.run(&mut frame, &mut |f| {
            match self.fire_bound(ev, f, state) {
                Ok((binding, next)) => out.push(Successor {
                    event: index,
                    binding,
                    state: next,
                }),
                Err(e) => {
                    failure = Some(e);
                    return Ok(Flow::Stop);
                }
            }
            Ok(Flow::Continue)
        });
        if let Some(e) = failure.or(r.err()) {
            return Err(eval_error(e, format!("event `{}`", ev.event.name)));
        }
        Ok(out)
    }

    /// Indices of the state variables read by the guards of event `index`.
    pub fn guard_reads(&self, index: usize) -> Vec<usize> {
        let ev = self.events[index].event;
        self.reads(ev.guards.iter().map(|g| &g.pred), &ev.params)
    }

    /// Indices of the state variables action `action` of event `index`
    /// depends on (a functional override also reads its target).
    pub fn action_reads(&self, index: usize, action: usize) -> Vec<usize> {
        let ev = &self.events[index];
        let a = &ev.event.actions[action];
        let mut out = self.reads(std::iter::once(&a.value).chain(&a.arg), &ev.event.params);
        if a.arg.is_some() && !out.contains(&ev.targets[action]) {
            out.push(ev.targets[action]);
            out.sort_unstable();
        }
        out
    }

    /// Index of the variable assigned by action `action` of event `index`.
    pub fn action_target(&self, index: usize, action: usize) -> usize {
        self.events[index].targets[action]
    }

    /// Indices of the state variables checked invariant `inv` reads.
    pub fn invariant_reads(&self, inv: usize) -> Vec<usize> {
        self.reads(std::iter::once(&self.invariants[inv].pred), &[])
    }

    fn reads<'e>(&self, exprs: impl Iterator<Item = &'e Expr>, bound: &[Name]) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for e in exprs {
            for n in e.free_vars() {
                if bound.contains(&n) {
                    continue;
                }
                if let Some(i) = self.machine.variables.iter().position(|v| *v == n) {
                    out.push(i);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Parameter bindings (declaration order) enabling event `index` at
    /// `state`, in canonical enumeration order.
    pub fn bindings(&self, index: usize, state: &[Value]) -> Result<Vec<Vec<Value>>> {
        let ev = &self.events[index];
        let mut frame = Frame::with_state(self.env, self.variables(), state);
        let mut out = Vec::new();
        ev.plan
            .run(&mut frame, &mut |f| {
                let mut binding = Vec::with_capacity(ev.event.params.len());
                for p in &ev.event.params {
                    binding.push(f.lookup(p)?.clone());
                }
                out.push(binding);
                Ok(Flow::Continue)
            })
            .map_err(|e| eval_error(e, format!("event `{}`", ev.event.name)))?;
        Ok(out)
    }

    /// New value assigned by action `action` of event `index` under
    /// `binding` at `state`.
    pub fn action_value(
        &self,
        index: usize,
        action: usize,
        binding: &[Value],
        state: &[Value],
    ) -> Result<Value> {
        let ev = &self.events[index];
        let a = &ev.event.actions[action];
        let mut frame = Frame::with_state(self.env, self.variables(), state);
        for (p, v) in ev.event.params.iter().zip(binding) {
            frame.bind(p.clone(), v.clone());
        }
        let t = ev.targets[action];
        let r = frame.eval(&a.value).and_then(|v| match &a.arg {
            None => Ok(v),
            Some(arg) => {
                let x = frame.eval(arg)?;
                binary(BinOp::Override, &state[t], &Value::set([Value::pair(x, v)]))
            }
        });
        r.map_err(|e| eval_error(e, format!("action @{} of `{}`", a.label, ev.event.name)))
    }

    /// Whether checked invariant `inv` holds at `state`.
    pub fn invariant_holds(&self, inv: usize, state: &[Value]) -> Result<bool> {
        let inv = self.invariants[inv];
        Frame::with_state(self.env, self.variables(), state)
            .pred(&inv.pred)
            .map_err(|e| eval_error(e, format!("invariant @{}", inv.label)))
    }

    /// Applies the actions of `ev` in a frame whose parameters are bound.
    fn fire_bound(
        &self,
        ev: &EventSem<'_>,
        frame: &mut Frame<'_>,
        state: &[Value],
    ) -> std::result::Result<(Vec<Value>, Vec<Value>), EvalError> {
        let mut binding = Vec::with_capacity(ev.event.params.len());
        for p in &ev.event.params {
            binding.push(frame.lookup(p)?.clone());
        }
        let mut next = state.to_vec();
        for (a, &t) in ev.event.actions.iter().zip(&ev.targets) {
            let v = frame.eval(&a.value)?;
            next[t] = match &a.arg {
                None => v,
                Some(arg) => {
                    let x = frame.eval(arg)?;
                    binary(BinOp::Override, &state[t], &Value::set([Value::pair(x, v)]))?
                }
            };
        }
        Ok((binding, next))
    }

    /// Labels of checked invariants that fail at `state`.
    pub fn violated(&self, state: &[Value]) -> Result<Vec<&'a str>> {
        let mut out = Vec::new();
        let mut frame = Frame::with_state(self.env, self.variables(), state);
        for inv in &self.invariants {
            let ok = frame
                .pred(&inv.pred)
                .map_err(|e| eval_error(e, format!("invariant @{}", inv.label)))?;
            if !ok {
                out.push(inv.label.as_str());
            }
        }
        Ok(out)
    }

    /// Evaluates an expression at `state`.
    pub fn eval_at(&self, e: &Expr, state: &[Value]) -> std::result::Result<Value, EvalError> {
        Frame::with_state(self.env, self.variables(), state).eval(e)
    }

    /// Evaluates a predicate at `state`.
    pub fn holds_at(&self, p: &Expr, state: &[Value]) -> std::result::Result<bool, EvalError> {
        Frame::with_state(self.env, self.variables(), state).pred(p)
    }
}

/// `m` with its constant subexpressions precomputed under `env`; same
/// behaviour, cheaper to execute. See [`fold_constants`].
pub fn fold_machine(m: &Machine, env: &Env) -> Machine {
    let fold_label = |l: &Labelled, shadow: &[Name]| Labelled {
        pred: fold_constants(&l.pred, env, shadow),
        ..l.clone()
    };
    let mut out = m.clone();
    for inv in &mut out.invariants {
        *inv = fold_label(inv, &m.variables);
    }
    for ev in &mut out.events {
        let shadow: Vec<Name> = m.variables.iter().chain(&ev.params).cloned().collect();
        for g in &mut ev.guards {
            *g = fold_label(g, &shadow);
        }
        for a in &mut ev.actions {
            a.value = fold_constants(&a.value, env, &shadow);
            a.arg = a.arg.as_ref().map(|x| fold_constants(x, env, &shadow));
        }
    }
    out
}

fn action_targets(m: &Machine, e: &Event) -> Result<Vec<usize>> {
    e.actions
        .iter()
        .map(|a| {
            m.variables.iter().position(|v| *v == a.var).ok_or_else(|| {
                Error::check(
                    "E_SCOPE",
                    format!(
                        "action @{} of `{}` assigns `{}`, which is not a variable",
                        a.label, e.name, a.var
                    ),
                )
            })
        })
        .collect()
}
