//! Context instantiation: give every deferred set a finite extent, compute
//! constants from their defining equations and check all axioms.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Env, Frame};
use crate::ast::{BinOp, Context, Expr, Labelled, Name};
use crate::error::{Diagnostic, Diagnostics, Pos};
use crate::value::{self, Value};

/// Extent override for a deferred set that has no `partition` axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scope {
    /// `n` synthetic atoms `S1 .. Sn`.
    Size(usize),
    /// Explicitly named atoms; the names become usable identifiers.
    Names(Vec<String>),
}

/// Extent of every carrier set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Universe {
    pub sets: Vec<(Name, Vec<Value>)>,
}

impl Universe {
    pub fn get(&self, set: &str) -> Option<&[Value]> {
        self.sets
            .iter()
            .find(|(n, _)| &**n == set)
            .map(|(_, v)| v.as_slice())
    }
}

/// An instantiated context chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instance {
    pub universe: Universe,
    pub env: Env,
    /// Context names, root first.
    pub contexts: Vec<String>,
}

fn diag_for(code: &'static str, ax: &Labelled, ctx: &str, msg: String) -> Diagnostic {
    Diagnostic::error(code, ax.pos, format!("{msg} (context `{ctx}`)")).with_label(&ax.label)
}

/// Instantiates a resolved `extends` chain (root context first).
pub fn instantiate_context(
    chain: &[&Context],
    scopes: &BTreeMap<String, Scope>,
) -> Result<Instance, Diagnostics> {
    let mut env = Env::new();
    let mut errors = Vec::new();

    let axioms: Vec<(&Labelled, &Context)> = chain
        .iter()
        .flat_map(|c| c.axioms.iter().map(move |a| (a, *c)))
        .collect();
    let constants: Vec<(&Name, &Context)> = chain
        .iter()
        .flat_map(|c| c.constants.iter().map(move |n| (n, *c)))
        .collect();
    let sets: Vec<&Name> = chain.iter().flat_map(|c| c.sets.iter()).collect();

    // Defining equations `c = E`.
    let mut defining: HashMap<&str, &Expr> = HashMap::new();
    for (ax, _) in &axioms {
        if let Expr::Binary(BinOp::Eq, l, r) = &ax.pred {
            if let Expr::Ident(c) = &**l {
                if constants.iter().any(|(n, _)| *n == c) && !r.mentions(c) {
                    defining.entry(&**c).or_insert(&**r);
                }
            }
        }
    }

    // Enumeration idiom: in a context with a partition axiom, a constant
    // without a defining equation denotes an atom of the same name.
    let mut enum_atoms: Vec<(&Name, &Context)> = Vec::new();
    for (c, ctx) in &constants {
        if !defining.contains_key(&***c) && ctx.has_partition() {
            env.insert((*c).clone(), Value::Atom((*c).clone()));
            enum_atoms.push((c, ctx));
        }
    }

    // Partition axioms `partition(S, ...)` for deferred sets.
    let mut partitions: HashMap<&str, &Vec<Expr>> = HashMap::new();
    for (ax, _) in &axioms {
        if let Expr::Partition(items) = &ax.pred {
            if let Expr::Ident(s) = &items[0] {
                if sets.contains(&s) {
                    partitions.entry(&**s).or_insert(items);
                }
            }
        }
    }

    // Scope-provided extents for sets without a partition.
    for s in &sets {
        if partitions.contains_key(&***s) {
            continue;
        }
        let atoms: Vec<Value> = match scopes.get(&***s) {
            Some(Scope::Size(n)) => (1..=*n).map(|i| Value::atom(&format!("{s}{i}"))).collect(),
            Some(Scope::Names(names)) => {
                for n in names {
                    let declared = constants.iter().any(|(c, _)| &***c == n.as_str());
                    if !declared && !env.contains(n) {
                        env.insert(Arc::<str>::from(n.as_str()), Value::atom(n));
                    }
                }
                names.iter().map(|n| Value::atom(n)).collect()
            }
            None => continue,
        };
        env.insert((*s).clone(), Value::set(atoms));
    }

    // Fixpoint over partition-defined sets and defining equations.
    let bound = |env: &Env, e: &Expr| e.free_vars().iter().all(|n| env.contains(n));
    loop {
        let mut progress = false;
        for s in &sets {
            if env.contains(s) {
                continue;
            }
            let Some(items) = partitions.get(&***s) else {
                continue;
            };
            if !items[1..].iter().all(|p| bound(&env, p)) {
                continue;
            }
            let mut acc = Vec::new();
            for p in &items[1..] {
                match Frame::new(&env).eval(p) {
                    Ok(Value::Set(parts)) => acc = value::union(&acc, &parts),
                    Ok(other) => {
                        errors.push(Diagnostic::error(
                            "E_TYPE",
                            Pos::default(),
                            format!("partition part of `{s}` is not a set: {other}"),
                        ));
                    }
                    Err(e) => {
                        errors.push(Diagnostic::error(e.code(), Pos::default(), e.to_string()))
                    }
                }
            }
            env.insert((*s).clone(), Value::set_from_sorted(acc));
            progress = true;
        }
        for (c, _) in &constants {
            if env.contains(c) {
                continue;
            }
            let Some(def) = defining.get(&***c) else {
                continue;
            };
            if !bound(&env, def) {
                continue;
            }
            let value = Frame::new(&env).eval(def);
            match value {
                Ok(v) => env.insert((*c).clone(), v),
                Err(e) => {
                    let (ax, ctx) = axioms
                        .iter()
                        .find(|(a, _)| matches!(&a.pred, Expr::Binary(BinOp::Eq, l, _) if matches!(&**l, Expr::Ident(n) if n == *c)))
                        .expect("defining axiom");
                    errors.push(diag_for(
                        e.code(),
                        ax,
                        &ctx.name,
                        format!("cannot compute `{c}`: {e}"),
                    ));
                    // bind something so dependants report their own problems
                    env.insert((*c).clone(), Value::empty_set());
                }
            }
            progress = true;
        }
        if !progress {
            break;
        }
    }

    for s in &sets {
        if !env.contains(s) {
            errors.push(Diagnostic::error(
                "E_NO_EXTENT",
                Pos::default(),
                format!("deferred set `{s}` has neither a partition axiom nor a scope"),
            ));
        }
    }
    for (c, ctx) in &constants {
        if !env.contains(c) {
            errors.push(Diagnostic::error(
                "E_UNSOLVED_CONSTANT",
                Pos::default(),
                format!(
                    "constant `{c}` of `{}` has no defining equation `{c} = ...`",
                    ctx.name
                ),
            ));
        }
    }
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }

    // An enumerated atom that no partition part of its context mentions is
    // an element of no carrier set: the partition is incomplete.
    for ctx in chain {
        let parts: Vec<&Expr> = ctx
            .axioms
            .iter()
            .filter_map(|a| match &a.pred {
                Expr::Partition(items) => Some(&items[1..]),
                _ => None,
            })
            .flatten()
            .collect();
        let Some(first) = ctx
            .axioms
            .iter()
            .find(|a| matches!(a.pred, Expr::Partition(_)))
        else {
            continue;
        };
        for (atom, owner) in &enum_atoms {
            if owner.name != ctx.name {
                continue;
            }
            let covered = parts.iter().any(|p| {
                matches!(Frame::new(&env).eval(p), Ok(v) if v.contains(&Value::Atom((*atom).clone())))
            });
            if !covered {
                errors.push(diag_for(
                    "E_AXIOM_FAILED",
                    first,
                    &ctx.name,
                    format!("partition does not cover the enumerated constant `{atom}`"),
                ));
            }
        }
    }

    for (ax, ctx) in &axioms {
        let mut frame = Frame::new(&env);
        match frame.pred(&ax.pred) {
            Ok(true) => {}
            Ok(false) => {
                let witness = match frame.counterexample(&ax.pred) {
                    Ok(Some(binding)) => {
                        let parts: Vec<String> = binding
                            .iter()
                            .map(|(n, v)| format!("{n} = {}", super::short(v)))
                            .collect();
                        format!("; counterexample {}", parts.join(", "))
                    }
                    _ => {
                        let parts: Vec<String> = ax
                            .pred
                            .free_vars()
                            .iter()
                            .filter(|n| !sets.contains(n))
                            .filter_map(|n| {
                                env.get(n).map(|v| format!("{n} = {}", super::short(v)))
                            })
                            .collect();
                        if parts.is_empty() {
                            String::new()
                        } else {
                            format!("; with {}", parts.join(", "))
                        }
                    }
                };
                errors.push(diag_for(
                    "E_AXIOM_FAILED",
                    ax,
                    &ctx.name,
                    format!("axiom @{} does not hold{witness}", ax.label),
                ));
            }
            Err(e) => errors.push(diag_for(
                e.code(),
                ax,
                &ctx.name,
                format!("axiom @{} cannot be evaluated: {e}", ax.label),
            )),
        }
    }
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }

    let universe = Universe {
        sets: sets
            .iter()
            .map(|s| {
                let v = env.get(s).and_then(|v| v.as_set()).unwrap_or(&[]).to_vec();
                ((*s).clone(), v)
            })
            .collect(),
    };
    Ok(Instance {
        universe,
        env,
        contexts: chain.iter().map(|c| c.name.clone()).collect(),
    })
}
