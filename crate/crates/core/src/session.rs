//! A loaded project plus memoised instantiations and explorations.
//!
//! Explorations are keyed by machine *content* (not its name), the context
//! instance and the bound, so two machines with identical behaviour share
//! one state space and a `MC ; SPRJ` pipeline never explores twice.

use std::collections::{HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::ast::{Event, EventKind, Machine, Name};
use crate::error::{Diagnostic, Error, Result};
use crate::eval::{instantiate_context, Instance};
use crate::explorer::{explore, StateSpace, DEFAULT_BOUND};
use crate::printer::{print_machine, Notation};
use crate::project::Project;
use crate::scope;

pub struct Session {
    pub project: Project,
    pub bound: usize,
    instances: Mutex<HashMap<Vec<String>, Arc<Instance>>>,
    spaces: Mutex<HashMap<String, Arc<StateSpace>>>,
    explorations: AtomicUsize,
}

impl Session {
    pub fn new(project: Project) -> Self {
        Session::with_bound(project, DEFAULT_BOUND)
    }

    pub fn with_bound(project: Project, bound: usize) -> Self {
        Session {
            project,
            bound,
            instances: Mutex::new(HashMap::new()),
            spaces: Mutex::new(HashMap::new()),
            explorations: AtomicUsize::new(0),
        }
    }

    /// Number of explorations actually run (cache misses) so far.
    pub fn explorations_run(&self) -> usize {
        self.explorations.load(Ordering::SeqCst)
    }

    /// Instantiates a list of contexts (root first), memoised.
    pub fn instance_of(&self, contexts: &[&crate::ast::Context]) -> Result<Arc<Instance>> {
        let key: Vec<String> = contexts.iter().map(|c| c.name.clone()).collect();
        if let Some(i) = self.instances.lock().unwrap().get(&key) {
            return Ok(i.clone());
        }
        let inst = Arc::new(instantiate_context(contexts, &self.project.scopes)?);
        self.instances.lock().unwrap().insert(key, inst.clone());
        Ok(inst)
    }

    /// Instance used to execute machine `name`; see
    /// [`Project::execution_contexts`].
    pub fn instance(&self, machine: &str) -> Result<Arc<Instance>> {
        let chain = self.project.execution_contexts(machine)?;
        self.instance_of(&chain)
    }

    /// Machine `name` with its refinement chain inlined.
    pub fn flat(&self, machine: &str) -> Result<Machine> {
        Ok(self.project.flat_machine(machine)?.machine)
    }

    /// Explores machine `name` (flattened) under its execution instance.
    pub fn explore(&self, machine: &str) -> Result<Arc<StateSpace>> {
        let m = self.flat(machine)?;
        let inst = self.instance(machine)?;
        self.explore_machine(&m, &inst)
    }

    /// Explores an arbitrary machine under `inst`, memoised by content.
    pub fn explore_machine(&self, m: &Machine, inst: &Arc<Instance>) -> Result<Arc<StateSpace>> {
        let key = format!(
            "{}\n{}\n{}",
            inst.contexts.join(","),
            self.bound,
            behaviour_key(m, inst)
        );
        if let Some(ss) = self.spaces.lock().unwrap().get(&key) {
            return Ok(ss.clone());
        }
        let ss = Arc::new(explore(m, &inst.env, self.bound)?);
        self.explorations.fetch_add(1, Ordering::SeqCst);
        self.spaces.lock().unwrap().insert(key, ss.clone());
        Ok(ss)
    }

    /// Whether `a` and `b` have the same explored behaviour under `inst`
    /// (identical variables, checked invariants and events, names aside).
    pub fn same_behaviour(&self, a: &Machine, b: &Machine, inst: &Instance) -> bool {
        behaviour_key(a, inst) == behaviour_key(b, inst)
    }

    /// Parse, scope and axiom checks over the whole project. Returns the
    /// diagnostics found (warnings included); the check passes iff none is
    /// an error.
    pub fn check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let p = &self.project;
        out.extend(p.resolve());
        for src in &p.machines {
            let m = &src.item;
            let flat = match p.flat_machine(&m.name) {
                Ok(f) => f,
                Err(e) => {
                    out.extend(error_diagnostics(e, &src.path));
                    continue;
                }
            };
            out.extend(flat.warnings.into_iter().map(|d| d.in_file(&src.path)));
            let contexts = match p.execution_contexts(&m.name) {
                Ok(c) => c,
                Err(e) => {
                    out.extend(error_diagnostics(e, &src.path));
                    continue;
                }
            };
            let statics = self.static_names(&contexts);
            out.extend(
                scope::check_contexts(&contexts, &statics)
                    .into_iter()
                    .map(|d| d.in_file(&src.path)),
            );
            let abstract_vars = self.abstract_variables(&m.name);
            out.extend(
                scope::check_machine(&flat.machine, &statics, &abstract_vars)
                    .into_iter()
                    .map(|d| d.in_file(&src.path)),
            );
            if let Err(e) = self.instance_of(&contexts) {
                out.extend(error_diagnostics(e, &src.path));
            }
        }
        for l in &p.links {
            let (Some(g), Ok(contexts)) = (&l.glue, p.execution_contexts(l.concrete_machine()))
            else {
                continue;
            };
            let statics = self.static_names(&contexts);
            let concrete = p.machine(&g.concrete_machine);
            for (var, e) in &g.glue {
                for n in e.free_vars() {
                    let ok = statics.contains(&n) || concrete.is_some_and(|m| m.has_variable(&n));
                    if !ok {
                        out.push(Diagnostic::error(
                            "E_SCOPE",
                            Default::default(),
                            format!(
                                "glue of `{var}` in link `{}` uses unknown identifier `{n}`",
                                l.name
                            ),
                        ));
                    }
                }
            }
        }
        dedup(out)
    }

    /// Sets, constants and scope-named atoms visible through `contexts`.
    pub fn static_names(&self, contexts: &[&crate::ast::Context]) -> HashSet<Name> {
        let mut names: HashSet<Name> = HashSet::new();
        for c in contexts {
            names.extend(c.sets.iter().cloned());
            names.extend(c.constants.iter().cloned());
            for s in &c.sets {
                if let Some(crate::eval::Scope::Names(atoms)) = self.project.scopes.get(&**s) {
                    names.extend(atoms.iter().map(|a| Name::from(a.as_str())));
                }
            }
        }
        names
    }

    /// Variables of every machine `name` refines (directly or not).
    fn abstract_variables(&self, name: &str) -> Vec<Name> {
        let Ok(chain) = self.project.machine_chain(name) else {
            return Vec::new();
        };
        chain[..chain.len() - 1]
            .iter()
            .flat_map(|m| m.variables.iter().cloned())
            .collect()
    }
}

/// Text that determines a machine's explored behaviour: everything but its
/// name, refinement bookkeeping and invariants it cannot check by itself.
fn behaviour_key(m: &Machine, inst: &Instance) -> String {
    let known = |n: &Name| m.has_variable(n) || inst.env.contains(n);
    let normalised = Machine {
        name: "m".into(),
        refines: None,
        sees: Vec::new(),
        variables: m.variables.clone(),
        invariants: m
            .invariants
            .iter()
            .filter(|i| i.pred.free_vars().iter().all(known))
            .cloned()
            .collect(),
        events: m
            .events
            .iter()
            .map(|e| Event {
                kind: EventKind::Plain,
                ..e.clone()
            })
            .collect(),
    };
    print_machine(&normalised, Notation::Ascii)
}

fn error_diagnostics(e: Error, path: &std::path::Path) -> Vec<Diagnostic> {
    match e {
        Error::Diagnostics(d) => d.0.into_iter().map(|d| d.in_file(path)).collect(),
        other => vec![
            Diagnostic::error(other.code(), Default::default(), other.to_string()).in_file(path),
        ],
    }
}

fn dedup(v: Vec<Diagnostic>) -> Vec<Diagnostic> {
    let mut out: Vec<Diagnostic> = Vec::new();
    for d in v {
        if !out.contains(&d) {
            out.push(d);
        }
    }
    out
}
