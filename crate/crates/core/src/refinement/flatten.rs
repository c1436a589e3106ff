use std::collections::HashMap;

use crate::ast::{Event, EventKind, Labelled, Machine, Name};
use crate::error::{Diagnostic, Diagnostics, Pos};

/// Result of flattening: the machine plus warnings about dropped invariants.
#[derive(Debug, Clone)]
pub struct Flattened {
    pub machine: Machine,
    pub warnings: Vec<Diagnostic>,
}

/// Inlines a refinement chain (most abstract first) into one machine.
///
/// Variables are those of the most concrete machine; `extends` events get
/// their inherited parameters, guards and actions prepended; invariants of
/// the whole chain are kept when all their variables survive.
pub fn flatten(chain: &[&Machine]) -> Result<Flattened, Diagnostics> {
    let Some(last) = chain.last() else {
        return Err(Diagnostics::single(Diagnostic::error(
            "E_BROKEN_CHAIN",
            Pos::default(),
            "cannot flatten an empty chain",
        )));
    };
    if chain.len() == 1 {
        return Ok(Flattened {
            machine: (*last).clone(),
            warnings: Vec::new(),
        });
    }
    for w in chain.windows(2) {
        if w[1].refines.as_deref() != Some(w[0].name.as_str()) {
            return Err(Diagnostics::single(Diagnostic::error(
                "E_BROKEN_CHAIN",
                Pos::default(),
                format!("`{}` does not refine `{}`", w[1].name, w[0].name),
            )));
        }
    }
    let mut seen = Vec::new();
    for m in chain {
        if seen.contains(&m.name) {
            return Err(Diagnostics::single(Diagnostic::error(
                "E_EXTENDS_CYCLE",
                Pos::default(),
                format!("machine `{}` occurs twice in the refinement chain", m.name),
            )));
        }
        seen.push(m.name.clone());
    }

    let mut resolved: HashMap<String, Event> = HashMap::new();
    for m in chain {
        let mut level = HashMap::new();
        for e in &m.events {
            let ev = match &e.kind {
                EventKind::Extends(p) => {
                    let parent = resolved.get(p).ok_or_else(|| {
                        Diagnostics::single(Diagnostic::error(
                            "E_BROKEN_CHAIN",
                            Pos::default(),
                            format!(
                                "event `{}` of `{}` extends unknown event `{p}`",
                                e.name, m.name
                            ),
                        ))
                    })?;
                    inline(parent, e)
                }
                _ => e.clone(),
            };
            level.insert(e.name.clone(), ev);
        }
        resolved = level;
    }

    let events: Vec<Event> = last
        .events
        .iter()
        .map(|e| resolved[&e.name].clone())
        .collect();

    let all_vars: Vec<&Name> = chain.iter().flat_map(|m| m.variables.iter()).collect();
    let mut invariants: Vec<Labelled> = Vec::new();
    let mut warnings = Vec::new();
    for m in chain {
        for inv in &m.invariants {
            let dropped: Vec<String> = inv
                .pred
                .free_vars()
                .iter()
                .filter(|n| all_vars.contains(n) && !last.has_variable(n))
                .map(|n| n.to_string())
                .collect();
            if !dropped.is_empty() {
                warnings.push(
                    Diagnostic::warning(
                        "W_INVARIANT_DROPPED",
                        inv.pos,
                        format!(
                            "invariant of `{}` omitted: variable(s) {} do not survive",
                            m.name,
                            dropped.join(", ")
                        ),
                    )
                    .with_label(&inv.label),
                );
                continue;
            }
            if !invariants.contains(inv) {
                invariants.push(inv.clone());
            }
        }
    }

    Ok(Flattened {
        machine: Machine {
            name: last.name.clone(),
            refines: chain[0].refines.clone(),
            sees: last.sees.clone(),
            variables: last.variables.clone(),
            invariants,
            events,
        },
        warnings,
    })
}

fn inline(parent: &Event, child: &Event) -> Event {
    let mut params = parent.params.clone();
    for p in &child.params {
        if !params.contains(p) {
            params.push(p.clone());
        }
    }
    Event {
        name: child.name.clone(),
        kind: parent.kind.clone(),
        params,
        guards: parent
            .guards
            .iter()
            .chain(child.guards.iter())
            .cloned()
            .collect(),
        actions: parent
            .actions
            .iter()
            .chain(child.actions.iter())
            .cloned()
            .collect(),
    }
}
