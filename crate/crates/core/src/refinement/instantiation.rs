//! Instantiation links: a machine that only replaces deferred sets and
//! constants by concrete values. Its context chain must instantiate (every
//! inherited axiom holds on the concrete values) and every event must be a
//! pure `extends` of its abstract counterpart.

use crate::ast::Machine;
use crate::error::{Diagnostic, Error, Pos, Result};
use crate::eval::instantiate_context;
use crate::project::LinkKind;
use crate::session::Session;
use crate::verdict::Verdict;

#[derive(Debug, Clone)]
pub struct InstantiationReport {
    pub link: String,
    pub verdict: Verdict,
    /// Every problem found; empty iff the verdict is PASS.
    pub failures: Vec<Diagnostic>,
}

fn problem(code: &'static str, msg: String) -> Diagnostic {
    Diagnostic::error(code, Pos::default(), msg)
}

/// Checks instantiation link `link_name`.
pub fn check_instantiation(session: &Session, link_name: &str) -> Result<InstantiationReport> {
    let p = &session.project;
    let link = p.require_link(link_name)?;
    if link.kind != LinkKind::Instantiates {
        return Err(Error::check(
            "E_LINK_KIND",
            format!(
                "link `{}` is a {} link, not an instantiation",
                link.name,
                link.kind.as_str()
            ),
        ));
    }
    let concrete = p.require_machine(link.concrete_machine())?;
    let abstract_m = p.require_machine(link.abstract_machine())?;
    let mut failures = Vec::new();

    // (1) the concrete contexts instantiate
    let chain = p.contexts_seen(&concrete.sees)?;
    if let Err(d) = instantiate_context(&chain, &p.scopes) {
        failures.extend(d.0);
    }
    let abstract_contexts = p.contexts_seen(&abstract_m.sees)?;
    for c in abstract_contexts {
        if !chain.iter().any(|x| x.name == c.name) {
            failures.push(problem(
                "E_NOT_EXTENDING",
                format!(
                    "`{}` does not see (an extension of) context `{}`",
                    concrete.name, c.name
                ),
            ));
        }
    }

    // (2) nothing but pure extensions
    if concrete.refines.as_deref() != Some(abstract_m.name.as_str()) {
        failures.push(problem(
            "E_BROKEN_CHAIN",
            format!("`{}` does not refine `{}`", concrete.name, abstract_m.name),
        ));
    }
    failures.extend(purity(concrete, abstract_m));

    Ok(InstantiationReport {
        link: link.name.clone(),
        verdict: if failures.is_empty() {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        failures,
    })
}

/// Violations of "variables unchanged, every event extends its namesake
/// without adding parameters, guards or actions".
fn purity(concrete: &Machine, abstract_m: &Machine) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if concrete.variables != abstract_m.variables {
        out.push(problem(
            "E_EVENT_NOT_PURE_EXTENSION",
            format!(
                "`{}` changes the variables of `{}`",
                concrete.name, abstract_m.name
            ),
        ));
    }
    if !concrete.invariants.is_empty() {
        out.push(problem(
            "E_EVENT_NOT_PURE_EXTENSION",
            format!("`{}` adds invariants", concrete.name),
        ));
    }
    for e in &concrete.events {
        let parent_ok =
            e.kind.parent() == Some(e.name.as_str()) && abstract_m.event(&e.name).is_some();
        if !e.is_pure_extension() || !parent_ok {
            out.push(problem(
                "E_EVENT_NOT_PURE_EXTENSION",
                format!(
                    "event `{}` of `{}` is not a pure `extends {}`",
                    e.name, concrete.name, e.name
                ),
            ));
        }
    }
    for e in &abstract_m.events {
        if concrete.event(&e.name).is_none() {
            out.push(problem(
                "E_EVENT_NOT_PURE_EXTENSION",
                format!(
                    "event `{}` of `{}` is not extended",
                    e.name, abstract_m.name
                ),
            ));
        }
    }
    out
}
