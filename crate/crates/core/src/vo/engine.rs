//! Running validation tasks and evaluating VO formulas.
//!
//! `A ; B` runs `A` first and `B` only if `A` passed, with `A`'s artifacts
//! (state spaces, replays, projections) available to `B`; otherwise every
//! task of `B` is SKIPPED and the result is `A`'s verdict. `A & B` runs
//! both on the same inherited artifacts and rolls up to the more severe
//! verdict.

use std::sync::Arc;

use serde::Serialize;

use super::model::{Derivation, Formula, McOption, TaskDecl, TaskType, VoDecl};
use crate::error::{Error, Result};
use crate::explorer::StateSpace;
use crate::parser::parse_expr;
use crate::projection::{project, Expectation, Projection};
use crate::session::Session;
use crate::traces::{replay, ReplayResult, Trace};
use crate::verdict::Verdict;

/// Something a task produced, available to later `;` steps.
#[derive(Debug, Clone)]
pub enum Artifact {
    Space {
        machine: String,
        space: Arc<StateSpace>,
    },
    Replay(Arc<ReplayResult>),
    Projection(Arc<Projection>),
}

#[derive(Debug, Clone)]
pub struct TaskResult {
    pub id: String,
    pub verdict: Verdict,
    pub detail: String,
    pub artifact: Option<Artifact>,
    /// State space an SPRJ task projected (piped or explored).
    pub consumed: Option<Arc<StateSpace>>,
    /// Whether `consumed` came through a `;` pipe.
    pub piped: bool,
}

impl TaskResult {
    fn skipped(id: &str) -> TaskResult {
        TaskResult {
            id: id.to_string(),
            verdict: Verdict::Skipped,
            detail: "skipped: an earlier step did not pass".into(),
            artifact: None,
            consumed: None,
            piped: false,
        }
    }

    fn error(id: &str, e: &Error) -> TaskResult {
        TaskResult {
            id: id.to_string(),
            verdict: Verdict::Error,
            detail: e.to_string(),
            artifact: None,
            consumed: None,
            piped: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VoResult {
    pub name: String,
    pub requirement: Option<String>,
    pub verdict: Verdict,
    /// Every task reference in formula order, skipped ones included.
    pub tasks: Vec<TaskResult>,
    pub derived_from: Option<Derivation>,
    pub superseded_by: Option<String>,
}

/// Runs one task on the artifacts piped into it.
pub type TaskRunner<'a, A> = dyn FnMut(&str, &[McOption], &[A]) -> (Verdict, Vec<A>) + 'a;

/// Evaluates formula `f`. `run` executes one task reference given the
/// artifacts piped into it and returns its verdict and new artifacts;
/// `skip` is told about every task reference that is not run.
pub fn evaluate_formula<A: Clone>(
    f: &Formula,
    piped: &[A],
    run: &mut TaskRunner<'_, A>,
    skip: &mut dyn FnMut(&str),
) -> (Verdict, Vec<A>) {
    match f {
        Formula::Task { id, options } => run(id, options, piped),
        Formula::And(l, r) => {
            let (vl, mut al) = evaluate_formula(l, piped, run, skip);
            let (vr, ar) = evaluate_formula(r, piped, run, skip);
            al.extend(ar);
            (vl.and(vr), al)
        }
        Formula::Seq(l, r) => {
            let (vl, mut al) = evaluate_formula(l, piped, run, skip);
            if vl != Verdict::Pass {
                for id in r.task_ids() {
                    skip(id);
                }
                return (vl.and(Verdict::Skipped), al);
            }
            let mut inner: Vec<A> = piped.to_vec();
            inner.extend(al.iter().cloned());
            let (vr, ar) = evaluate_formula(r, &inner, run, skip);
            al.extend(ar);
            (vr, al)
        }
    }
}

/// Evaluates one VO.
pub fn evaluate_vo(session: &Session, vo: &VoDecl) -> VoResult {
    let mut tasks = Vec::new();
    let verdict = {
        let mut run = |id: &str, options: &[McOption], piped: &[Artifact]| {
            let r = match session.project.find_task(id) {
                Some(t) => run_task(session, t, options, piped),
                None => TaskResult::error(
                    id,
                    &Error::check("E_UNRESOLVED", format!("task `{id}` is not declared")),
                ),
            };
            let out = (r.verdict, r.artifact.iter().cloned().collect());
            tasks.push(r);
            out
        };
        let mut skipped = Vec::new();
        let (v, _) = evaluate_formula(&vo.formula, &[], &mut run, &mut |id| {
            skipped.push(id.to_string())
        });
        tasks.extend(skipped.iter().map(|id| TaskResult::skipped(id)));
        v
    };
    // report tasks in formula order
    let order = vo.formula.task_ids();
    let mut ordered = Vec::with_capacity(tasks.len());
    for id in order {
        if let Some(i) = tasks.iter().position(|t| t.id == id) {
            ordered.push(tasks.remove(i));
        }
    }
    VoResult {
        name: vo.name.clone(),
        requirement: vo.requirement.clone(),
        verdict,
        tasks: ordered,
        derived_from: vo.derived_from.clone(),
        superseded_by: vo.superseded_by.clone(),
    }
}

/// Evaluates the named VOs, or all of them when `names` is empty.
pub fn evaluate_all(session: &Session, names: &[String]) -> Result<Vec<VoResult>> {
    let p = &session.project;
    let vos: Vec<&VoDecl> = if names.is_empty() {
        p.all_vos().collect()
    } else {
        names
            .iter()
            .map(|n| {
                p.find_vo(n)
                    .map(|(_, v)| v)
                    .ok_or_else(|| Error::check("E_UNRESOLVED", format!("unknown VO `{n}`")))
            })
            .collect::<Result<_>>()?
    };
    Ok(vos.into_iter().map(|v| evaluate_vo(session, v)).collect())
}

/// Runs one task. Failures of any kind end up in the verdict.
pub fn run_task(
    session: &Session,
    t: &TaskDecl,
    options: &[McOption],
    piped: &[Artifact],
) -> TaskResult {
    let r = match t.ty {
        TaskType::TR => run_trace(session, t),
        TaskType::MC => run_mc(session, t, options),
        TaskType::SPRJ => run_projection(session, t, piped),
    };
    r.unwrap_or_else(|e| TaskResult::error(&t.id, &e))
}

fn param(t: &TaskDecl) -> Result<&str> {
    t.param
        .as_deref()
        .ok_or_else(|| Error::check("E_TASK_PARAM", format!("task `{}` needs a parameter", t.id)))
}

fn run_trace(session: &Session, t: &TaskDecl) -> Result<TaskResult> {
    let trace = Trace::load(session.project.path(param(t)?))?;
    let m = session.flat(&t.machine)?;
    let inst = session.instance(&t.machine)?;
    let r = replay(&trace, &m, &inst.env)?;
    Ok(TaskResult {
        id: t.id.clone(),
        verdict: r.verdict,
        detail: r.describe(),
        artifact: Some(Artifact::Replay(Arc::new(r))),
        consumed: None,
        piped: false,
    })
}

fn run_mc(session: &Session, t: &TaskDecl, options: &[McOption]) -> Result<TaskResult> {
    let ss = session.explore(&t.machine)?;
    let default = [McOption::Inv];
    let options = if options.is_empty() {
        &default[..]
    } else {
        options
    };
    let mut problems = Vec::new();
    if options.contains(&McOption::Inv) && !ss.violations().is_empty() {
        let v = &ss.violations()[0];
        problems.push(format!(
            "{} invariant violation(s), first @{} at depth {}",
            ss.violations().len(),
            v.label,
            ss.depth(v.state)
        ));
    }
    if options.contains(&McOption::Dlf) && !ss.deadlocks().is_empty() {
        let d = ss.deadlocks()[0];
        problems.push(format!(
            "{} deadlock(s), first at depth {}",
            ss.deadlocks().len(),
            ss.depth(d)
        ));
    }
    let mut verdict = if problems.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    if verdict == Verdict::Pass && options.contains(&McOption::Fin) && !ss.complete() {
        verdict = Verdict::Unknown;
        problems.push(format!("state bound {} reached", session.bound));
    }
    let summary = format!(
        "{} states, {} transitions, {}",
        ss.len(),
        ss.transition_count(),
        if ss.complete() {
            "complete"
        } else {
            "incomplete"
        }
    );
    let detail = if problems.is_empty() {
        summary
    } else {
        format!("{summary}; {}", problems.join("; "))
    };
    Ok(TaskResult {
        id: t.id.clone(),
        verdict,
        detail,
        artifact: Some(Artifact::Space {
            machine: t.machine.clone(),
            space: ss,
        }),
        consumed: None,
        piped: false,
    })
}

fn run_projection(session: &Session, t: &TaskDecl, piped: &[Artifact]) -> Result<TaskResult> {
    let e = parse_expr(param(t)?)?;
    let from_pipe = piped.iter().rev().find_map(|a| match a {
        Artifact::Space { machine, space } if *machine == t.machine => Some(space.clone()),
        _ => None,
    });
    let was_piped = from_pipe.is_some();
    let ss = match from_pipe {
        Some(ss) => ss,
        None => session.explore(&t.machine)?,
    };
    let inst = session.instance(&t.machine)?;
    let p = project(&ss, &e, &inst.env)?;
    let mut detail = format!("{} nodes, {} edges", p.nodes.len(), p.edges.len());
    let mut verdict = Verdict::Pass;
    if let Some(path) = &t.expect {
        let diffs = Expectation::load(session.project.path(path))?.compare(&p);
        if diffs.is_empty() {
            detail.push_str(", matches expectation");
        } else {
            verdict = Verdict::Fail;
            detail = format!("{detail}; {}", diffs.join("; "));
        }
    }
    Ok(TaskResult {
        id: t.id.clone(),
        verdict,
        detail,
        artifact: Some(Artifact::Projection(Arc::new(p))),
        consumed: Some(ss),
        piped: was_piped,
    })
}

#[derive(Serialize)]
struct ReportTask<'a> {
    id: &'a str,
    verdict: Verdict,
    detail: &'a str,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportDerivation<'a> {
    parent: &'a str,
    link: &'a str,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportVo<'a> {
    name: &'a str,
    requirement: Option<&'a str>,
    verdict: Verdict,
    tasks: Vec<ReportTask<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    derived_from: Option<ReportDerivation<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    superseded_by: Option<&'a str>,
}

#[derive(Serialize)]
struct Report<'a> {
    vos: Vec<ReportVo<'a>>,
    /// Machine name -> VOs with a task on it.
    machines: std::collections::BTreeMap<String, Vec<&'a str>>,
}

/// Overall verdict of a run; an empty run passes.
pub fn overall(results: &[VoResult]) -> Verdict {
    Verdict::all(results.iter().map(|r| r.verdict))
}

/// JSON report of evaluated VOs.
pub fn vo_report(session: &Session, results: &[VoResult]) -> String {
    let mut machines: std::collections::BTreeMap<String, Vec<&str>> = Default::default();
    for r in results {
        for t in &r.tasks {
            if let Some(decl) = session.project.find_task(&t.id) {
                let entry = machines.entry(decl.machine.clone()).or_default();
                if !entry.contains(&r.name.as_str()) {
                    entry.push(&r.name);
                }
            }
        }
    }
    let report = Report {
        vos: results
            .iter()
            .map(|r| ReportVo {
                name: &r.name,
                requirement: r.requirement.as_deref(),
                verdict: r.verdict,
                tasks: r
                    .tasks
                    .iter()
                    .map(|t| ReportTask {
                        id: &t.id,
                        verdict: t.verdict,
                        detail: &t.detail,
                    })
                    .collect(),
                derived_from: r.derived_from.as_ref().map(|d| ReportDerivation {
                    parent: &d.parent,
                    link: &d.link,
                }),
                superseded_by: r.superseded_by.as_deref(),
            })
            .collect(),
        machines,
    };
    let mut out = serde_json::to_string_pretty(&report).expect("report serialises");
    out.push('\n');
    out
}

/// Plain-text report: one line per VO and per task.
pub fn vo_report_text(results: &[VoResult]) -> String {
    let mut out = String::new();
    for r in results {
        let req = r
            .requirement
            .as_deref()
            .map(|q| format!(" [{q}]"))
            .unwrap_or_default();
        let lineage = r
            .derived_from
            .as_ref()
            .map(|d| format!(" (derived from {} via {})", d.parent, d.link))
            .unwrap_or_default();
        let sup = r
            .superseded_by
            .as_ref()
            .map(|s| format!(" (superseded by {s})"))
            .unwrap_or_default();
        out.push_str(&format!("{}{req}: {}{lineage}{sup}\n", r.name, r.verdict));
        for t in &r.tasks {
            out.push_str(&format!(
                "  {:<8} {:<7} {}\n",
                t.id,
                t.verdict.as_str(),
                t.detail
            ));
        }
    }
    out
}
