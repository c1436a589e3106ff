//! Deriving a VO for the concrete end of a link.
//!
//! `VO3` derived across link `L` becomes `VO3.1` (then `VO3.2`, ...):
//! trace tasks get a refined trace, projection tasks a translated
//! expression, model-checking tasks are re-targeted unchanged. The parent
//! stays in the file, marked `superseded by VO3.1`.

use std::fs;
use std::path::{Path, PathBuf};

use super::model::{render_task, render_vo, Derivation, TaskDecl, TaskType, VoDecl};
use super::translate::translate_expression;
use crate::ast::Name;
use crate::error::{Error, Result};
use crate::parser::parse_expr;
use crate::printer::{print_expr, Notation};
use crate::project::{GluingMap, Project};
use crate::session::Session;
use crate::traces::{refine_trace, Trace, DEFAULT_SKIP_BUDGET};

/// A derived VO, not yet written anywhere.
#[derive(Debug, Clone)]
pub struct DerivedVo {
    pub vo: VoDecl,
    pub tasks: Vec<TaskDecl>,
    /// Refined traces keyed by their project-relative path.
    pub traces: Vec<(String, Trace)>,
    /// Index into `Project::vo_files` of the file holding the parent.
    pub file: usize,
}

fn next_free(base: &str, from: usize, taken: impl Fn(&str) -> bool) -> (String, usize) {
    (from..)
        .map(|n| (format!("{base}.{n}"), n))
        .find(|(name, _)| !taken(name))
        .unwrap()
}

/// Derives `vo_name` across `link_name`. Nothing is written; see
/// [`record_derivation`].
pub fn derive_vo(session: &Session, vo_name: &str, link_name: &str) -> Result<DerivedVo> {
    derive_vo_with_budget(session, vo_name, link_name, DEFAULT_SKIP_BUDGET)
}

pub fn derive_vo_with_budget(
    session: &Session,
    vo_name: &str,
    link_name: &str,
    skip_budget: usize,
) -> Result<DerivedVo> {
    let p = &session.project;
    let (file, parent) = p
        .vo_files
        .iter()
        .enumerate()
        .find_map(|(i, f)| f.item.vo(vo_name).map(|v| (i, v)))
        .ok_or_else(|| Error::check("E_UNRESOLVED", format!("unknown VO `{vo_name}`")))?;
    let link = p.require_link(link_name)?;
    let (abs_name, conc_name) = (link.abstract_machine(), link.concrete_machine());

    let (name, n) = next_free(&parent.name, 1, |x| p.find_vo(x).is_some());
    let mut renames: Vec<(String, String)> = Vec::new();
    let mut tasks = Vec::new();
    let mut traces = Vec::new();
    for id in parent.formula.task_ids() {
        if renames.iter().any(|(old, _)| old == id) {
            continue;
        }
        let t = p
            .find_task(id)
            .ok_or_else(|| Error::check("E_UNRESOLVED", format!("task `{id}` is not declared")))?;
        if t.machine != abs_name {
            return Err(Error::check(
                "E_LINK_MISMATCH",
                format!(
                    "task `{id}` is on `{}`, but link `{}` abstracts `{abs_name}`",
                    t.machine, link.name
                ),
            ));
        }
        let (new_id, _) = next_free(id, n, |x| {
            p.find_task(x).is_some() || tasks.iter().any(|t: &TaskDecl| t.id == x)
        });
        let mut derived = TaskDecl {
            id: new_id.clone(),
            machine: conc_name.to_string(),
            ty: t.ty,
            param: None,
            expect: None,
        };
        match t.ty {
            TaskType::MC => {}
            TaskType::TR => {
                let events = link.event_map().ok_or_else(|| {
                    Error::check(
                        "E_EVENT_MAP",
                        format!("link `{}` has no event map", link.name),
                    )
                })?;
                let path = t.param.as_deref().unwrap_or_default();
                let abstract_trace = Trace::load(p.path(path))?;
                let conc = session.flat(conc_name)?;
                let inst = session.instance(conc_name)?;
                let refined = refine_trace(&abstract_trace, &conc, &inst.env, events, skip_budget)?;
                let rel = format!("traces/derived/{new_id}.json");
                derived.param = Some(rel.clone());
                traces.push((rel, refined));
            }
            TaskType::SPRJ => {
                let text = t.param.as_deref().unwrap_or_default();
                let e = parse_expr(text)?;
                let abs = p.require_machine(abs_name)?;
                let conc = p.require_machine(conc_name)?;
                // abstract variables the concrete machine keeps need no glue
                let glued: Vec<Name> = abs
                    .variables
                    .iter()
                    .filter(|v| {
                        !conc.has_variable(v)
                            || link.glue.as_ref().is_some_and(|g| g.get(v).is_some())
                    })
                    .cloned()
                    .collect();
                let empty = GluingMap::default();
                let glue = link.glue.as_ref().unwrap_or(&empty);
                let translated = translate_expression(&e, glue, &glued)?;
                derived.param = Some(print_expr(&translated, Notation::Ascii));
            }
        }
        renames.push((id.to_string(), new_id));
        tasks.push(derived);
    }

    let formula = parent.formula.map_ids(&|id| {
        renames
            .iter()
            .find(|(old, _)| old == id)
            .map(|(_, new)| new.clone())
            .unwrap_or_else(|| id.to_string())
    });
    Ok(DerivedVo {
        vo: VoDecl {
            name,
            requirement: parent.requirement.clone(),
            formula,
            derived_from: Some(Derivation {
                parent: parent.name.clone(),
                link: link.name.clone(),
            }),
            superseded_by: None,
        },
        tasks,
        traces,
        file,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

/// Adds `d` to the project: refined traces are written, the new tasks and
/// VO are appended to the parent's `.vo` file and the parent's header is
/// rewritten to mark it superseded. Other lines of the file are kept as
/// they are. Returns the path of the updated `.vo` file.
pub fn record_derivation(project: &mut Project, d: &DerivedVo) -> Result<PathBuf> {
    for (rel, trace) in &d.traces {
        write(&project.path(rel), &trace.to_json())?;
    }
    let parent_name = &d.vo.derived_from.as_ref().expect("derived VO").parent;
    let source = &mut project.vo_files[d.file];
    let text = fs::read_to_string(&source.path).map_err(|e| Error::Io {
        path: source.path.clone(),
        source: e,
    })?;
    let parent = source
        .item
        .vos
        .iter_mut()
        .find(|v| &v.name == parent_name)
        .expect("parent VO is in its file");
    parent.superseded_by = Some(d.vo.name.clone());
    let parent_line = render_vo(parent);

    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let is_parent = |l: &str| {
        let head = l.split(':').next().unwrap_or("");
        !l.trim_start().starts_with("//")
            && head.split_whitespace().next() == Some(parent_name.as_str())
    };
    match lines.iter().position(|l| is_parent(l)) {
        Some(i) => lines[i] = parent_line,
        None => lines.push(parent_line),
    }
    if lines.last().is_some_and(|l| !l.trim().is_empty()) {
        lines.push(String::new());
    }
    lines.extend(d.tasks.iter().map(render_task));
    lines.push(render_vo(&d.vo));
    let mut out = lines.join("\n");
    out.push('\n');
    write(&source.path, &out)?;

    source.item.tasks.extend(d.tasks.iter().cloned());
    source.item.vos.push(d.vo.clone());
    Ok(source.path.clone())
}
