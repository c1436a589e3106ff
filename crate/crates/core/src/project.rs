//! Project manifests (`project.json`): the machines, contexts, links and VO
//! files that make up one development, plus gluing and event-map files.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Deserialize;

use crate::ast::{Context, Expr, Machine, Name};
use crate::error::{Diagnostic, Diagnostics, Error, Pos, Result};
use crate::eval::Scope;
use crate::parser::{parse_context, parse_expr, parse_machine, parse_vo_file};
use crate::refinement::flatten::{flatten, Flattened};
use crate::vo::{TaskDecl, VoDecl, VoFile};

/// Marker used in event maps for concrete events without abstract counterpart.
pub const NEW_EVENT: &str = "NEW";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    /// `from` refines `to` (`from` is the concrete machine).
    Refines,
    /// `from` is an alternate-view abstraction of `to`.
    Abstracts,
    /// `from` instantiates `to` on concrete constants.
    Instantiates,
}

impl LinkKind {
    pub fn parse(s: &str) -> Option<LinkKind> {
        match s {
            "refines" => Some(LinkKind::Refines),
            "abstracts" => Some(LinkKind::Abstracts),
            "instantiates" => Some(LinkKind::Instantiates),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Refines => "refines",
            LinkKind::Abstracts => "abstracts",
            LinkKind::Instantiates => "instantiates",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventTarget {
    Abstract(String),
    New,
}

/// Concrete event name → abstract event name or NEW.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventMap(pub IndexMap<String, EventTarget>);

impl EventMap {
    /// Maps every transition of `m` to itself.
    pub fn identity(m: &Machine) -> EventMap {
        EventMap(
            m.transitions()
                .map(|e| (e.name.clone(), EventTarget::Abstract(e.name.clone())))
                .collect(),
        )
    }

    pub fn get(&self, concrete: &str) -> Option<&EventTarget> {
        self.0.get(concrete)
    }

    pub fn from_strings(map: &IndexMap<String, String>) -> EventMap {
        EventMap(
            map.iter()
                .map(|(k, v)| {
                    let t = if v == NEW_EVENT {
                        EventTarget::New
                    } else {
                        EventTarget::Abstract(v.clone())
                    };
                    (k.clone(), t)
                })
                .collect(),
        )
    }

    /// Checks totality over the concrete transitions and that targets exist.
    pub fn validate(&self, concrete: &Machine, abstract_m: &Machine) -> Result<()> {
        for e in concrete.transitions() {
            match self.get(&e.name) {
                None => {
                    return Err(Error::check(
                        "E_EVENT_MAP",
                        format!("event map has no entry for concrete event `{}`", e.name),
                    ))
                }
                Some(EventTarget::Abstract(a)) if abstract_m.event(a).is_none() => {
                    return Err(Error::check(
                        "E_EVENT_MAP",
                        format!(
                            "`{}` maps to `{a}`, which `{}` does not define",
                            e.name, abstract_m.name
                        ),
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Functional gluing: every abstract variable as an expression over the
/// concrete state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GluingMap {
    pub abstract_machine: String,
    pub concrete_machine: String,
    pub glue: Vec<(Name, Expr)>,
    pub events: Option<EventMap>,
}

impl GluingMap {
    pub fn get(&self, var: &str) -> Option<&Expr> {
        self.glue.iter().find(|(n, _)| &**n == var).map(|(_, e)| e)
    }

    /// `x := x` for every variable of `m`.
    pub fn identity(m: &Machine) -> GluingMap {
        GluingMap {
            abstract_machine: m.name.clone(),
            concrete_machine: m.name.clone(),
            glue: m
                .variables
                .iter()
                .map(|v| (v.clone(), Expr::Ident(v.clone())))
                .collect(),
            events: Some(EventMap::identity(m)),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawGlue {
    abstract_machine: String,
    concrete_machine: String,
    glue: IndexMap<String, String>,
    #[serde(default)]
    events: Option<IndexMap<String, String>>,
}

/// Parses a gluing-map file.
pub fn parse_glue(text: &str) -> Result<GluingMap, Diagnostics> {
    let raw: RawGlue = serde_json::from_str(text).map_err(|e| json_diag(&e))?;
    let mut glue = Vec::new();
    let mut errors = Vec::new();
    for (var, src) in &raw.glue {
        match parse_expr(src) {
            Ok(e) => glue.push((Name::from(var.as_str()), e)),
            Err(d) => errors.extend(d.0.into_iter().map(|mut d| {
                d.message = format!("glue for `{var}`: {}", d.message);
                d
            })),
        }
    }
    if !errors.is_empty() {
        return Err(Diagnostics(errors));
    }
    Ok(GluingMap {
        abstract_machine: raw.abstract_machine,
        concrete_machine: raw.concrete_machine,
        glue,
        events: raw.events.as_ref().map(EventMap::from_strings),
    })
}

/// Parses an event-map file (`{concrete: abstract | "NEW"}`).
pub fn parse_event_map(text: &str) -> Result<EventMap, Diagnostics> {
    let raw: IndexMap<String, String> = serde_json::from_str(text).map_err(|e| json_diag(&e))?;
    Ok(EventMap::from_strings(&raw))
}

fn json_diag(e: &serde_json::Error) -> Diagnostic {
    Diagnostic::error(
        "E_JSON",
        Pos {
            line: e.line() as u32,
            col: e.column() as u32,
        },
        e.to_string(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub name: String,
    pub kind: LinkKind,
    pub from: String,
    pub to: String,
    pub glue: Option<GluingMap>,
    pub events: Option<EventMap>,
    /// Abstraction links: the flattened machine MM_md written as a
    /// refinement of the abstraction.
    pub flattened: Option<String>,
}

impl Link {
    /// The more abstract endpoint.
    pub fn abstract_machine(&self) -> &str {
        match self.kind {
            LinkKind::Abstracts => &self.from,
            LinkKind::Refines | LinkKind::Instantiates => &self.to,
        }
    }

    /// The more concrete endpoint.
    pub fn concrete_machine(&self) -> &str {
        match self.kind {
            LinkKind::Abstracts => &self.to,
            LinkKind::Refines | LinkKind::Instantiates => &self.from,
        }
    }

    /// Event map of the link: explicit, else from the glue file.
    pub fn event_map(&self) -> Option<&EventMap> {
        self.events
            .as_ref()
            .or_else(|| self.glue.as_ref().and_then(|g| g.events.as_ref()))
    }
}

#[derive(Debug, Clone)]
pub struct Source<T> {
    pub path: PathBuf,
    pub item: T,
}

/// A loaded project. All cross references have been resolved.
#[derive(Debug, Clone)]
pub struct Project {
    pub root: PathBuf,
    pub machines: Vec<Source<Machine>>,
    pub contexts: Vec<Source<Context>>,
    pub links: Vec<Link>,
    pub vo_files: Vec<Source<VoFile>>,
    pub scopes: BTreeMap<String, Scope>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    #[serde(default)]
    machines: Vec<String>,
    #[serde(default)]
    contexts: Vec<String>,
    #[serde(default)]
    links: Vec<RawLink>,
    #[serde(default)]
    vos: Vec<String>,
    #[serde(default)]
    scopes: BTreeMap<String, Scope>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    #[serde(default)]
    name: Option<String>,
    kind: String,
    from: String,
    to: String,
    #[serde(default)]
    glue: Option<String>,
    #[serde(default)]
    events: Option<RawEvents>,
    #[serde(default)]
    flattened: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawEvents {
    Path(String),
    Map(IndexMap<String, String>),
}

fn read(base: &Path, rel: &str, errors: &mut Vec<Diagnostic>) -> Option<(PathBuf, String)> {
    let path = base.join(rel);
    match fs::read_to_string(&path) {
        Ok(text) => Some((path, text)),
        Err(e) => {
            errors.push(
                Diagnostic::error(
                    "E_MISSING_FILE",
                    Pos::default(),
                    format!("cannot read `{rel}`: {e}"),
                )
                .in_file(&path),
            );
            None
        }
    }
}

fn in_file(d: Diagnostics, path: &Path) -> impl Iterator<Item = Diagnostic> + '_ {
    d.0.into_iter().map(move |d| d.in_file(path))
}

fn unresolved(what: String) -> Diagnostic {
    Diagnostic::error("E_UNRESOLVED", Pos::default(), what)
}

/// Parses a manifest; relative paths are resolved against `base`.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Project, Diagnostics> {
    let raw: RawManifest = serde_json::from_str(text).map_err(|e| json_diag(&e))?;
    let mut errors = Vec::new();
    let mut project = Project {
        root: base.to_path_buf(),
        machines: Vec::new(),
        contexts: Vec::new(),
        links: Vec::new(),
        vo_files: Vec::new(),
        scopes: raw.scopes,
    };

    for rel in &raw.machines {
        if let Some((path, text)) = read(base, rel, &mut errors) {
            match parse_machine(&text) {
                Ok(m) => project.machines.push(Source { path, item: m }),
                Err(d) => errors.extend(in_file(d, &path)),
            }
        }
    }
    for rel in &raw.contexts {
        if let Some((path, text)) = read(base, rel, &mut errors) {
            match parse_context(&text) {
                Ok(c) => project.contexts.push(Source { path, item: c }),
                Err(d) => errors.extend(in_file(d, &path)),
            }
        }
    }
    for rel in &raw.vos {
        if let Some((path, text)) = read(base, rel, &mut errors) {
            match parse_vo_file(&text) {
                Ok(v) => project.vo_files.push(Source { path, item: v }),
                Err(d) => errors.extend(in_file(d, &path)),
            }
        }
    }

    for raw_link in raw.links {
        let Some(kind) = LinkKind::parse(&raw_link.kind) else {
            errors.push(Diagnostic::error(
                "E_UNKNOWN_LINK_KIND",
                Pos::default(),
                format!(
                    "unknown link kind `{}` (expected refines, abstracts or instantiates)",
                    raw_link.kind
                ),
            ));
            continue;
        };
        let name = raw_link
            .name
            .unwrap_or_else(|| format!("{}-{}-{}", raw_link.from, kind.as_str(), raw_link.to));
        if kind == LinkKind::Abstracts && raw_link.glue.is_none() {
            errors.push(Diagnostic::error(
                "E_GLUE_REQUIRED",
                Pos::default(),
                format!("abstracts link `{name}` needs a `glue` file"),
            ));
        }
        let glue = raw_link.glue.as_deref().and_then(|rel| {
            let (path, text) = read(base, rel, &mut errors)?;
            parse_glue(&text)
                .map_err(|d| errors.extend(in_file(d, &path)))
                .ok()
        });
        let events = match raw_link.events {
            None => None,
            Some(RawEvents::Map(m)) => Some(EventMap::from_strings(&m)),
            Some(RawEvents::Path(rel)) => read(base, &rel, &mut errors).and_then(|(path, text)| {
                parse_event_map(&text)
                    .map_err(|d| errors.extend(in_file(d, &path)))
                    .ok()
            }),
        };
        project.links.push(Link {
            name,
            kind,
            from: raw_link.from,
            to: raw_link.to,
            glue,
            events,
            flattened: raw_link.flattened,
        });
    }

    errors.extend(project.resolve());
    if errors
        .iter()
        .any(|d| d.severity == crate::error::Severity::Error)
    {
        return Err(Diagnostics(errors));
    }
    Ok(project)
}

impl Project {
    /// Loads `project.json` (or a directory containing one).
    pub fn load(path: impl AsRef<Path>) -> Result<Project> {
        let mut path = path.as_ref().to_path_buf();
        if path.is_dir() {
            path = path.join("project.json");
        }
        let text = fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        parse_manifest(&text, &base).map_err(|d| {
            Error::Diagnostics(Diagnostics(
                d.0.into_iter()
                    .map(|d| {
                        if d.file.is_none() {
                            d.in_file(&path)
                        } else {
                            d
                        }
                    })
                    .collect(),
            ))
        })
    }

    /// Reports dangling names; empty when everything resolves.
    pub fn resolve(&self) -> Vec<Diagnostic> {
        let mut errors = Vec::new();
        let mut seen = HashSet::new();
        for m in &self.machines {
            if !seen.insert(m.item.name.clone()) {
                errors.push(
                    Diagnostic::error(
                        "E_DUP_COMPONENT",
                        Pos::default(),
                        format!("machine `{}` declared twice", m.item.name),
                    )
                    .in_file(&m.path),
                );
            }
        }
        for c in &self.contexts {
            if !seen.insert(c.item.name.clone()) {
                errors.push(
                    Diagnostic::error(
                        "E_DUP_COMPONENT",
                        Pos::default(),
                        format!("component `{}` declared twice", c.item.name),
                    )
                    .in_file(&c.path),
                );
            }
        }
        for m in &self.machines {
            if let Some(r) = &m.item.refines {
                if self.machine(r).is_none() {
                    errors.push(
                        unresolved(format!(
                            "machine `{}` refines unknown machine `{r}`",
                            m.item.name
                        ))
                        .in_file(&m.path),
                    );
                }
            }
            for s in &m.item.sees {
                if self.context(s).is_none() {
                    errors.push(
                        unresolved(format!(
                            "machine `{}` sees unknown context `{s}`",
                            m.item.name
                        ))
                        .in_file(&m.path),
                    );
                }
            }
        }
        for c in &self.contexts {
            if let Some(x) = &c.item.extends {
                if self.context(x).is_none() {
                    errors.push(
                        unresolved(format!(
                            "context `{}` extends unknown context `{x}`",
                            c.item.name
                        ))
                        .in_file(&c.path),
                    );
                }
            }
        }
        for l in &self.links {
            for end in [&l.from, &l.to].into_iter().chain(l.flattened.as_ref()) {
                if self.machine(end).is_none() {
                    errors.push(unresolved(format!(
                        "link `{}` names unknown machine `{end}`",
                        l.name
                    )));
                }
            }
            if let Some(g) = &l.glue {
                let concrete_ok = g.concrete_machine == l.concrete_machine()
                    || l.flattened.as_deref() == Some(g.concrete_machine.as_str());
                if g.abstract_machine != l.abstract_machine() || !concrete_ok {
                    errors.push(Diagnostic::error(
                        "E_GLUE_MISMATCH",
                        Pos::default(),
                        format!(
                            "glue of link `{}` relates `{}` to `{}`, but the link relates `{}` to `{}`",
                            l.name,
                            g.abstract_machine,
                            g.concrete_machine,
                            l.abstract_machine(),
                            l.concrete_machine()
                        ),
                    ));
                }
            }
        }
        for f in &self.vo_files {
            for t in &f.item.tasks {
                if self.machine(&t.machine).is_none() {
                    errors.push(
                        unresolved(format!(
                            "task `{}` names unknown machine `{}`",
                            t.id, t.machine
                        ))
                        .in_file(&f.path),
                    );
                }
            }
        }
        errors
    }

    pub fn machine(&self, name: &str) -> Option<&Machine> {
        self.machines
            .iter()
            .map(|s| &s.item)
            .find(|m| m.name == name)
    }

    pub fn context(&self, name: &str) -> Option<&Context> {
        self.contexts
            .iter()
            .map(|s| &s.item)
            .find(|c| c.name == name)
    }

    pub fn link(&self, name: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn require_machine(&self, name: &str) -> Result<&Machine> {
        self.machine(name)
            .ok_or_else(|| unresolved(format!("unknown machine `{name}`")).into())
    }

    pub fn require_link(&self, name: &str) -> Result<&Link> {
        self.link(name)
            .ok_or_else(|| unresolved(format!("unknown link `{name}`")).into())
    }

    /// Replaces (or adds) a machine by name; used to evaluate variants.
    pub fn put_machine(&mut self, m: Machine) {
        match self.machines.iter_mut().find(|s| s.item.name == m.name) {
            Some(s) => s.item = m,
            None => self.machines.push(Source {
                path: self.root.join(format!("{}.mch", m.name)),
                item: m,
            }),
        }
    }

    /// Replaces (or adds) a context by name.
    pub fn put_context(&mut self, c: Context) {
        match self.contexts.iter_mut().find(|s| s.item.name == c.name) {
            Some(s) => s.item = c,
            None => self.contexts.push(Source {
                path: self.root.join(format!("{}.ctx", c.name)),
                item: c,
            }),
        }
    }

    /// `extends` chain ending at `name`, root first.
    pub fn context_chain(&self, name: &str) -> Result<Vec<&Context>> {
        let mut chain = Vec::new();
        let mut cur = Some(name.to_string());
        while let Some(n) = cur {
            let c = self
                .context(&n)
                .ok_or_else(|| Error::from(unresolved(format!("unknown context `{n}`"))))?;
            if chain.iter().any(|x: &&Context| x.name == c.name) {
                return Err(Error::check(
                    "E_EXTENDS_CYCLE",
                    format!("context `{}` extends itself through its chain", c.name),
                ));
            }
            chain.push(c);
            cur = c.extends.clone();
        }
        chain.reverse();
        Ok(chain)
    }

    /// Union of the chains of every context in `sees`, root first, without
    /// repetitions.
    pub fn contexts_seen(&self, sees: &[String]) -> Result<Vec<&Context>> {
        let mut out: Vec<&Context> = Vec::new();
        for s in sees {
            for c in self.context_chain(s)? {
                if !out.iter().any(|x| x.name == c.name) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    /// `refines` chain ending at `name`, most abstract first.
    pub fn machine_chain(&self, name: &str) -> Result<Vec<&Machine>> {
        let mut chain = Vec::new();
        let mut cur = Some(name.to_string());
        while let Some(n) = cur {
            let m = self
                .machine(&n)
                .ok_or_else(|| Error::from(unresolved(format!("unknown machine `{n}`"))))?;
            if chain.iter().any(|x: &&Machine| x.name == m.name) {
                return Err(Error::check(
                    "E_EXTENDS_CYCLE",
                    format!("machine `{}` refines itself through its chain", m.name),
                ));
            }
            chain.push(m);
            cur = m.refines.clone();
        }
        chain.reverse();
        Ok(chain)
    }

    /// The machine with its refinement chain inlined.
    pub fn flat_machine(&self, name: &str) -> Result<Flattened> {
        let chain = self.machine_chain(name)?;
        Ok(flatten(&chain)?)
    }

    /// Context chain used to execute machine `name`.
    ///
    /// A machine that sees only deferred (generic) contexts is executed on
    /// the concrete values of an instantiation: if some `instantiates` link
    /// F → T exists where T sees the same contexts, F's contexts are used.
    pub fn execution_contexts(&self, name: &str) -> Result<Vec<&Context>> {
        let m = self.require_machine(name)?;
        for l in &self.links {
            if l.kind != LinkKind::Instantiates || l.from == m.name {
                continue;
            }
            if let (Some(f), Some(t)) = (self.machine(&l.from), self.machine(&l.to)) {
                if t.sees == m.sees {
                    return self.contexts_seen(&f.sees);
                }
            }
        }
        self.contexts_seen(&m.sees)
    }

    pub fn find_vo(&self, name: &str) -> Option<(&Source<VoFile>, &VoDecl)> {
        self.vo_files
            .iter()
            .find_map(|f| f.item.vo(name).map(|v| (f, v)))
    }

    pub fn find_task(&self, id: &str) -> Option<&TaskDecl> {
        self.vo_files.iter().find_map(|f| f.item.task(id))
    }

    pub fn all_vos(&self) -> impl Iterator<Item = &VoDecl> {
        self.vo_files.iter().flat_map(|f| f.item.vos.iter())
    }

    /// Resolves a path written in a project file.
    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }
}
