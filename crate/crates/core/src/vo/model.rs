use std::fmt;

/// Kind of validation task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum TaskType {
    /// Trace replay.
    TR,
    /// Model checking.
    MC,
    /// State-space projection.
    SPRJ,
}

impl TaskType {
    pub fn parse(s: &str) -> Option<TaskType> {
        match s {
            "TR" => Some(TaskType::TR),
            "MC" => Some(TaskType::MC),
            "SPRJ" => Some(TaskType::SPRJ),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskType::TR => "TR",
            TaskType::MC => "MC",
            TaskType::SPRJ => "SPRJ",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Model-checking options given at a task reference, e.g. `MC(FIN, DLF)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum McOption {
    /// Exploration must be complete.
    Fin,
    /// No invariant violations.
    Inv,
    /// No deadlocks.
    Dlf,
}

impl McOption {
    pub fn parse(s: &str) -> Option<McOption> {
        match s {
            "FIN" => Some(McOption::Fin),
            "INV" => Some(McOption::Inv),
            "DLF" => Some(McOption::Dlf),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            McOption::Fin => "FIN",
            McOption::Inv => "INV",
            McOption::Dlf => "DLF",
        }
    }
}

/// `<id>/<machine>/<TYPE>[: <param>]`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskDecl {
    pub id: String,
    pub machine: String,
    pub ty: TaskType,
    /// TR: trace path; SPRJ: expression text; MC: none.
    pub param: Option<String>,
    /// SPRJ only: path of an expected-projection file.
    pub expect: Option<String>,
}

/// VO formula over task references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Task { id: String, options: Vec<McOption> },
    And(Box<Formula>, Box<Formula>),
    Seq(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn task(id: &str) -> Formula {
        Formula::Task {
            id: id.to_string(),
            options: Vec::new(),
        }
    }

    /// Task ids in left-to-right order.
    pub fn task_ids(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let Formula::Task { id, .. } = f {
                out.push(id.as_str());
            }
        });
        out
    }

    fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        match self {
            Formula::Task { .. } => {}
            Formula::And(l, r) | Formula::Seq(l, r) => {
                l.walk(visit);
                r.walk(visit);
            }
        }
    }

    /// Renames every task reference through `rename`.
    pub fn map_ids(&self, rename: &impl Fn(&str) -> String) -> Formula {
        match self {
            Formula::Task { id, options } => Formula::Task {
                id: rename(id),
                options: options.clone(),
            },
            Formula::And(l, r) => {
                Formula::And(Box::new(l.map_ids(rename)), Box::new(r.map_ids(rename)))
            }
            Formula::Seq(l, r) => {
                Formula::Seq(Box::new(l.map_ids(rename)), Box::new(r.map_ids(rename)))
            }
        }
    }

    fn prec(&self) -> u8 {
        match self {
            Formula::Seq(..) => 1,
            Formula::And(..) => 2,
            Formula::Task { .. } => 3,
        }
    }

    fn write(&self, out: &mut String) {
        match self {
            Formula::Task { id, options } => {
                out.push_str(id);
                if !options.is_empty() {
                    out.push('(');
                    for (i, o) in options.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        out.push_str(o.as_str());
                    }
                    out.push(')');
                }
            }
            Formula::And(l, r) | Formula::Seq(l, r) => {
                let (op, p) = match self {
                    Formula::And(..) => (" & ", 2),
                    _ => (";", 1),
                };
                // both operators are left-associative
                let wrap_l = l.prec() < p;
                // a conjunction after `;` is always bracketed, for readability
                let wrap_r = r.prec() <= p || (p == 1 && r.prec() == 2);
                for (child, wrap, first) in [(l, wrap_l, true), (r, wrap_r, false)] {
                    if !first {
                        out.push_str(op);
                    }
                    if wrap {
                        out.push('(');
                    }
                    child.write(out);
                    if wrap {
                        out.push(')');
                    }
                }
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub parent: String,
    pub link: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoDecl {
    pub name: String,
    pub requirement: Option<String>,
    pub formula: Formula,
    pub derived_from: Option<Derivation>,
    pub superseded_by: Option<String>,
}

/// Contents of one `.vo` file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VoFile {
    pub tasks: Vec<TaskDecl>,
    pub vos: Vec<VoDecl>,
}

impl VoFile {
    pub fn task(&self, id: &str) -> Option<&TaskDecl> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn vo(&self, name: &str) -> Option<&VoDecl> {
        self.vos.iter().find(|v| v.name == name)
    }

    /// Renders back to the `.vo` syntax accepted by the parser.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for t in &self.tasks {
            out.push_str(&render_task(t));
            out.push('\n');
        }
        if !self.tasks.is_empty() && !self.vos.is_empty() {
            out.push('\n');
        }
        for v in &self.vos {
            out.push_str(&render_vo(v));
            out.push('\n');
        }
        out
    }
}

pub fn render_task(t: &TaskDecl) -> String {
    let mut s = format!("{}/{}/{}", t.id, t.machine, t.ty);
    if let Some(p) = &t.param {
        s.push_str(": ");
        s.push_str(p);
    }
    if let Some(e) = &t.expect {
        if t.param.is_none() {
            s.push(':');
        }
        s.push_str(&format!(" expect \"{e}\""));
    }
    s
}

pub fn render_vo(v: &VoDecl) -> String {
    let mut s = v.name.clone();
    if let Some(r) = &v.requirement {
        s.push_str(&format!(" [{r}]"));
    }
    if let Some(d) = &v.derived_from {
        s.push_str(&format!(" derived {} via {}", d.parent, d.link));
    }
    if let Some(by) = &v.superseded_by {
        s.push_str(&format!(" superseded by {by}"));
    }
    s.push_str(": ");
    s.push_str(&v.formula.to_string());
    s
}
