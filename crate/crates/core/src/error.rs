use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// Evaluation failures. Each carries a stable code (`E_...`) used in reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound identifier `{0}`")]
    Unbound(String),
    #[error("type mismatch: expected {expected}, found `{found}`")]
    Type {
        expected: &'static str,
        found: String,
    },
    #[error("function application outside domain: `{arg}` not in dom of `{func}`")]
    ApplyUndefined { func: String, arg: String },
    #[error("relation `{func}` is not functional at `{arg}`")]
    ApplyAmbiguous { func: String, arg: String },
    #[error("constructed set exceeds {limit} elements")]
    EnumLimit { limit: usize },
    #[error("powerset base of {size} elements exceeds the limit of {limit}")]
    PowLimit { size: usize, limit: usize },
    #[error("no domain-defining conjunct for bound variable `{0}`")]
    UnboundedQuantifier(String),
    #[error("no domain-defining guard for parameter `{param}` of event `{event}`")]
    UnboundedParam { event: String, param: String },
}

impl EvalError {
    pub fn code(&self) -> &'static str {
        match self {
            EvalError::Unbound(_) => "E_UNBOUND",
            EvalError::Type { .. } => "E_TYPE",
            EvalError::ApplyUndefined { .. } => "E_APPLY_UNDEFINED",
            EvalError::ApplyAmbiguous { .. } => "E_APPLY_AMBIGUOUS",
            EvalError::EnumLimit { .. } => "E_ENUM_LIMIT",
            EvalError::PowLimit { .. } => "E_POW_LIMIT",
            EvalError::UnboundedQuantifier(_) => "E_UNBOUNDED_QUANTIFIER",
            EvalError::UnboundedParam { .. } => "E_UNBOUNDED_PARAM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

/// Line/column are 1-based; `0:0` means "no position" (e.g. JSON-level errors).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub pos: Pos,
    pub message: String,
    /// Offending label (axiom, guard, invariant) when there is one.
    pub label: Option<String>,
    pub file: Option<PathBuf>,
}

impl Diagnostic {
    pub fn error(code: &'static str, pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            pos,
            message: message.into(),
            label: None,
            file: None,
        }
    }

    pub fn warning(code: &'static str, pos: Pos, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, pos, message)
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn in_file(mut self, file: impl Into<PathBuf>) -> Self {
        self.file = Some(file.into());
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        if let Some(file) = &self.file {
            write!(f, "{}:", file.display())?;
        }
        if self.pos.line > 0 {
            write!(f, "{}:{}: ", self.pos.line, self.pos.col)?;
        } else if self.file.is_some() {
            f.write_str(" ")?;
        }
        write!(f, "{sev}[{}]: {}", self.code, self.message)?;
        if let Some(label) = &self.label {
            write!(f, " (@{label})")?;
        }
        Ok(())
    }
}

/// A non-empty batch of diagnostics returned by parsers and loaders.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn single(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.0.iter().any(|d| d.code == code)
    }

    pub fn first_code(&self) -> &'static str {
        self.0.first().map(|d| d.code).unwrap_or("E_UNKNOWN")
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics::single(d)
    }
}

/// Crate-level error for operations that span parsing, evaluation and IO.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Diagnostics(#[from] Diagnostics),
    #[error("{code}: {message}")]
    Check { code: &'static str, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn check(code: &'static str, message: impl Into<String>) -> Self {
        Error::Check {
            code,
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            Error::Eval(e) => e.code(),
            Error::Diagnostics(d) => d.first_code(),
            Error::Check { code, .. } => code,
            Error::Io { .. } => "E_IO",
            Error::Json { .. } => "E_JSON",
        }
    }
}

impl From<Diagnostic> for Error {
    fn from(d: Diagnostic) -> Self {
        Error::Diagnostics(Diagnostics::single(d))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
