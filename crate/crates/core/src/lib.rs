//! Core of the `vok` validation-obligation engine.

pub mod ast;
pub mod error;
pub mod eval;
pub mod explorer;
pub mod parser;
pub mod printer;
pub mod project;
pub mod projection;
pub mod refinement;
pub mod scope;
pub mod session;
pub mod traces;
pub mod value;
pub mod verdict;
pub mod vo;

pub use ast::{Action, Context, Event, EventKind, Expr, Labelled, Machine};
pub use error::{Diagnostic, Diagnostics, Error, EvalError, Result};
pub use project::Project;
pub use session::Session;
pub use value::Value;
pub use verdict::Verdict;
