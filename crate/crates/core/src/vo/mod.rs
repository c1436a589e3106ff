//! Validation obligations: model, evaluation and derivation across links.

pub mod derive;
pub mod engine;
pub mod model;
pub mod translate;

pub use derive::{derive_vo, derive_vo_with_budget, record_derivation, DerivedVo};
pub use engine::{
    evaluate_all, evaluate_formula, evaluate_vo, run_task, vo_report, Artifact, TaskResult,
    VoResult,
};
pub use model::{Formula, McOption, TaskDecl, TaskType, VoDecl, VoFile};
pub use translate::{substitute, translate_expression};
