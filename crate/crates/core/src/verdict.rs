//! Task and obligation verdicts.
//!
//! Verdicts are ordered by severity, `Pass < Skipped < Unknown < Fail <
//! Error`, and a conjunction rolls up to the most severe of its parts.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    /// Not run because an earlier `;` step did not pass.
    Skipped,
    /// Evidence is incomplete (e.g. exploration hit its bound).
    Unknown,
    Fail,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Skipped => "SKIPPED",
            Verdict::Unknown => "UNKNOWN",
            Verdict::Fail => "FAIL",
            Verdict::Error => "ERROR",
        }
    }

    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }

    /// Conjunction: the more severe of the two.
    pub fn and(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    /// Rolls up any number of verdicts; an empty conjunction passes.
    pub fn all(vs: impl IntoIterator<Item = Verdict>) -> Verdict {
        vs.into_iter().fold(Verdict::Pass, Verdict::and)
    }

    /// Process exit code for an overall verdict.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Skipped | Verdict::Unknown | Verdict::Fail => 1,
            Verdict::Error => 2,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
