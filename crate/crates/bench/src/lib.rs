//! Shared setup for the `vok` benchmarks.

use std::path::{Path, PathBuf};

use vok_core::{Project, Session};

/// Directory of the bundled train corpus.
pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/train")
}

/// A fresh session on the train corpus, with nothing cached.
pub fn session() -> Session {
    Session::new(Project::load(corpus_dir()).expect("corpus loads"))
}
