//! Spec-to-Dockerfile retrieval: BM25 over spec fields, plus a TF-IDF cosine
//! stand-in for the sentence-embedding baseline.

mod bm25;
mod vector;

pub use bm25::{
    bm25_score, idf, Bm25Params, FieldIndex, IndexFormatError, IndexedDocument,
    RetrievalIndex, INDEX_MAGIC, INDEX_VERSION,
};
pub use vector::{vector_retrieve, VectorIndex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec::{DockerSpec, SpecField};

pub const FIELD_COUNT: usize = SpecField::ALL.len();

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("the corpus is empty")]
pub struct EmptyCorpus;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredHit {
    pub doc_id: usize,
    pub score: f64,
    pub dockerfile: String,
}

/// Text of each spec field, indexed by [`SpecField::index`].
///
/// Flags render as the field name when set and as nothing otherwise.
pub fn render_spec_fields(spec: &DockerSpec) -> [String; FIELD_COUNT] {
    SpecField::ALL.map(|field| match field {
        SpecField::Os => spec.os.clone(),
        SpecField::PkgManager => spec.pkg_manager.as_str().to_string(),
        SpecField::Dependencies => spec
            .dependencies
            .iter()
            .map(String::as_str)
            .collect::<Vec<_>>()
            .join(" "),
        flag => {
            if spec.flag(flag) == Some(true) {
                flag.name().to_string()
            } else {
                String::new()
            }
        }
    })
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_lowercase).collect()
}

/// Per-field query terms for a spec.
pub fn query_terms(spec: &DockerSpec) -> [Vec<String>; FIELD_COUNT] {
    render_spec_fields(spec).map(|t| tokenize(&t))
}

/// Sort by score descending then id ascending, and keep the first `k`.
fn rank(mut hits: Vec<ScoredHit>, k: usize) -> Vec<ScoredHit> {
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.doc_id.cmp(&b.doc_id)));
    hits.truncate(k);
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::PackageManager;

    #[test]
    fn empty_spec_renders_os_and_pkg_only() {
        let fields = render_spec_fields(&DockerSpec::default());
        assert_eq!(fields[SpecField::Os.index()], "any");
        assert_eq!(fields[SpecField::PkgManager.index()], "any");
        assert!(fields.iter().skip(2).all(String::is_empty));
    }

    #[test]
    fn dependencies_sorted_and_flags_named() {
        let spec = DockerSpec {
            os: "debian10".into(),
            pkg_manager: PackageManager::Apt,
            dependencies: ["tomcat", "x265", "ffmpeg"].iter().map(|s| s.to_string()).collect(),
            uses_env: true,
            ..DockerSpec::default()
        };
        let fields = render_spec_fields(&spec);
        assert_eq!(fields[SpecField::Dependencies.index()], "ffmpeg tomcat x265");
        assert_eq!(fields[SpecField::UsesEnv.index()], "uses_env");
        assert_eq!(fields[SpecField::UsesCmd.index()], "");
        assert_eq!(fields[SpecField::PkgManager.index()], "apt");
    }
}
