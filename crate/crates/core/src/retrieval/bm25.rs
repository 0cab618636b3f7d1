use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{query_terms, rank, render_spec_fields, tokenize, EmptyCorpus, ScoredHit, FIELD_COUNT};
use crate::spec::DockerSpec;

pub const INDEX_MAGIC: &str = "dockspec-index";
pub const INDEX_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedDocument {
    pub id: usize,
    pub spec: DockerSpec,
    pub field_texts: [String; FIELD_COUNT],
    pub dockerfile_text: String,
    pub term_frequencies: [BTreeMap<String, u32>; FIELD_COUNT],
    pub lengths: [usize; FIELD_COUNT],
}

impl IndexedDocument {
    fn new(id: usize, spec: DockerSpec, dockerfile_text: String) -> Self {
        let field_texts = render_spec_fields(&spec);
        let term_frequencies = field_texts.clone().map(|text| {
            let mut tf = BTreeMap::new();
            for t in tokenize(&text) {
                *tf.entry(t).or_insert(0) += 1;
            }
            tf
        });
        let lengths = std::array::from_fn(|f| term_frequencies[f].values().sum::<u32>() as usize);
        Self {
            id,
            spec,
            field_texts,
            dockerfile_text,
            term_frequencies,
            lengths,
        }
    }

    pub fn tf(&self, field: usize, term: &str) -> u32 {
        self.term_frequencies[field].get(term).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldIndex {
    /// term → (doc id, tf), ascending by doc id
    pub postings: HashMap<String, Vec<(usize, u32)>>,
    pub avg_length: f64,
}

impl FieldIndex {
    pub fn df(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }
}

/// Immutable after build; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalIndex {
    pub documents: Vec<IndexedDocument>,
    pub fields: Vec<FieldIndex>,
    pub params: Bm25Params,
}

pub fn idf(n: usize, df: usize) -> f64 {
    let (n, df) = (n as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// BM25 of one document against per-field query terms.
pub fn bm25_score(
    query: &[Vec<String>; FIELD_COUNT],
    doc: &IndexedDocument,
    index: &RetrievalIndex,
) -> f64 {
    let n = index.documents.len();
    let Bm25Params { k1, b } = index.params;
    let mut score = 0.0;
    for (f, terms) in query.iter().enumerate() {
        let field = &index.fields[f];
        let norm = if field.avg_length > 0.0 {
            doc.lengths[f] as f64 / field.avg_length
        } else {
            0.0
        };
        for term in terms {
            let tf = doc.tf(f, term);
            if tf == 0 {
                continue;
            }
            let tf = tf as f64;
            score += idf(n, field.df(term)) * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * norm));
        }
    }
    score
}

#[derive(Debug, Error)]
pub enum IndexFormatError {
    #[error("not an index file (bad magic)")]
    BadMagic,
    #[error("unsupported index version {0}")]
    UnsupportedVersion(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Empty(#[from] EmptyCorpus),
}

#[derive(Serialize, Deserialize)]
struct StoredDocument {
    spec: DockerSpec,
    dockerfile: String,
}

#[derive(Serialize, Deserialize)]
struct StoredIndex {
    magic: String,
    version: u32,
    params: Bm25Params,
    documents: Vec<StoredDocument>,
}

impl RetrievalIndex {
    /// Index `(spec, dockerfile)` pairs; ids follow input order.
    pub fn build(
        entries: impl IntoIterator<Item = (DockerSpec, String)>,
        params: Bm25Params,
    ) -> Result<Self, EmptyCorpus> {
        let documents: Vec<IndexedDocument> = entries
            .into_iter()
            .enumerate()
            .map(|(id, (spec, text))| IndexedDocument::new(id, spec, text))
            .collect();
        if documents.is_empty() {
            return Err(EmptyCorpus);
        }
        let n = documents.len() as f64;
        let mut fields = vec![FieldIndex::default(); FIELD_COUNT];
        for (f, field) in fields.iter_mut().enumerate() {
            for doc in &documents {
                for (term, &tf) in &doc.term_frequencies[f] {
                    field.postings.entry(term.clone()).or_default().push((doc.id, tf));
                }
            }
            field.avg_length = documents.iter().map(|d| d.lengths[f]).sum::<usize>() as f64 / n;
        }
        Ok(Self {
            documents,
            fields,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Top-`k` documents for a spec under a disjunctive per-field query.
    ///
    /// Every document is ranked, so documents matching no term trail with score 0.
    pub fn retrieve(&self, spec: &DockerSpec, k: usize) -> Vec<ScoredHit> {
        let query = query_terms(spec);
        let mut matched = vec![false; self.documents.len()];
        for (f, terms) in query.iter().enumerate() {
            for term in terms {
                if let Some(postings) = self.fields[f].postings.get(term) {
                    for &(id, _) in postings {
                        matched[id] = true;
                    }
                }
            }
        }
        let hits = self
            .documents
            .iter()
            .map(|doc| ScoredHit {
                doc_id: doc.id,
                score: if matched[doc.id] {
                    bm25_score(&query, doc, self)
                } else {
                    0.0
                },
                dockerfile: doc.dockerfile_text.clone(),
            })
            .collect();
        rank(hits, k)
    }

    pub fn to_json(&self) -> String {
        let stored = StoredIndex {
            magic: INDEX_MAGIC.to_string(),
            version: INDEX_VERSION,
            params: self.params,
            documents: self
                .documents
                .iter()
                .map(|d| StoredDocument {
                    spec: d.spec.clone(),
                    dockerfile: d.dockerfile_text.clone(),
                })
                .collect(),
        };
        serde_json::to_string(&stored).expect("index serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, IndexFormatError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        if value.get("magic").and_then(|m| m.as_str()) != Some(INDEX_MAGIC) {
            return Err(IndexFormatError::BadMagic);
        }
        let stored: StoredIndex = serde_json::from_value(value)?;
        if stored.version != INDEX_VERSION {
            return Err(IndexFormatError::UnsupportedVersion(stored.version));
        }
        Ok(Self::build(
            stored.documents.into_iter().map(|d| (d.spec, d.dockerfile)),
            stored.params,
        )?)
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexFormatError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexFormatError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::PackageManager;

    fn spec(os: &str, deps: &[&str]) -> DockerSpec {
        DockerSpec {
            os: os.into(),
            pkg_manager: PackageManager::Apt,
            dependencies: deps.iter().map(|s| s.to_string()).collect(),
            ..DockerSpec::default()
        }
    }

    fn index(specs: &[DockerSpec]) -> RetrievalIndex {
        RetrievalIndex::build(
            specs.iter().enumerate().map(|(i, s)| (s.clone(), format!("doc{i}"))),
            Bm25Params::default(),
        )
        .unwrap()
    }

    #[test]
    fn empty_corpus_rejected() {
        assert_eq!(
            RetrievalIndex::build(Vec::new(), Bm25Params::default()).unwrap_err(),
            EmptyCorpus
        );
    }

    #[test]
    fn document_frequencies() {
        let idx = index(&[spec("ubuntu", &["git"])]);
        let deps = crate::spec::SpecField::Dependencies.index();
        assert_eq!(idx.fields[deps].df("git"), 1);
        let idx = index(&[spec("ubuntu", &["git"]), spec("alpine", &["git", "curl"])]);
        assert_eq!(idx.fields[deps].df("git"), 2);
        assert_eq!(idx.fields[deps].df("curl"), 1);
        assert_eq!(idx.fields[deps].df("zsh"), 0);
    }

    #[test]
    fn average_length() {
        let idx = index(&[
            spec("a", &["d1", "d2"]),
            spec("a", &["d1", "d2", "d3", "d4"]),
            spec("a", &["d1", "d2", "d3", "d4", "d5", "d6"]),
        ]);
        let deps = crate::spec::SpecField::Dependencies.index();
        assert_eq!(idx.fields[deps].avg_length, 4.0);
        for d in &idx.documents {
            for f in 0..FIELD_COUNT {
                assert_eq!(d.lengths[f] as u32, d.term_frequencies[f].values().sum::<u32>());
            }
        }
    }

    #[test]
    fn single_doc_score_matches_formula() {
        let s = spec("ubuntu", &["git"]);
        let idx = index(std::slice::from_ref(&s));
        let q = query_terms(&s);
        // N = 1, df = 1, len = avgdl: each term scores ln(1 + 0.5/1.5)
        let expected = 3.0 * (1.0f64 + 0.5 / 1.5).ln();
        assert!((bm25_score(&q, &idx.documents[0], &idx) - expected).abs() < 1e-12);
    }

    #[test]
    fn absent_terms_score_zero() {
        let idx = index(&[spec("ubuntu", &["git"])]);
        let q = query_terms(&DockerSpec {
            pkg_manager: PackageManager::Yum,
            ..spec("centos", &["vim"])
        });
        assert_eq!(bm25_score(&q, &idx.documents[0], &idx), 0.0);
    }

    #[test]
    fn retrieve_orders_and_ties() {
        let target = spec("alpine", &["nginx", "curl"]);
        let idx = index(&[
            spec("ubuntu", &["git"]),
            target.clone(),
            spec("ubuntu", &["git"]),
            spec("debian", &["vim"]),
        ]);
        let hits = idx.retrieve(&target, 1);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].doc_id, 1);

        let all = idx.retrieve(&spec("ubuntu", &["git"]), 100);
        assert_eq!(all.len(), 4);
        assert_eq!((all[0].doc_id, all[1].doc_id), (0, 2));
        assert_eq!(all[0].score, all[1].score);
        assert!(all.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn save_load_round_trip() {
        let idx = index(&[spec("ubuntu", &["git"]), spec("alpine", &["curl"])]);
        let back = RetrievalIndex::from_json(&idx.to_json()).unwrap();
        assert_eq!(back, idx);
        assert!(matches!(
            RetrievalIndex::from_json("{\"magic\":\"nope\"}"),
            Err(IndexFormatError::BadMagic)
        ));
        let bumped = idx.to_json().replace("\"version\":1", "\"version\":99");
        assert!(matches!(
            RetrievalIndex::from_json(&bumped),
            Err(IndexFormatError::UnsupportedVersion(99))
        ));
    }
}
