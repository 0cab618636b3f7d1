//! TF-IDF cosine retrieval, a lexical stand-in for sentence embeddings.

use std::collections::{BTreeMap, HashMap};

use super::{query_terms, rank, EmptyCorpus, ScoredHit};
use crate::spec::{DockerSpec, SpecField};

type SparseVector = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex {
    idf: HashMap<String, f64>,
    vectors: Vec<(SparseVector, f64)>,
    dockerfiles: Vec<String>,
}

/// Field-qualified terms, e.g. `os:alpine`, so fields never share a dimension.
fn qualified_terms(spec: &DockerSpec) -> Vec<String> {
    let terms = query_terms(spec);
    SpecField::ALL
        .iter()
        .zip(terms.iter())
        .flat_map(|(field, ts)| ts.iter().map(move |t| format!("{}:{t}", field.name())))
        .collect()
}

fn norm(v: &SparseVector) -> f64 {
    v.values().map(|x| x * x).sum::<f64>().sqrt()
}

impl VectorIndex {
    pub fn build(
        entries: impl IntoIterator<Item = (DockerSpec, String)>,
    ) -> Result<Self, EmptyCorpus> {
        let (counts, dockerfiles): (Vec<BTreeMap<String, f64>>, Vec<String>) = entries
            .into_iter()
            .map(|(spec, text)| {
                let mut tf = BTreeMap::new();
                for t in qualified_terms(&spec) {
                    *tf.entry(t).or_insert(0.0) += 1.0;
                }
                (tf, text)
            })
            .unzip();
        if counts.is_empty() {
            return Err(EmptyCorpus);
        }
        let n = counts.len() as f64;
        let mut df: HashMap<String, usize> = HashMap::new();
        for tf in &counts {
            for t in tf.keys() {
                *df.entry(t.clone()).or_default() += 1;
            }
        }
        let idf: HashMap<String, f64> = df
            .into_iter()
            .map(|(t, d)| (t, ((1.0 + n) / (1.0 + d as f64)).ln() + 1.0))
            .collect();
        let vectors = counts
            .into_iter()
            .map(|tf| {
                let v: SparseVector = tf.into_iter().map(|(t, c)| {
                    let w = c * idf[&t];
                    (t, w)
                }).collect();
                let n = norm(&v);
                (v, n)
            })
            .collect();
        Ok(Self {
            idf,
            vectors,
            dockerfiles,
        })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Query vector; terms outside the vocabulary are dropped.
    fn embed(&self, spec: &DockerSpec) -> SparseVector {
        let mut v = SparseVector::new();
        for t in qualified_terms(spec) {
            if let Some(w) = self.idf.get(&t) {
                *v.entry(t).or_insert(0.0) += w;
            }
        }
        v
    }

    pub fn similarity(&self, spec: &DockerSpec, doc_id: usize) -> f64 {
        let q = self.embed(spec);
        self.cosine(&q, norm(&q), doc_id)
    }

    fn cosine(&self, q: &SparseVector, q_norm: f64, doc_id: usize) -> f64 {
        let (d, d_norm) = &self.vectors[doc_id];
        if q_norm == 0.0 || *d_norm == 0.0 {
            return 0.0;
        }
        let dot: f64 = q.iter().filter_map(|(t, w)| d.get(t).map(|x| w * x)).sum();
        (dot / (q_norm * d_norm)).min(1.0)
    }
}

/// Top-`k` documents by cosine similarity of TF-IDF spec vectors.
pub fn vector_retrieve(spec: &DockerSpec, k: usize, index: &VectorIndex) -> Vec<ScoredHit> {
    let q = index.embed(spec);
    let q_norm = norm(&q);
    let hits = (0..index.len())
        .map(|id| ScoredHit {
            doc_id: id,
            score: index.cosine(&q, q_norm, id),
            dockerfile: index.dockerfiles[id].clone(),
        })
        .collect();
    rank(hits, k)
}
