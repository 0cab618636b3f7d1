//! Dockerfile spec inference, corpus construction, retrieval and evaluation.

pub mod corpus;
pub mod evaluation;
pub mod inference;
pub mod retrieval;
pub mod spec;
pub mod syntax;
pub mod wordlists;

pub use corpus::{CorpusEntry, CorpusRecord, SpecCluster};
pub use retrieval::{RetrievalIndex, ScoredHit, VectorIndex};
pub use inference::{infer_generated_spec, infer_spec, InferenceError};
pub use spec::{DockerSpec, PackageManager, SpecField};
pub use syntax::{build_ast, parse_dockerfile, AstNode, DockerfileAst, DockerfileDocument};
pub use wordlists::WordLists;
