//! Metrics and statistics for judging generated Dockerfiles.

mod adherence;
mod bleu;
mod layers;
mod run;
mod stats;
mod ted;

pub use adherence::{adherence, dependency_recall, mean_adherence, AdherenceReport, FieldScores};
pub use bleu::{bleu4, bleu4_text, modified_precision, EmptyCandidate};
pub use layers::{
    chain_id, compare_manifests, layer_match, parse_manifest, EmptyManifest, LayerManifest,
    LayerReport, ManifestError,
};
pub use run::{
    evaluate_pair, evaluate_run, Comparison, DistributionSummary, EvaluationError,
    EvaluationReport, Metric, NamedFile, PairFailure, PairResult, SystemOutputs, SystemReport,
};
pub use stats::{
    benjamini_hochberg, cliffs_delta, mann_whitney_u, EmptySample, Magnitude, MannWhitney,
    EXACT_LIMIT,
};
pub use ted::{
    distance_report, node_edit_distance, normalized_distance, tree_edit_distance, DistanceReport,
};
