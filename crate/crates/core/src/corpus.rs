//! Building a ⟨spec, Dockerfile⟩ corpus from a pile of Dockerfiles.
//!
//! Pipeline: parse, eligibility filter, infer spec, drop duplicate hashes,
//! cluster by spec, pick one representative per cluster, normalize, cap the
//! token length, and split 80/10/10.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{infer_spec, split_image_reference, InferenceError};
use crate::spec::DockerSpec;
use crate::syntax::{
    parse_dockerfile, render_statements, DockerfileDocument, Instruction, InstructionKind,
    ShellStatement,
};
use crate::wordlists::WordLists;

pub const DEFAULT_MAX_TOKENS: usize = 1024;
pub const DEFAULT_SEED: u64 = 42;
/// Marker that terminates every instruction in normalized text.
pub const LINE_MARKER: &str = "<nl>";

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub spec: DockerSpec,
    pub dockerfile: DockerfileDocument,
    pub source: String,
}

impl CorpusEntry {
    pub fn content_hash(&self) -> &str {
        &self.dockerfile.content_hash
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecCluster {
    pub spec: DockerSpec,
    pub members: Vec<CorpusEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterReason {
    NoComments,
    MultiStage,
    MalformedFrom,
    UnknownFromWord,
    ShellSyntaxError,
    EmptyArguments,
}

impl FilterReason {
    pub fn code(self) -> &'static str {
        match self {
            FilterReason::NoComments => "no-comments",
            FilterReason::MultiStage => "multi-stage",
            FilterReason::MalformedFrom => "malformed-from",
            FilterReason::UnknownFromWord => "unknown-from-word",
            FilterReason::ShellSyntaxError => "shell-syntax-error",
            FilterReason::EmptyArguments => "empty-arguments",
        }
    }
}

impl fmt::Display for FilterReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterPolicy {
    /// Reject Dockerfiles whose base image contains a keyword missing from
    /// every word list.
    pub reject_unknown_from_words: bool,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        Self {
            reject_unknown_from_words: true,
        }
    }
}

fn is_unclassified_ok(word: &str) -> bool {
    word.chars().count() < 3 || !word.chars().any(|c| c.is_alphabetic())
}

/// `Ok(())` if the document may enter the corpus, otherwise the first rule it breaks.
pub fn filter_eligible(
    doc: &DockerfileDocument,
    lists: &WordLists,
    policy: FilterPolicy,
) -> Result<(), FilterReason> {
    if doc.comments.is_empty() {
        return Err(FilterReason::NoComments);
    }
    if doc.stage_count() > 1 {
        return Err(FilterReason::MultiStage);
    }
    if let Some(from) = doc.instructions.iter().find(|i| i.kind == InstructionKind::From) {
        let image =
            split_image_reference(&from.raw_arguments).map_err(|_| FilterReason::MalformedFrom)?;
        if policy.reject_unknown_from_words
            && image
                .name_words
                .iter()
                .chain(image.tag_words.iter())
                .any(|w| !is_unclassified_ok(w) && !lists.is_known(w))
        {
            return Err(FilterReason::UnknownFromWord);
        }
    }
    if doc.run_statements().is_err() {
        return Err(FilterReason::ShellSyntaxError);
    }
    if doc.instructions.iter().any(|i| i.raw_arguments.trim().is_empty()) {
        return Err(FilterReason::EmptyArguments);
    }
    Ok(())
}

/// Keep the first entry per content hash, preserving order.
pub fn dedup(entries: Vec<CorpusEntry>) -> Vec<CorpusEntry> {
    let mut seen = BTreeSet::new();
    entries
        .into_iter()
        .filter(|e| seen.insert(e.content_hash().to_string()))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot compare a {0} instruction with a {1} instruction")]
pub struct KindMismatch(pub InstructionKind, pub InstructionKind);

fn token_set(ins: &Instruction) -> BTreeSet<&str> {
    ins.raw_arguments.split_whitespace().collect()
}

fn jaccard(a: &BTreeSet<&str>, b: &BTreeSet<&str>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Jaccard similarity of the whitespace-token sets of two same-kind instructions.
pub fn instruction_jaccard(a: &Instruction, b: &Instruction) -> Result<f64, KindMismatch> {
    if a.kind != b.kind {
        return Err(KindMismatch(a.kind, b.kind));
    }
    Ok(jaccard(&token_set(a), &token_set(b)))
}

/// Mean over `a`'s instructions of the mean (over other members) of the best
/// same-kind Jaccard match, with 0 where a member has no instruction of that kind.
fn typicality(
    a: usize,
    tokens: &[Vec<(InstructionKind, BTreeSet<&str>)>],
) -> f64 {
    let own = &tokens[a];
    if own.is_empty() || tokens.len() < 2 {
        return 0.0;
    }
    let others = tokens.len() - 1;
    let mut total = 0.0;
    for (kind, set) in own {
        let mut sum = 0.0;
        for (j, other) in tokens.iter().enumerate() {
            if j == a {
                continue;
            }
            let best = other
                .iter()
                .filter(|(k, _)| k == kind)
                .map(|(_, s)| jaccard(set, s))
                .fold(0.0, f64::max);
            sum += best;
        }
        total += sum / others as f64;
    }
    total / own.len() as f64
}

/// The most typical member of a cluster.
///
/// Ties go to the member with fewer instructions, then the smaller hash.
pub fn select_representative(cluster: &SpecCluster) -> &CorpusEntry {
    assert!(!cluster.members.is_empty(), "cluster has no members");
    if cluster.members.len() == 1 {
        return &cluster.members[0];
    }
    // canonical order so float accumulation never depends on input order
    let mut order: Vec<usize> = (0..cluster.members.len()).collect();
    order.sort_by(|&x, &y| {
        cluster.members[x]
            .content_hash()
            .cmp(cluster.members[y].content_hash())
    });
    let tokens: Vec<Vec<(InstructionKind, BTreeSet<&str>)>> = order
        .iter()
        .map(|&i| {
            cluster.members[i]
                .dockerfile
                .instructions
                .iter()
                .map(|ins| (ins.kind, token_set(ins)))
                .collect()
        })
        .collect();
    let scores: Vec<f64> = (0..tokens.len()).map(|i| typicality(i, &tokens)).collect();

    let best = (0..order.len())
        .max_by(|&x, &y| {
            let mx = &cluster.members[order[x]];
            let my = &cluster.members[order[y]];
            scores[x]
                .total_cmp(&scores[y])
                .then_with(|| {
                    my.dockerfile
                        .instructions
                        .len()
                        .cmp(&mx.dockerfile.instructions.len())
                })
                .then_with(|| my.content_hash().cmp(mx.content_hash()))
        })
        .expect("non-empty");
    &cluster.members[order[best]]
}

fn is_install(stmt: &ShellStatement) -> Option<usize> {
    let program = stmt.program()?;
    let words = stmt.effective_words();
    let sub = words
        .iter()
        .skip(1)
        .position(|w| !w.is_flag())
        .map(|p| p + 1)?;
    let verb = words[sub].value.as_str();
    let ok = matches!(
        (program.as_str(), verb),
        ("apt" | "apt-get" | "yum" | "pip" | "pip2" | "pip3" | "npm", "install")
            | ("apk", "add")
            | ("npm", "i")
    );
    // index of the verb in the full word list (command + arguments)
    let offset = stmt.arguments.len() + 1 - words.len();
    ok.then_some(offset + sub)
}

/// Sort the package arguments of install statements; flags keep their
/// relative order and move ahead of the packages.
fn sort_install_packages(stmt: &mut ShellStatement) {
    let Some(verb) = is_install(stmt) else {
        return;
    };
    // arguments index of the first word after the verb
    let start = verb;
    if start > stmt.arguments.len() {
        return;
    }
    let mut tail = stmt.arguments.split_off(start);
    let end = tail.iter().position(|w| w.is_redirection()).unwrap_or(tail.len());
    let mut redirections = tail.split_off(end);
    let (mut flags, mut packages): (Vec<_>, Vec<_>) = tail.into_iter().partition(|w| w.is_flag());
    packages.sort_by(|a, b| a.raw.cmp(&b.raw));
    stmt.arguments.append(&mut flags);
    stmt.arguments.append(&mut packages);
    stmt.arguments.append(&mut redirections);
}

/// Single-line training form: comments dropped, install packages sorted,
/// each instruction terminated by [`LINE_MARKER`].
pub fn normalize_for_training(doc: &DockerfileDocument) -> String {
    let mut parts = Vec::with_capacity(doc.instructions.len());
    for ins in &doc.instructions {
        let args = if ins.kind == InstructionKind::Run && ins.exec_form().is_none() {
            match ins.shell_statements() {
                Ok(mut statements) => {
                    statements.iter_mut().for_each(sort_install_packages);
                    render_statements(&statements)
                }
                Err(_) => collapse_whitespace(&ins.raw_arguments),
            }
        } else {
            collapse_whitespace(&ins.raw_arguments)
        };
        let mut line = String::from(ins.kind.keyword());
        if !args.is_empty() {
            line.push(' ');
            line.push_str(&args);
        }
        line.push(' ');
        line.push_str(LINE_MARKER);
        parts.push(line);
    }
    parts.join(" ")
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Turn normalized text back into a regular multi-line Dockerfile.
pub fn denormalize(text: &str) -> String {
    let mut out = String::new();
    for line in text.split(LINE_MARKER) {
        let line = line.trim();
        if !line.is_empty() {
            out.push_str(line);
            out.push('\n');
        }
    }
    out
}

pub fn token_length(text: &str) -> usize {
    text.split_whitespace().count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Eval,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit<T> {
    pub train: Vec<T>,
    pub eval: Vec<T>,
    pub test: Vec<T>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("need at least 10 entries to split, got {0}")]
pub struct TooFewEntries(pub usize);

/// Seeded shuffle, then 80% train, 10% eval, 10% test.
pub fn split_dataset<T>(entries: Vec<T>, seed: u64) -> Result<DatasetSplit<T>, TooFewEntries> {
    let n = entries.len();
    if n < 10 {
        return Err(TooFewEntries(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = entries;
    shuffled.shuffle(&mut rng);
    let n_train = (n as f64 * 0.8).round() as usize;
    let n_eval = (n as f64 * 0.1).round() as usize;
    let test = shuffled.split_off(n_train + n_eval);
    let eval = shuffled.split_off(n_train);
    Ok(DatasetSplit {
        train: shuffled,
        eval,
        test,
        seed,
    })
}

/// One line of the corpus JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub spec: DockerSpec,
    pub dockerfile: String,
    pub sha1: String,
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusConfig {
    pub seed: u64,
    pub max_tokens: usize,
    pub policy: FilterPolicy,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            max_tokens: DEFAULT_MAX_TOKENS,
            policy: FilterPolicy::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub files: usize,
    pub parse_errors: usize,
    pub rejected: BTreeMap<String, usize>,
    pub inference_incomplete: usize,
    pub eligible: usize,
    pub duplicates: usize,
    pub unique_specs: usize,
    pub pretrain: usize,
    pub empty_dependencies: usize,
    pub over_token_limit: usize,
    pub finetune: usize,
    pub train: usize,
    pub eval: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusBuild {
    /// Representatives, normalized and tagged with their split.
    pub records: Vec<CorpusRecord>,
    /// Non-representative cluster members and empty-dependency entries.
    pub pretrain: Vec<CorpusRecord>,
    pub stats: CorpusStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("no eligible Dockerfiles")]
    NoEligible,
    #[error(transparent)]
    TooFew(#[from] TooFewEntries),
}

enum Ingested {
    ParseError,
    Rejected(FilterReason),
    Incomplete,
    Entry(Box<CorpusEntry>),
}

fn ingest(source: &str, text: &str, lists: &WordLists, policy: FilterPolicy) -> Ingested {
    let Ok(doc) = parse_dockerfile(text) else {
        return Ingested::ParseError;
    };
    if let Err(reason) = filter_eligible(&doc, lists, policy) {
        return Ingested::Rejected(reason);
    }
    match infer_spec(&doc, lists) {
        Ok(spec) => Ingested::Entry(Box::new(CorpusEntry {
            spec,
            dockerfile: doc,
            source: source.to_string(),
        })),
        Err(InferenceError::Shell(_)) => Ingested::Rejected(FilterReason::ShellSyntaxError),
        Err(InferenceError::Incomplete(_)) => Ingested::Incomplete,
    }
}

fn record(entry: &CorpusEntry, split: Option<Split>) -> CorpusRecord {
    CorpusRecord {
        spec: entry.spec.clone(),
        dockerfile: normalize_for_training(&entry.dockerfile),
        sha1: entry.content_hash().to_string(),
        source: entry.source.clone(),
        split,
    }
}

/// Ingest and infer in parallel; reduce into stats and entries in input order.
pub fn ingest_all(
    inputs: &[(String, String)],
    lists: &WordLists,
    policy: FilterPolicy,
) -> (Vec<CorpusEntry>, CorpusStats) {
    let ingested: Vec<Ingested> = inputs
        .par_iter()
        .map(|(source, text)| ingest(source, text, lists, policy))
        .collect();
    let mut stats = CorpusStats {
        files: inputs.len(),
        ..CorpusStats::default()
    };
    let mut entries = Vec::new();
    for item in ingested {
        match item {
            Ingested::ParseError => stats.parse_errors += 1,
            Ingested::Rejected(r) => *stats.rejected.entry(r.code().to_string()).or_default() += 1,
            Ingested::Incomplete => stats.inference_incomplete += 1,
            Ingested::Entry(e) => entries.push(*e),
        }
    }
    stats.eligible = entries.len();
    (entries, stats)
}

/// Run the whole pipeline over `(source, text)` pairs.
pub fn build_corpus(
    inputs: &[(String, String)],
    lists: &WordLists,
    config: CorpusConfig,
) -> Result<CorpusBuild, CorpusError> {
    let (entries, mut stats) = ingest_all(inputs, lists, config.policy);
    if entries.is_empty() {
        return Err(CorpusError::NoEligible);
    }
    let before = entries.len();
    let entries = dedup(entries);
    stats.duplicates = before - entries.len();

    let mut clusters: BTreeMap<DockerSpec, Vec<CorpusEntry>> = BTreeMap::new();
    for e in entries {
        clusters.entry(e.spec.clone()).or_default().push(e);
    }
    stats.unique_specs = clusters.len();

    let mut pretrain = Vec::new();
    let mut finetune = Vec::new();
    for (spec, members) in clusters {
        let cluster = SpecCluster { spec, members };
        let rep = select_representative(&cluster);
        for m in &cluster.members {
            if m.content_hash() != rep.content_hash() {
                pretrain.push(record(m, None));
            }
        }
        if cluster.spec.dependencies.is_empty() {
            stats.empty_dependencies += 1;
            pretrain.push(record(rep, None));
        } else {
            finetune.push(record(rep, None));
        }
    }
    stats.pretrain = pretrain.len();

    let before = finetune.len();
    finetune.retain(|r| token_length(&r.dockerfile) <= config.max_tokens);
    stats.over_token_limit = before - finetune.len();
    stats.finetune = finetune.len();
    if finetune.is_empty() {
        return Err(CorpusError::NoEligible);
    }

    let split = split_dataset(finetune, config.seed)?;
    stats.train = split.train.len();
    stats.eval = split.eval.len();
    stats.test = split.test.len();
    let mut records = Vec::with_capacity(stats.finetune);
    for (part, tag) in [
        (split.train, Split::Train),
        (split.eval, Split::Eval),
        (split.test, Split::Test),
    ] {
        records.extend(part.into_iter().map(|mut r| {
            r.split = Some(tag);
            r
        }));
    }
    Ok(CorpusBuild {
        records,
        pretrain,
        stats,
    })
}
