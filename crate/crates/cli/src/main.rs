mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use walkdir::WalkDir;

use config::FileConfig;
use dockspec_core::corpus::{
    build_corpus, denormalize, ingest_all, CorpusConfig, CorpusError, CorpusRecord, FilterPolicy,
    Split, DEFAULT_MAX_TOKENS, DEFAULT_SEED,
};
use dockspec_core::evaluation::{
    compare_manifests, evaluate_run, parse_manifest, NamedFile, SystemOutputs,
};
use dockspec_core::inference::InferenceError;
use dockspec_core::retrieval::{vector_retrieve, Bm25Params, RetrievalIndex, VectorIndex};
use dockspec_core::spec::{deserialize_spec, serialize_spec};
use dockspec_core::{build_ast, infer_spec, parse_dockerfile, WordLists};

const EXIT_INPUT: u8 = 1;
const EXIT_INCOMPLETE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// Infer specs from Dockerfiles, build a spec/Dockerfile corpus, retrieve
/// Dockerfiles for a spec and evaluate generated Dockerfiles.
#[derive(Debug, Parser)]
#[command(name = "dockspec", version)]
struct Cli {
    /// TOML file with defaults for any of the global or command options.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every random choice (default 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replace the builtin OS word list.
    #[arg(long, global = true, value_name = "FILE")]
    os_words: Option<PathBuf>,
    /// Replace the builtin stop word list.
    #[arg(long, global = true, value_name = "FILE")]
    stop_words: Option<PathBuf>,
    /// Replace the builtin list of known dependency words.
    #[arg(long, global = true, value_name = "FILE")]
    dep_words: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the AST of a Dockerfile.
    Parse {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = AstFormat::Text)]
        format: AstFormat,
    },
    /// Print the inferred spec of a Dockerfile as JSON.
    InferSpec { file: PathBuf },
    /// Build or inspect a corpus.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Build a retrieval index.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Retrieve the best matching Dockerfile for a spec.
    Generate(GenerateArgs),
    /// Score generated Dockerfiles against targets.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AstFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
enum CorpusCommand {
    /// Run the corpus pipeline over a directory of Dockerfiles.
    Build {
        dir: PathBuf,
        /// Output JSONL; non-representatives go to `<stem>.pretrain.jsonl` next to it.
        #[arg(long)]
        out: PathBuf,
        /// Drop normalized Dockerfiles longer than this many tokens (default 1024).
        #[arg(long)]
        max_tokens: Option<usize>,
        /// Keep Dockerfiles whose base image has unclassified keywords.
        #[arg(long)]
        lenient_from: bool,
    },
    /// Count files per filter outcome without writing a corpus.
    Stats {
        dir: PathBuf,
        /// Keep Dockerfiles whose base image has unclassified keywords.
        #[arg(long)]
        lenient_from: bool,
    },
}

#[derive(Debug, Subcommand)]
enum IndexCommand {
    /// Index a corpus JSONL file.
    Build {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// BM25 term saturation (default 1.2).
        #[arg(long)]
        k1: Option<f64>,
        /// BM25 length normalization (default 0.75).
        #[arg(long)]
        b: Option<f64>,
        /// Only index records of this split.
        #[arg(long, value_enum)]
        split: Option<SplitArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Eval,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Eval => Split::Eval,
            SplitArg::Test => Split::Test,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Bm25,
    Vector,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HitFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Spec JSON file.
    #[arg(long)]
    spec: PathBuf,
    /// Index written by `index build`.
    #[arg(long)]
    index: PathBuf,
    /// Number of Dockerfiles to return (default 1).
    #[arg(short, long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Bm25)]
    method: Method,
    #[arg(long, value_enum, default_value_t = HitFormat::Text)]
    format: HitFormat,
}

#[derive(Debug, Args)]
#[command(args_conflicts_with_subcommands = true)]
struct EvaluateArgs {
    #[command(subcommand)]
    layers: Option<EvaluateCommand>,
    /// Directory of target Dockerfiles.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Directory of outputs, as DIR or NAME=DIR; repeat to compare systems.
    #[arg(long)]
    outputs: Vec<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum EvaluateCommand {
    /// Compare two layer manifests.
    Layers {
        /// Layer manifest of the original image.
        #[arg(long)]
        original: PathBuf,
        /// Layer manifest of the generated image.
        #[arg(long)]
        generated: PathBuf,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }

    fn config(error: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_CONFIG,
            error: error.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

/// Effective settings after merging the config file under the flags.
struct Settings {
    seed: u64,
    lists: WordLists,
    file: FileConfig,
}

fn require_file(path: &Path) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::config(anyhow!("{}: no such file", path.display())))
    }
}

fn require_dir(path: &Path) -> Result<(), Failure> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Failure::config(anyhow!("{}: no such directory", path.display())))
    }
}

fn require_parent(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => Err(Failure::config(anyhow!(
            "{}: output directory does not exist",
            p.display()
        ))),
        _ => Ok(()),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| path.display().to_string())
        .map_err(Failure::input)
}

fn settings(cli: &Cli) -> Result<Settings, Failure> {
    let file = match &cli.config {
        Some(path) => {
            require_file(path)?;
            FileConfig::load(path)
                .with_context(|| format!("{}: invalid config", path.display()))
                .map_err(Failure::config)?
        }
        None => FileConfig::default(),
    };
    let os = cli.os_words.clone().or_else(|| file.os_words.clone());
    let stop = cli.stop_words.clone().or_else(|| file.stop_words.clone());
    let dep = cli.dep_words.clone().or_else(|| file.dep_words.clone());
    for p in [&os, &stop, &dep].into_iter().flatten() {
        require_file(p)?;
    }
    let lists = WordLists::load(os.as_deref(), stop.as_deref(), dep.as_deref())
        .map_err(Failure::config)?;
    if let Some(jobs) = cli.jobs.or(file.jobs) {
        if jobs == 0 {
            return Err(Failure::config(anyhow!("--jobs must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(Failure::config)?;
    }
    Ok(Settings {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        lists,
        file,
    })
}

fn emit(text: &str) -> Outcome {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(Failure::input)
}

fn emit_json<T: serde::Serialize>(value: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::input)?;
    text.push('\n');
    emit(&text)
}

/// Regular, non-hidden files under `dir` as (relative path, text), sorted.
fn read_tree(dir: &Path) -> Result<(Vec<(String, String)>, usize), Failure> {
    let mut files = Vec::new();
    let mut unreadable = 0;
    let walker = WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    for entry in walker {
        let entry = entry.map_err(Failure::input)?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(dir)
            .unwrap_or(entry.path())
            .to_string_lossy()
            .replace('\\', "/");
        match fs::read_to_string(entry.path()) {
            Ok(text) => files.push((rel, text)),
            Err(e) => {
                eprintln!("warning: skipping {rel}: {e}");
                unreadable += 1;
            }
        }
    }
    Ok((files, unreadable))
}

fn cmd_parse(file: &Path, format: AstFormat) -> Outcome {
    require_file(file)?;
    let doc = parse_dockerfile(&read_text(file)?).map_err(Failure::input)?;
    let ast = build_ast(&doc).map_err(Failure::input)?;
    match format {
        AstFormat::Text => emit(&ast.to_indented_text()),
        AstFormat::Json => {
            let mut text = serde_json::to_string(&ast.root).map_err(Failure::input)?;
            text.push('\n');
            emit(&text)
        }
    }
}

fn cmd_infer(file: &Path, s: &Settings) -> Outcome {
    require_file(file)?;
    let doc = parse_dockerfile(&read_text(file)?).map_err(Failure::input)?;
    match infer_spec(&doc, &s.lists) {
        Ok(spec) => emit(&serialize_spec(&spec)),
        Err(e @ InferenceError::Incomplete(_)) => Err(Failure {
            code: EXIT_INCOMPLETE,
            error: e.into(),
        }),
        Err(e) => Err(Failure::input(e)),
    }
}

fn policy(lenient: bool, s: &Settings) -> FilterPolicy {
    FilterPolicy {
        reject_unknown_from_words: !(lenient || s.file.lenient_from.unwrap_or(false)),
    }
}

fn write_jsonl(path: &Path, records: &[CorpusRecord]) -> Outcome {
    let mut text = String::new();
    for r in records {
        text.push_str(&serde_json::to_string(r).map_err(Failure::input)?);
        text.push('\n');
    }
    fs::write(path, text)
        .with_context(|| path.display().to_string())
        .map_err(Failure::input)
}

fn pretrain_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".into());
    out.with_file_name(format!("{stem}.pretrain.jsonl"))
}

fn cmd_corpus(cmd: &CorpusCommand, s: &Settings) -> Outcome {
    match cmd {
        CorpusCommand::Build {
            dir,
            out,
            max_tokens,
            lenient_from,
        } => {
            require_dir(dir)?;
            require_parent(out)?;
            let config = CorpusConfig {
                seed: s.seed,
                max_tokens: max_tokens
                    .or(s.file.max_tokens)
                    .unwrap_or(DEFAULT_MAX_TOKENS),
                policy: policy(*lenient_from, s),
            };
            let (inputs, unreadable) = read_tree(dir)?;
            let mut build = match build_corpus(&inputs, &s.lists, config) {
                Ok(b) => b,
                Err(CorpusError::NoEligible) => {
                    return Err(Failure::input(anyhow!("no eligible Dockerfiles")))
                }
                Err(e) => return Err(Failure::input(e)),
            };
            build.stats.files += unreadable;
            build.stats.parse_errors += unreadable;
            write_jsonl(out, &build.records)?;
            write_jsonl(&pretrain_path(out), &build.pretrain)?;
            emit_json(&build.stats)
        }
        CorpusCommand::Stats { dir, lenient_from } => {
            require_dir(dir)?;
            let (inputs, unreadable) = read_tree(dir)?;
            let config = CorpusConfig {
                seed: s.seed,
                max_tokens: s.file.max_tokens.unwrap_or(DEFAULT_MAX_TOKENS),
                policy: policy(*lenient_from, s),
            };
            // later stages only run when enough entries survive ingestion
            let mut stats = match build_corpus(&inputs, &s.lists, config) {
                Ok(build) => build.stats,
                Err(_) => ingest_all(&inputs, &s.lists, config.policy).1,
            };
            stats.files += unreadable;
            stats.parse_errors += unreadable;
            emit_json(&stats)
        }
    }
}

fn read_corpus(path: &Path, split: Option<Split>) -> Result<Vec<CorpusRecord>, Failure> {
    let text = read_text(path)?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r: CorpusRecord = serde_json::from_str(line)
            .with_context(|| format!("{}:{}", path.display(), i + 1))
            .map_err(Failure::input)?;
        if split.is_none() || r.split == split {
            records.push(r);
        }
    }
    Ok(records)
}

fn cmd_index(cmd: &IndexCommand, s: &Settings) -> Outcome {
    let IndexCommand::Build {
        corpus,
        out,
        k1,
        b,
        split,
    } = cmd;
    require_file(corpus)?;
    require_parent(out)?;
    let defaults = Bm25Params::default();
    let params = Bm25Params {
        k1: k1.or(s.file.k1).unwrap_or(defaults.k1),
        b: b.or(s.file.b).unwrap_or(defaults.b),
    };
    if !(params.k1 >= 0.0 && (0.0..=1.0).contains(&params.b)) {
        return Err(Failure::config(anyhow!("need k1 >= 0 and 0 <= b <= 1")));
    }
    let records = read_corpus(corpus, split.map(Split::from))?;
    let index = RetrievalIndex::build(records.into_iter().map(|r| (r.spec, r.dockerfile)), params)
        .map_err(Failure::input)?;
    index
        .save(out)
        .with_context(|| out.display().to_string())
        .map_err(Failure::input)?;
    eprintln!("indexed {} documents", index.len());
    Ok(())
}

fn cmd_generate(args: &GenerateArgs, s: &Settings) -> Outcome {
    require_file(&args.spec)?;
    require_file(&args.index)?;
    let k = args.k.or(s.file.k).unwrap_or(1);
    if k == 0 {
        return Err(Failure::config(anyhow!("k must be at least 1")));
    }
    let spec = deserialize_spec(&read_text(&args.spec)?)
        .with_context(|| args.spec.display().to_string())
        .map_err(Failure::input)?;
    let index = RetrievalIndex::load(&args.index)
        .with_context(|| args.index.display().to_string())
        .map_err(Failure::input)?;
    let hits = match args.method {
        Method::Bm25 => index.retrieve(&spec, k),
        Method::Vector => {
            let vectors = VectorIndex::build(
                index
                    .documents
                    .iter()
                    .map(|d| (d.spec.clone(), d.dockerfile_text.clone())),
            )
            .map_err(Failure::input)?;
            vector_retrieve(&spec, k, &vectors)
        }
    };
    match args.format {
        HitFormat::Json => emit_json(&hits),
        HitFormat::Text => {
            let mut text = String::new();
            for (rank, hit) in hits.iter().enumerate() {
                if hits.len() > 1 {
                    text.push_str(&format!(
                        "# rank {} doc {} score {:.6}\n",
                        rank + 1,
                        hit.doc_id,
                        hit.score
                    ));
                }
                text.push_str(&denormalize(&hit.dockerfile));
            }
            emit(&text)
        }
    }
}

fn named_files(dir: &Path) -> Result<Vec<NamedFile>, Failure> {
    let (files, _) = read_tree(dir)?;
    Ok(files
        .into_iter()
        .map(|(name, text)| NamedFile::new(name, text))
        .collect())
}

fn cmd_evaluate(args: &EvaluateArgs, s: &Settings) -> Outcome {
    if let Some(EvaluateCommand::Layers {
        original,
        generated,
    }) = &args.layers
    {
        require_file(original)?;
        require_file(generated)?;
        let a = parse_manifest(&read_text(original)?)
            .with_context(|| original.display().to_string())
            .map_err(Failure::input)?;
        let b = parse_manifest(&read_text(generated)?)
            .with_context(|| generated.display().to_string())
            .map_err(Failure::input)?;
        let report = compare_manifests(&a, &b).map_err(Failure::input)?;
        return emit_json(&report);
    }
    let targets = args
        .targets
        .as_ref()
        .ok_or_else(|| Failure::config(anyhow!("--targets is required")))?;
    if args.outputs.is_empty() {
        return Err(Failure::config(anyhow!("at least one --outputs is required")));
    }
    require_dir(targets)?;
    if let Some(r) = &args.report {
        require_parent(r)?;
    }
    let mut systems = Vec::new();
    for spec in &args.outputs {
        let (name, dir) = match spec.split_once('=') {
            Some((n, d)) if !n.is_empty() => (n.to_string(), PathBuf::from(d)),
            _ => {
                let dir = PathBuf::from(spec);
                let name = dir
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| spec.clone());
                (name, dir)
            }
        };
        require_dir(&dir)?;
        systems.push((name, dir));
    }
    let targets = named_files(targets)?;
    let systems = systems
        .into_iter()
        .map(|(system, dir)| {
            Ok(SystemOutputs {
                system,
                files: named_files(&dir)?,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let report = evaluate_run(&targets, &systems, &s.lists).map_err(Failure::input)?;
    for sys in &report.systems {
        for f in &sys.failures {
            eprintln!("warning: {}: {}: {}", sys.system, f.name, f.reason);
        }
    }
    match &args.report {
        Some(path) => {
            let mut text = serde_json::to_string_pretty(&report).map_err(Failure::input)?;
            text.push('\n');
            fs::write(path, text)
                .with_context(|| path.display().to_string())
                .map_err(Failure::input)
        }
        None => emit_json(&report),
    }
}

fn run(cli: Cli) -> Outcome {
    let s = settings(&cli)?;
    match &cli.command {
        Command::Parse { file, format } => cmd_parse(file, *format),
        Command::InferSpec { file } => cmd_infer(file, &s),
        Command::Corpus(cmd) => cmd_corpus(cmd, &s),
        Command::Index(cmd) => cmd_index(cmd, &s),
        Command::Generate(args) => cmd_generate(args, &s),
        Command::Evaluate(args) => cmd_evaluate(args, &s),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
