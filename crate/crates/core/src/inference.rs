//! Inferring a [`DockerSpec`] from an existing Dockerfile.
//!
//! The OS comes from the base image reference. Dependencies come from two
//! places: words of the base image name, and words named in `install`
//! comments that are confirmed by an install/download command in the `RUN`
//! instructions directly below the comment. The remaining fields are read off
//! instruction kinds and the shell statements.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::spec::{DockerSpec, PackageManager, ANY_OS};
use crate::syntax::{
    CommentLine, DockerfileDocument, InstructionKind, ShellStatement, ShellSyntaxError, Word,
};
use crate::wordlists::WordLists;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Shell(#[from] ShellSyntaxError),
    #[error("inference incomplete: {0}")]
    Incomplete(Incomplete),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Incomplete {
    #[error("no FROM instruction")]
    MissingFrom,
    #[error("multi-stage Dockerfiles are not supported")]
    MultiStage,
    #[error("malformed FROM instruction `{0}`")]
    MalformedFrom(String),
}

/// A base image reference split into keywords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageReference {
    /// Image path without tag or digest, e.g. `docker.io/library/debian`.
    pub name: String,
    pub tag: Option<String>,
    pub name_words: Vec<String>,
    pub tag_words: Vec<String>,
}

fn split_words(text: &str) -> Vec<String> {
    text.split(['-', '_'])
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Parse the argument text of a `FROM` instruction.
pub fn split_image_reference(from_args: &str) -> Result<ImageReference, Incomplete> {
    let malformed = || Incomplete::MalformedFrom(from_args.to_string());
    let image = from_args
        .split_whitespace()
        .find(|t| !t.starts_with("--"))
        .ok_or_else(malformed)?;
    let image = image.split('@').next().unwrap_or(image);
    let last_slash = image.rfind('/').map_or(0, |i| i + 1);
    let (name, tag) = match image[last_slash..].rfind(':') {
        Some(i) => {
            let at = last_slash + i;
            let tag = &image[at + 1..];
            (&image[..at], (!tag.is_empty()).then(|| tag.to_string()))
        }
        None => (image, None),
    };
    let last_segment = name.rsplit('/').next().unwrap_or(name);
    let name_words = split_words(last_segment);
    if name_words.is_empty() {
        return Err(malformed());
    }
    let tag_words = tag.as_deref().map(split_words).unwrap_or_default();
    let tag = tag.filter(|_| !tag_words.is_empty());
    Ok(ImageReference {
        name: name.to_string(),
        tag,
        name_words,
        tag_words,
    })
}

fn is_version_word(word: &str) -> bool {
    !word.is_empty()
        && word.chars().all(|c| c.is_ascii_digit() || c == '.')
        && word.chars().any(|c| c.is_ascii_digit())
}

/// First OS keyword in tag words, then name words; `"any"` if none.
/// An OS found in the image name gets the numeric tag words appended
/// (`debian:10-slim` -> `debian10`).
pub fn infer_os(image: &ImageReference, lists: &WordLists) -> String {
    if let Some(w) = image.tag_words.iter().find(|w| lists.is_os(w)) {
        return w.clone();
    }
    if let Some(w) = image.name_words.iter().find(|w| lists.is_os(w)) {
        let mut os = w.clone();
        for t in image.tag_words.iter().filter(|t| is_version_word(t)) {
            os.extend(t.chars().filter(|c| *c != '.'));
        }
        return os;
    }
    ANY_OS.to_string()
}

fn is_alphabetic_leading(word: &str) -> bool {
    word.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
}

/// Image-name words that are neither OS nor stop words.
pub fn infer_from_dependencies(image: &ImageReference, lists: &WordLists) -> BTreeSet<String> {
    image
        .name_words
        .iter()
        .filter(|w| !lists.is_os(w) && !lists.is_stop(w) && is_alphabetic_leading(w))
        .cloned()
        .collect()
}

/// Candidate dependencies named after the word "install" in a comment.
pub fn extract_comment_candidates(comment: &CommentLine, lists: &WordLists) -> Vec<String> {
    let tokens: Vec<String> = comment
        .text
        .split_whitespace()
        .map(|t| {
            t.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .collect();
    let Some(pos) = tokens.iter().position(|t| t.starts_with("install")) else {
        return Vec::new();
    };
    let mut out: Vec<String> = Vec::new();
    for t in &tokens[pos + 1..] {
        if t.is_empty()
            || !is_alphabetic_leading(t)
            || lists.is_stop(t)
            || lists.is_os(t)
            || out.contains(t)
        {
            continue;
        }
        out.push(t.clone());
    }
    out
}

fn is_url(word: &str) -> bool {
    word.contains("://") || word.starts_with("git@")
}

fn is_vcs_reference(word: &str) -> bool {
    is_url(word)
        || ["git+", "hg+", "svn+", "bzr+", "github:", "gitlab:", "bitbucket:"]
            .iter()
            .any(|p| word.starts_with(p))
}

fn url_last_segment(url: &str) -> Option<String> {
    let url = url.split(['?', '#']).next().unwrap_or(url);
    let seg = url.trim_end_matches('/').rsplit(['/', ':']).next()?;
    (!seg.is_empty()).then(|| seg.to_lowercase())
}

fn push_with_words(set: &mut BTreeSet<String>, item: &str) {
    let item = item.to_lowercase();
    for w in item.split(['-', '_', '.', '=', '<', '>', '~', '^', '@']) {
        if !w.is_empty() {
            set.insert(w.to_string());
        }
    }
    set.insert(item);
}

fn push_url(set: &mut BTreeSet<String>, url: &str) {
    if let Some(seg) = url_last_segment(url) {
        push_with_words(set, &seg);
    }
}

/// Flags whose next word is their value, per tool.
fn value_flags(program: &str) -> &'static [&'static str] {
    match program {
        "apt" | "apt-get" => &["-o", "-t", "--target-release"],
        "pip" | "pip2" | "pip3" => &[
            "-r",
            "--requirement",
            "-c",
            "--constraint",
            "-i",
            "--index-url",
            "--extra-index-url",
            "-f",
            "--find-links",
            "-t",
            "--target",
        ],
        "npm" => &["--prefix", "--registry"],
        "curl" => &["-o", "--output", "-H", "--header", "-u", "--user", "-d", "--data"],
        "wget" => &["-O", "--output-document", "-P", "--directory-prefix"],
        "git" => &["-b", "--branch", "--depth", "-c", "--config"],
        _ => &[],
    }
}

/// Positional arguments (flags and their values removed).
fn positionals<'a>(program: &str, args: &[&'a Word]) -> Vec<&'a Word> {
    let takes_value = value_flags(program);
    let mut out = Vec::new();
    let mut skip = false;
    for w in args {
        if skip {
            skip = false;
            continue;
        }
        if w.is_flag() {
            skip = takes_value.contains(&w.value.as_str());
            continue;
        }
        out.push(*w);
    }
    out
}

/// What an install or download statement does, if anything.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Action<'a> {
    /// Package manager install: manager family and package arguments.
    Install {
        manager: Option<PackageManager>,
        packages: Vec<&'a Word>,
    },
    /// Download tool with its URL arguments.
    Download { urls: Vec<&'a Word> },
    /// Low-level package tool working on a local file (`dpkg -i x.deb`).
    LocalPackage,
}

fn classify(stmt: &ShellStatement) -> Option<Action<'_>> {
    let words = stmt.effective_words();
    let (first, rest) = words.split_first()?;
    let program = stmt.program()?;

    // a bare URL in command position: the clone target split off by a stray connector
    if is_url(&first.value) {
        return Some(Action::Download { urls: vec![*first] });
    }

    let pos = positionals(&program, rest);
    let sub = pos.first().map(|w| w.value.as_str());
    let after_sub = || pos.iter().skip(1).copied().collect::<Vec<_>>();

    match (program.as_str(), sub) {
        ("apt" | "apt-get", Some("install")) => Some(Action::Install {
            manager: Some(PackageManager::Apt),
            packages: after_sub(),
        }),
        ("yum", Some("install")) => Some(Action::Install {
            manager: Some(PackageManager::Yum),
            packages: after_sub(),
        }),
        ("apk", Some("add")) => Some(Action::Install {
            manager: Some(PackageManager::Apk),
            packages: after_sub(),
        }),
        ("pip" | "pip2" | "pip3", Some("install")) | ("npm", Some("install" | "i")) => {
            Some(Action::Install {
                manager: None,
                packages: after_sub(),
            })
        }
        ("curl" | "wget", _) => Some(Action::Download {
            urls: pos.into_iter().filter(|w| is_url(&w.value)).collect(),
        }),
        ("git" | "hg", Some("clone")) => Some(Action::Download {
            urls: after_sub().into_iter().filter(|w| is_url(&w.value)).collect(),
        }),
        ("dpkg", _) if rest.iter().any(|w| w.value == "-i" || w.value == "--install") => {
            Some(Action::LocalPackage)
        }
        ("rpm", _)
            if rest.iter().any(|w| {
                w.value == "--install"
                    || w.value == "--upgrade"
                    || (w.value.starts_with('-')
                        && !w.value.starts_with("--")
                        && (w.value.contains('i') || w.value.contains('U')))
            }) =>
        {
            Some(Action::LocalPackage)
        }
        _ => None,
    }
}

/// Arguments of install/download statements, plus their component words.
pub fn extract_installable_args(statements: &[ShellStatement]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for stmt in statements {
        match classify(stmt) {
            Some(Action::Install { packages, .. }) => {
                for p in packages {
                    if p.is_variable() {
                        continue;
                    }
                    if is_vcs_reference(&p.value) {
                        push_url(&mut out, &p.value);
                    } else {
                        push_with_words(&mut out, &p.value);
                    }
                }
            }
            Some(Action::Download { urls }) => {
                for u in urls {
                    push_url(&mut out, &u.value);
                }
            }
            Some(Action::LocalPackage) | None => {}
        }
    }
    out
}

/// A comment and the `RUN` statements it describes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommentScope {
    pub comment: CommentLine,
    pub candidate_dependencies: Vec<String>,
    pub run_statements: Vec<ShellStatement>,
}

/// For every comment, the `RUN` instructions starting after it and before the
/// next comment line or blank line.
pub fn comment_scopes(
    doc: &DockerfileDocument,
    lists: &WordLists,
) -> Result<Vec<CommentScope>, ShellSyntaxError> {
    let mut scopes = Vec::with_capacity(doc.comments.len());
    for (i, comment) in doc.comments.iter().enumerate() {
        let next_comment = doc.comments.get(i + 1).map(|c| c.line);
        let next_blank = doc.blank_lines.range(comment.line + 1..).next().copied();
        let end = match (next_comment, next_blank) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => usize::MAX,
        };
        let mut run_statements = Vec::new();
        for ins in &doc.instructions {
            let start = ins.line_span.0;
            if ins.kind == InstructionKind::Run && start > comment.line && start < end {
                run_statements.extend(ins.shell_statements()?);
            }
        }
        scopes.push(CommentScope {
            comment: comment.clone(),
            candidate_dependencies: extract_comment_candidates(comment, lists),
            run_statements,
        });
    }
    Ok(scopes)
}

/// Comment candidates confirmed by an install argument in their scope.
pub fn infer_comment_dependencies(
    doc: &DockerfileDocument,
    lists: &WordLists,
) -> Result<BTreeSet<String>, ShellSyntaxError> {
    let mut deps = BTreeSet::new();
    for scope in comment_scopes(doc, lists)? {
        if scope.candidate_dependencies.is_empty() {
            continue;
        }
        let installed = extract_installable_args(&scope.run_statements);
        deps.extend(
            scope
                .candidate_dependencies
                .into_iter()
                .filter(|c| installed.contains(c)),
        );
    }
    Ok(deps)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InstructionFlags {
    pub uses_env: bool,
    pub uses_arg: bool,
    pub uses_label: bool,
    pub uses_expose: bool,
    pub uses_cmd: bool,
    pub uses_entrypoint: bool,
}

pub fn infer_flags(doc: &DockerfileDocument) -> InstructionFlags {
    InstructionFlags {
        uses_env: doc.has_kind(InstructionKind::Env),
        uses_arg: doc.has_kind(InstructionKind::Arg),
        uses_label: doc.has_kind(InstructionKind::Label),
        uses_expose: doc.has_kind(InstructionKind::Expose),
        uses_cmd: doc.has_kind(InstructionKind::Cmd),
        uses_entrypoint: doc.has_kind(InstructionKind::Entrypoint),
    }
}

/// The single system package manager used for installs, if coherent with `os`.
pub fn infer_pkg_manager(statements: &[ShellStatement], os: &str) -> PackageManager {
    let managers: BTreeSet<PackageManager> = statements
        .iter()
        .filter_map(|s| match classify(s) {
            Some(Action::Install {
                manager: Some(m), ..
            }) => Some(m),
            _ => None,
        })
        .collect();
    match managers.into_iter().collect::<Vec<_>>().as_slice() {
        [m] if m.coherent_with(os) => *m,
        _ => PackageManager::Any,
    }
}

pub fn infer_downloads_external(statements: &[ShellStatement]) -> bool {
    statements.iter().any(|s| match classify(s) {
        Some(Action::Download { urls }) => !urls.is_empty(),
        Some(Action::LocalPackage) => true,
        Some(Action::Install { manager, packages }) => match manager {
            Some(PackageManager::Apk) => packages.iter().any(|p| p.value.ends_with(".apk")),
            Some(PackageManager::Apt) => packages.iter().any(|p| p.value.ends_with(".deb")),
            Some(PackageManager::Yum) => packages.iter().any(|p| p.value.ends_with(".rpm")),
            // pip / npm
            _ => packages.iter().any(|p| is_vcs_reference(&p.value)),
        },
        None => false,
    })
}

fn single_from(doc: &DockerfileDocument) -> Result<ImageReference, Incomplete> {
    let mut froms = doc
        .instructions
        .iter()
        .filter(|i| i.kind == InstructionKind::From);
    let from = froms.next().ok_or(Incomplete::MissingFrom)?;
    if froms.next().is_some() {
        return Err(Incomplete::MultiStage);
    }
    split_image_reference(&from.raw_arguments)
}

struct Common {
    image: ImageReference,
    statements: Vec<ShellStatement>,
    spec: DockerSpec,
}

fn infer_common(doc: &DockerfileDocument, lists: &WordLists) -> Result<Common, InferenceError> {
    let image = single_from(doc).map_err(InferenceError::Incomplete)?;
    let statements = doc.run_statements()?;
    let os = infer_os(&image, lists);
    let flags = infer_flags(doc);
    let spec = DockerSpec {
        pkg_manager: infer_pkg_manager(&statements, &os),
        os,
        dependencies: infer_from_dependencies(&image, lists),
        downloads_external: infer_downloads_external(&statements),
        uses_env: flags.uses_env,
        uses_arg: flags.uses_arg,
        uses_label: flags.uses_label,
        uses_expose: flags.uses_expose,
        uses_cmd: flags.uses_cmd,
        uses_entrypoint: flags.uses_entrypoint,
    };
    Ok(Common {
        image,
        statements,
        spec,
    })
}

/// Infer the full spec of a human-written Dockerfile.
pub fn infer_spec(doc: &DockerfileDocument, lists: &WordLists) -> Result<DockerSpec, InferenceError> {
    let mut common = infer_common(doc, lists)?;
    common
        .spec
        .dependencies
        .extend(infer_comment_dependencies(doc, lists)?);
    Ok(common.spec)
}

/// Infer the spec of a machine-produced Dockerfile, which carries no comments.
///
/// Dependencies of `target` count as present when they occur among the
/// install/download arguments or the `FROM` keywords of the file.
pub fn infer_generated_spec(
    doc: &DockerfileDocument,
    lists: &WordLists,
    target: &DockerSpec,
) -> Result<DockerSpec, InferenceError> {
    let Common {
        image,
        statements,
        mut spec,
    } = infer_common(doc, lists)?;
    let mut present = extract_installable_args(&statements);
    present.extend(image.name_words.iter().cloned());
    present.extend(image.tag_words.iter().cloned());
    spec.dependencies.extend(
        target
            .dependencies
            .iter()
            .filter(|d| present.contains(*d))
            .cloned(),
    );
    Ok(spec)
}
