//! Line-oriented Dockerfile parser.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha1::{Digest, Sha1};
use thiserror::Error;

use super::shell::{parse_shell, ShellStatement, ShellSyntaxError, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum InstructionKind {
    From,
    Run,
    Cmd,
    Entrypoint,
    Copy,
    Add,
    Env,
    Arg,
    Label,
    Expose,
    Workdir,
    User,
    Volume,
    Maintainer,
    Onbuild,
    Shell,
    Stopsignal,
    Healthcheck,
}

impl InstructionKind {
    pub const ALL: [InstructionKind; 18] = [
        InstructionKind::From,
        InstructionKind::Run,
        InstructionKind::Cmd,
        InstructionKind::Entrypoint,
        InstructionKind::Copy,
        InstructionKind::Add,
        InstructionKind::Env,
        InstructionKind::Arg,
        InstructionKind::Label,
        InstructionKind::Expose,
        InstructionKind::Workdir,
        InstructionKind::User,
        InstructionKind::Volume,
        InstructionKind::Maintainer,
        InstructionKind::Onbuild,
        InstructionKind::Shell,
        InstructionKind::Stopsignal,
        InstructionKind::Healthcheck,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            InstructionKind::From => "FROM",
            InstructionKind::Run => "RUN",
            InstructionKind::Cmd => "CMD",
            InstructionKind::Entrypoint => "ENTRYPOINT",
            InstructionKind::Copy => "COPY",
            InstructionKind::Add => "ADD",
            InstructionKind::Env => "ENV",
            InstructionKind::Arg => "ARG",
            InstructionKind::Label => "LABEL",
            InstructionKind::Expose => "EXPOSE",
            InstructionKind::Workdir => "WORKDIR",
            InstructionKind::User => "USER",
            InstructionKind::Volume => "VOLUME",
            InstructionKind::Maintainer => "MAINTAINER",
            InstructionKind::Onbuild => "ONBUILD",
            InstructionKind::Shell => "SHELL",
            InstructionKind::Stopsignal => "STOPSIGNAL",
            InstructionKind::Healthcheck => "HEALTHCHECK",
        }
    }
}

impl fmt::Display for InstructionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for InstructionKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InstructionKind::ALL
            .into_iter()
            .find(|k| k.keyword().eq_ignore_ascii_case(s))
            .ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instruction {
    pub kind: InstructionKind,
    /// Arguments with line continuations joined by single spaces.
    pub raw_arguments: String,
    /// First and last physical line (1-based, inclusive).
    pub line_span: (usize, usize),
}

impl Instruction {
    /// Elements of a JSON exec-form argument list (`["a", "b"]`), if the
    /// arguments are written that way.
    pub fn exec_form(&self) -> Option<Vec<String>> {
        let args = self.raw_arguments.trim();
        if !(args.starts_with('[') && args.ends_with(']')) {
            return None;
        }
        serde_json::from_str::<Vec<String>>(args).ok()
    }

    /// Shell statements of a `RUN` instruction. Exec-form `RUN` yields a single
    /// statement built from the list elements; other kinds yield nothing.
    pub fn shell_statements(&self) -> Result<Vec<ShellStatement>, ShellSyntaxError> {
        if self.kind != InstructionKind::Run {
            return Ok(Vec::new());
        }
        if let Some(elems) = self.exec_form() {
            let mut words = elems.into_iter().map(Word::plain);
            return Ok(match words.next() {
                Some(command) => vec![ShellStatement {
                    command,
                    arguments: words.collect(),
                    connector_to_next: super::shell::Connector::None,
                }],
                None => Vec::new(),
            });
        }
        parse_shell(&self.raw_arguments)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommentLine {
    pub text: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DockerfileDocument {
    pub raw_text: String,
    pub content_hash: String,
    pub instructions: Vec<Instruction>,
    pub comments: Vec<CommentLine>,
    pub blank_lines: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: no recognizable instruction in `{text}`")]
    MalformedInstruction { line: usize, text: String },
    #[error("the Dockerfile contains no instructions")]
    EmptyInput,
}

/// Lowercase hex SHA-1 of the text.
pub fn sha1_hex(text: &str) -> String {
    let digest = Sha1::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

struct Pending {
    kind: InstructionKind,
    parts: Vec<String>,
    start: usize,
}

impl Pending {
    fn push(&mut self, part: &str) {
        let part = part.trim();
        if !part.is_empty() {
            self.parts.push(part.to_string());
        }
    }

    fn finish(self, end: usize) -> Instruction {
        Instruction {
            kind: self.kind,
            raw_arguments: self.parts.join(" "),
            line_span: (self.start, end),
        }
    }
}

/// Strips a trailing unescaped backslash; returns the remaining text and
/// whether the line continues.
fn split_continuation(line: &str) -> (&str, bool) {
    let trimmed = line.trim_end();
    let slashes = trimmed.chars().rev().take_while(|&c| c == '\\').count();
    if slashes % 2 == 1 {
        (&trimmed[..trimmed.len() - 1], true)
    } else {
        (trimmed, false)
    }
}

pub fn parse_dockerfile(text: &str) -> Result<DockerfileDocument, ParseError> {
    let mut instructions = Vec::new();
    let mut comments = Vec::new();
    let mut blank_lines = BTreeSet::new();
    let mut pending: Option<Pending> = None;
    let mut last_line = 0;

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let trimmed = line.trim();

        if trimmed.is_empty() {
            blank_lines.insert(lineno);
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            comments.push(CommentLine {
                text: rest.trim().to_string(),
                line: lineno,
            });
            continue;
        }

        let (content, continues) = split_continuation(trimmed);
        let current = match pending.take() {
            Some(p) => {
                let mut p = p;
                p.push(content);
                p
            }
            None => {
                let (keyword, rest) = match content.find(char::is_whitespace) {
                    Some(i) => (&content[..i], &content[i..]),
                    None => (content, ""),
                };
                let kind = keyword.parse::<InstructionKind>().map_err(|_| {
                    ParseError::MalformedInstruction {
                        line: lineno,
                        text: trimmed.to_string(),
                    }
                })?;
                let mut p = Pending {
                    kind,
                    parts: Vec::new(),
                    start: lineno,
                };
                p.push(rest);
                p
            }
        };
        if continues {
            pending = Some(current);
        } else {
            instructions.push(current.finish(lineno));
        }
    }
    if let Some(p) = pending {
        instructions.push(p.finish(last_line));
    }

    if instructions.is_empty() {
        return Err(ParseError::EmptyInput);
    }
    Ok(DockerfileDocument {
        content_hash: sha1_hex(text),
        raw_text: text.to_string(),
        instructions,
        comments,
        blank_lines,
    })
}

impl DockerfileDocument {
    pub fn count_kind(&self, kind: InstructionKind) -> usize {
        self.instructions.iter().filter(|i| i.kind == kind).count()
    }

    pub fn stage_count(&self) -> usize {
        self.count_kind(InstructionKind::From)
    }

    pub fn has_kind(&self, kind: InstructionKind) -> bool {
        self.instructions.iter().any(|i| i.kind == kind)
    }

    /// All shell statements from every `RUN`, in document order.
    pub fn run_statements(&self) -> Result<Vec<ShellStatement>, ShellSyntaxError> {
        let mut out = Vec::new();
        for ins in &self.instructions {
            out.extend(ins.shell_statements()?);
        }
        Ok(out)
    }

    /// One `KIND args` line per instruction, comments and layout dropped.
    pub fn render_instructions(&self) -> String {
        let mut out = String::new();
        for ins in &self.instructions {
            out.push_str(ins.kind.keyword());
            if !ins.raw_arguments.is_empty() {
                out.push(' ');
                out.push_str(&ins.raw_arguments);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_from() {
        let doc = parse_dockerfile("FROM tomcat:7.0.75-jre8\n").unwrap();
        assert_eq!(doc.instructions.len(), 1);
        assert_eq!(doc.instructions[0].kind, InstructionKind::From);
        assert_eq!(doc.instructions[0].raw_arguments, "tomcat:7.0.75-jre8");
        assert_eq!(doc.instructions[0].line_span, (1, 1));
        assert_eq!(doc.content_hash.len(), 40);
    }

    #[test]
    fn empty_input() {
        assert_eq!(parse_dockerfile(""), Err(ParseError::EmptyInput));
        assert_eq!(
            parse_dockerfile("# only a comment\n\n"),
            Err(ParseError::EmptyInput)
        );
    }

    #[test]
    fn continuation_and_comment() {
        let doc = parse_dockerfile("RUN a \\\n  b\n# c\n").unwrap();
        assert_eq!(doc.instructions.len(), 1);
        assert_eq!(doc.instructions[0].raw_arguments, "a b");
        assert_eq!(doc.instructions[0].line_span, (1, 2));
        assert_eq!(
            doc.comments,
            vec![CommentLine {
                text: "c".into(),
                line: 3
            }]
        );
    }

    #[test]
    fn comment_inside_continuation_is_standalone() {
        let doc = parse_dockerfile("RUN a && \\\n# note\n    b\nCMD x\n").unwrap();
        assert_eq!(doc.instructions.len(), 2);
        assert_eq!(doc.instructions[0].raw_arguments, "a && b");
        assert_eq!(doc.instructions[0].line_span, (1, 3));
        assert_eq!(doc.comments[0].line, 2);
    }

    #[test]
    fn escaped_backslash_does_not_continue() {
        let doc = parse_dockerfile("RUN echo \\\\\nCMD x\n").unwrap();
        assert_eq!(doc.instructions.len(), 2);
        assert_eq!(doc.instructions[0].raw_arguments, "echo \\\\");
    }

    #[test]
    fn malformed_line() {
        assert_eq!(
            parse_dockerfile("FROM x\nfoo bar\n"),
            Err(ParseError::MalformedInstruction {
                line: 2,
                text: "foo bar".into()
            })
        );
    }

    #[test]
    fn keywords_are_case_insensitive_and_blank_lines_recorded() {
        let doc = parse_dockerfile("from alpine\n\nrun echo hi\n").unwrap();
        assert_eq!(doc.instructions[1].kind, InstructionKind::Run);
        assert!(doc.blank_lines.contains(&2));
        assert_eq!(doc.stage_count(), 1);
    }

    #[test]
    fn instruction_without_arguments_parses() {
        let doc = parse_dockerfile("FROM x\nCOPY\n").unwrap();
        assert_eq!(doc.instructions[1].raw_arguments, "");
    }

    #[test]
    fn exec_form() {
        let doc = parse_dockerfile("CMD [\"nginx\", \"-g\", \"daemon off;\"]\n").unwrap();
        assert_eq!(
            doc.instructions[0].exec_form().unwrap(),
            vec!["nginx", "-g", "daemon off;"]
        );
        let doc = parse_dockerfile("CMD nginx -g 'daemon off;'\n").unwrap();
        assert!(doc.instructions[0].exec_form().is_none());
    }

    #[test]
    fn hash_is_deterministic() {
        let a = parse_dockerfile("FROM x\n").unwrap();
        let b = parse_dockerfile("FROM x\n").unwrap();
        let c = parse_dockerfile("FROM  x\n").unwrap();
        assert_eq!(a.content_hash, b.content_hash);
        assert_ne!(a.content_hash, c.content_hash);
        assert_eq!(sha1_hex("abc"), "a9993e364706816aba3e25717850c26c9cd0d89d");
    }
}
