//! Statement-level splitting of `RUN` shell scripts.
//!
//! This is deliberately not a POSIX shell parser. It understands connectors
//! (`&&`, `||`, `;`, `|`, newlines), single/double quoting, backslash escapes
//! and simple redirections. Command substitutions (`$(...)`, backticks) and
//! parameter expansions (`${...}`) are carried through as opaque word text.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A shell word. `value` has quotes and escapes removed, `raw` is the source
/// text the word was read from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Word {
    pub raw: String,
    pub value: String,
}

impl Word {
    pub fn new(raw: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            raw: raw.into(),
            value: value.into(),
        }
    }

    /// A word whose raw and unquoted forms coincide.
    pub fn plain(text: impl Into<String>) -> Self {
        let text = text.into();
        Self {
            raw: text.clone(),
            value: text,
        }
    }

    pub fn is_flag(&self) -> bool {
        self.value.starts_with('-') && self.value.len() > 1
    }

    pub fn is_variable(&self) -> bool {
        self.value.starts_with('$')
    }

    /// `>`, `2>&1`, `<` and friends; quoted text never counts.
    pub fn is_redirection(&self) -> bool {
        let rest = self.raw.trim_start_matches(|c: char| c.is_ascii_digit());
        rest.starts_with(['<', '>'])
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// How a statement is joined to the one after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Connector {
    And,
    Or,
    Semicolon,
    Pipe,
    Newline,
    None,
}

impl Connector {
    pub fn as_str(self) -> &'static str {
        match self {
            Connector::And => "&&",
            Connector::Or => "||",
            Connector::Semicolon => ";",
            Connector::Pipe => "|",
            Connector::Newline => "\n",
            Connector::None => "",
        }
    }

    fn is_binary(self) -> bool {
        matches!(self, Connector::And | Connector::Or | Connector::Pipe)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShellStatement {
    pub command: Word,
    pub arguments: Vec<Word>,
    pub connector_to_next: Connector,
}

impl ShellStatement {
    pub fn words(&self) -> impl Iterator<Item = &Word> {
        std::iter::once(&self.command).chain(self.arguments.iter())
    }

    /// The words starting at the program actually executed, skipping leading
    /// `VAR=value` assignments and `sudo`/`env` wrappers.
    pub fn effective_words(&self) -> Vec<&Word> {
        let words: Vec<&Word> = self.words().collect();
        let mut i = 0;
        while i < words.len() {
            let w = &words[i].value;
            if is_assignment(w) {
                i += 1;
            } else if w == "sudo" || w == "env" {
                i += 1;
                while i < words.len() && words[i].is_flag() {
                    i += 1;
                }
            } else {
                break;
            }
        }
        words[i..].to_vec()
    }

    /// Base name of the executed program, lowercased (`/usr/bin/apt-get` -> `apt-get`).
    pub fn program(&self) -> Option<String> {
        self.effective_words().first().map(|w| {
            let v = w.value.rsplit('/').next().unwrap_or(&w.value);
            v.to_ascii_lowercase()
        })
    }
}

fn is_assignment(word: &str) -> bool {
    match word.split_once('=') {
        Some((name, _)) => {
            !name.is_empty()
                && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
        }
        None => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShellSyntaxError {
    #[error("unterminated {0} quote")]
    UnbalancedQuote(char),
    #[error("unterminated command substitution")]
    UnterminatedSubstitution,
    #[error("empty statement before `{0}`")]
    EmptyStatement(&'static str),
    #[error("missing right-hand operand after `{0}`")]
    DanglingConnector(&'static str),
    #[error("here-documents are not supported")]
    HereDocument,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(Word),
    Op(Connector),
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.chars().peekable(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, ShellSyntaxError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            match c {
                ' ' | '\t' | '\r' => {
                    self.chars.next();
                }
                '\n' => {
                    self.chars.next();
                    out.push(Token::Op(Connector::Newline));
                }
                '#' => {
                    // comment to end of line
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.chars.next();
                    }
                }
                '&' => {
                    self.chars.next();
                    match self.chars.peek() {
                        Some('&') => {
                            self.chars.next();
                            out.push(Token::Op(Connector::And));
                        }
                        Some('>') => {
                            self.chars.next();
                            let mut op = String::from("&>");
                            if self.chars.peek() == Some(&'>') {
                                self.chars.next();
                                op.push('>');
                            }
                            out.push(Token::Word(Word::plain(op)));
                        }
                        // background job; treated as a plain separator
                        _ => out.push(Token::Op(Connector::Semicolon)),
                    }
                }
                '|' => {
                    self.chars.next();
                    if self.chars.peek() == Some(&'|') {
                        self.chars.next();
                        out.push(Token::Op(Connector::Or));
                    } else {
                        out.push(Token::Op(Connector::Pipe));
                    }
                }
                ';' => {
                    self.chars.next();
                    out.push(Token::Op(Connector::Semicolon));
                }
                '<' | '>' => {
                    let op = self.redirection(String::new())?;
                    out.push(Token::Word(Word::plain(op)));
                }
                _ => {
                    let word = self.word()?;
                    out.push(Token::Word(word));
                }
            }
        }
        Ok(out)
    }

    /// Reads a redirection operator; `prefix` holds an already-consumed fd number.
    fn redirection(&mut self, mut op: String) -> Result<String, ShellSyntaxError> {
        let first = self.chars.next().expect("caller peeked a redirection char");
        op.push(first);
        if first == '<' && self.chars.peek() == Some(&'<') {
            return Err(ShellSyntaxError::HereDocument);
        }
        if first == '>' && self.chars.peek() == Some(&'>') {
            op.push(self.chars.next().unwrap());
        }
        if self.chars.peek() == Some(&'&') {
            op.push(self.chars.next().unwrap());
            while let Some(&c) = self.chars.peek() {
                if c.is_ascii_digit() || c == '-' {
                    op.push(c);
                    self.chars.next();
                } else {
                    break;
                }
            }
        }
        Ok(op)
    }

    fn word(&mut self) -> Result<Word, ShellSyntaxError> {
        let mut raw = String::new();
        let mut value = String::new();
        while let Some(&c) = self.chars.peek() {
            match c {
                ' ' | '\t' | '\r' | '\n' | ';' | '&' | '|' => break,
                '<' | '>' => {
                    if !raw.is_empty() && raw.chars().all(|c| c.is_ascii_digit()) {
                        // `2>&1`: the digits belong to the operator
                        let fd = std::mem::take(&mut raw);
                        value.clear();
                        let op = self.redirection(fd)?;
                        return Ok(Word::plain(op));
                    }
                    break;
                }
                '\'' => {
                    self.chars.next();
                    raw.push('\'');
                    loop {
                        match self.chars.next() {
                            Some('\'') => break,
                            Some(c) => {
                                raw.push(c);
                                value.push(c);
                            }
                            None => return Err(ShellSyntaxError::UnbalancedQuote('\'')),
                        }
                    }
                    raw.push('\'');
                }
                '"' => {
                    self.chars.next();
                    raw.push('"');
                    loop {
                        match self.chars.next() {
                            Some('"') => break,
                            Some('\\') => {
                                raw.push('\\');
                                match self.chars.next() {
                                    Some(n) if matches!(n, '"' | '\\' | '$' | '`') => {
                                        raw.push(n);
                                        value.push(n);
                                    }
                                    Some('\n') => raw.push('\n'),
                                    Some(n) => {
                                        raw.push(n);
                                        value.push('\\');
                                        value.push(n);
                                    }
                                    None => return Err(ShellSyntaxError::UnbalancedQuote('"')),
                                }
                            }
                            Some('$') if self.chars.peek() == Some(&'(') => {
                                let sub = self.substitution('$')?;
                                raw.push_str(&sub);
                                value.push_str(&sub);
                            }
                            Some('`') => {
                                let sub = self.backticks()?;
                                raw.push_str(&sub);
                                value.push_str(&sub);
                            }
                            Some(c) => {
                                raw.push(c);
                                value.push(c);
                            }
                            None => return Err(ShellSyntaxError::UnbalancedQuote('"')),
                        }
                    }
                    raw.push('"');
                }
                '\\' => {
                    self.chars.next();
                    match self.chars.next() {
                        // line continuation
                        Some('\n') => {}
                        Some(n) => {
                            raw.push('\\');
                            raw.push(n);
                            value.push(n);
                        }
                        None => {
                            raw.push('\\');
                        }
                    }
                }
                '$' => {
                    self.chars.next();
                    match self.chars.peek() {
                        Some('(') => {
                            let sub = self.substitution('$')?;
                            raw.push_str(&sub);
                            value.push_str(&sub);
                        }
                        Some('{') => {
                            let sub = self.braced()?;
                            raw.push_str(&sub);
                            value.push_str(&sub);
                        }
                        _ => {
                            raw.push('$');
                            value.push('$');
                        }
                    }
                }
                '`' => {
                    self.chars.next();
                    let sub = self.backticks()?;
                    raw.push_str(&sub);
                    value.push_str(&sub);
                }
                _ => {
                    self.chars.next();
                    raw.push(c);
                    value.push(c);
                }
            }
        }
        Ok(Word { raw, value })
    }

    /// `$(` ... `)` with nesting; the leading `$` is already consumed.
    fn substitution(&mut self, sigil: char) -> Result<String, ShellSyntaxError> {
        let mut text = String::new();
        text.push(sigil);
        let mut depth = 0usize;
        let mut quote: Option<char> = None;
        loop {
            let c = self
                .chars
                .next()
                .ok_or(ShellSyntaxError::UnterminatedSubstitution)?;
            text.push(c);
            match (quote, c) {
                (Some(q), c) if c == q => quote = None,
                (Some(_), _) => {}
                (None, '\'' | '"') => quote = Some(c),
                (None, '(') => depth += 1,
                (None, ')') => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(text);
                    }
                }
                _ => {}
            }
        }
    }

    fn braced(&mut self) -> Result<String, ShellSyntaxError> {
        let mut text = String::from("$");
        for c in self.chars.by_ref() {
            text.push(c);
            if c == '}' {
                return Ok(text);
            }
        }
        Err(ShellSyntaxError::UnterminatedSubstitution)
    }

    /// Backtick substitution; the opening backtick is already consumed.
    fn backticks(&mut self) -> Result<String, ShellSyntaxError> {
        let mut text = String::from("`");
        while let Some(c) = self.chars.next() {
            text.push(c);
            if c == '\\' {
                if let Some(n) = self.chars.next() {
                    text.push(n);
                }
            } else if c == '`' {
                return Ok(text);
            }
        }
        Err(ShellSyntaxError::UnterminatedSubstitution)
    }
}

/// Split a shell-form `RUN` body into statements.
pub fn parse_shell(script: &str) -> Result<Vec<ShellStatement>, ShellSyntaxError> {
    let tokens = Lexer::new(script).tokens()?;
    let mut statements: Vec<ShellStatement> = Vec::new();
    let mut current: Vec<Word> = Vec::new();

    for token in tokens {
        match token {
            Token::Word(w) => current.push(w),
            Token::Op(op) => {
                if current.is_empty() {
                    // newlines after a binary operator or between statements are insignificant
                    if op == Connector::Newline {
                        continue;
                    }
                    return Err(ShellSyntaxError::EmptyStatement(op.as_str()));
                }
                let mut words = std::mem::take(&mut current).into_iter();
                let command = words.next().expect("non-empty");
                statements.push(ShellStatement {
                    command,
                    arguments: words.collect(),
                    connector_to_next: op,
                });
            }
        }
    }

    if !current.is_empty() {
        let mut words = current.into_iter();
        let command = words.next().expect("non-empty");
        statements.push(ShellStatement {
            command,
            arguments: words.collect(),
            connector_to_next: Connector::None,
        });
    } else if let Some(last) = statements.last_mut() {
        if last.connector_to_next.is_binary() {
            return Err(ShellSyntaxError::DanglingConnector(
                last.connector_to_next.as_str(),
            ));
        }
        last.connector_to_next = Connector::None;
    }
    Ok(statements)
}

/// Re-join statements into a single-line script, using `;` for newline
/// separators.
pub fn render_statements(statements: &[ShellStatement]) -> String {
    let mut out = String::new();
    for (i, stmt) in statements.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let words: Vec<&str> = stmt.words().map(|w| w.raw.as_str()).collect();
        out.push_str(&words.join(" "));
        match stmt.connector_to_next {
            Connector::None => {}
            Connector::Newline => out.push_str(" ;"),
            c => {
                out.push(' ');
                out.push_str(c.as_str());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(stmt: &ShellStatement) -> (String, Vec<String>) {
        (
            stmt.command.value.clone(),
            stmt.arguments.iter().map(|w| w.value.clone()).collect(),
        )
    }

    #[test]
    fn splits_on_and() {
        let s = parse_shell("apt-get update && apt-get install -y git").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(values(&s[0]), ("apt-get".into(), vec!["update".into()]));
        assert_eq!(
            values(&s[1]),
            (
                "apt-get".into(),
                vec!["install".into(), "-y".into(), "git".into()]
            )
        );
        assert_eq!(s[0].connector_to_next, Connector::And);
        assert_eq!(s[1].connector_to_next, Connector::None);
    }

    #[test]
    fn quoted_connector_is_literal() {
        let s = parse_shell("echo 'a && b'").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(values(&s[0]), ("echo".into(), vec!["a && b".into()]));
        assert_eq!(s[0].arguments[0].raw, "'a && b'");
    }

    #[test]
    fn dangling_and_is_an_error() {
        assert_eq!(
            parse_shell("a && "),
            Err(ShellSyntaxError::DanglingConnector("&&"))
        );
        assert_eq!(
            parse_shell("a && ; b"),
            Err(ShellSyntaxError::EmptyStatement(";"))
        );
        assert!(parse_shell("echo 'oops").is_err());
        assert!(parse_shell("echo \"oops").is_err());
    }

    #[test]
    fn all_connectors() {
        let s = parse_shell("a || b; c | d\ne").unwrap();
        let conns: Vec<_> = s.iter().map(|s| s.connector_to_next).collect();
        assert_eq!(
            conns,
            vec![
                Connector::Or,
                Connector::Semicolon,
                Connector::Pipe,
                Connector::Newline,
                Connector::None
            ]
        );
    }

    #[test]
    fn newline_after_operator_is_ignored() {
        let s = parse_shell("a &&\n  b").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].connector_to_next, Connector::And);
    }

    #[test]
    fn trailing_semicolon_is_allowed() {
        let s = parse_shell("a; ").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].connector_to_next, Connector::None);
    }

    #[test]
    fn redirections_are_words() {
        let s = parse_shell("echo deb x >> /etc/apt/sources.list 2>&1; ls").unwrap();
        assert_eq!(s.len(), 2);
        let args: Vec<_> = s[0].arguments.iter().map(|w| w.value.as_str()).collect();
        assert_eq!(args, ["deb", "x", ">>", "/etc/apt/sources.list", "2>&1"]);
        assert!(s[0].arguments[2].is_redirection());
        assert!(s[0].arguments[4].is_redirection());
        assert!(!s[0].arguments[3].is_redirection());
        assert!(!Word::new("'>'", ">").is_redirection());
    }

    #[test]
    fn heredoc_is_rejected() {
        assert_eq!(
            parse_shell("cat <<EOF\nhi\nEOF"),
            Err(ShellSyntaxError::HereDocument)
        );
    }

    #[test]
    fn substitution_is_opaque() {
        let s = parse_shell("echo $(ls && pwd) `uname -a` ${HOME}").unwrap();
        assert_eq!(s.len(), 1);
        let args: Vec<_> = s[0].arguments.iter().map(|w| w.value.as_str()).collect();
        assert_eq!(args, ["$(ls && pwd)", "`uname -a`", "${HOME}"]);
    }

    #[test]
    fn double_quotes_inside_flag() {
        let s = parse_shell("./configure --extra-libs=\"-ldl\" --enable-gpl").unwrap();
        assert_eq!(s[0].arguments[0].value, "--extra-libs=-ldl");
        assert_eq!(s[0].arguments[0].raw, "--extra-libs=\"-ldl\"");
    }

    #[test]
    fn effective_program_skips_wrappers() {
        let s = parse_shell("DEBIAN_FRONTEND=noninteractive sudo -E /usr/bin/apt-get install x")
            .unwrap();
        assert_eq!(s[0].program().as_deref(), Some("apt-get"));
    }

    #[test]
    fn render_round_trips_token_stream() {
        let src = "a x && b 'y z' || c ; d | e";
        let s = parse_shell(src).unwrap();
        let rendered = render_statements(&s);
        assert_eq!(rendered, "a x && b 'y z' || c ; d | e");
        assert_eq!(parse_shell(&rendered).unwrap(), s);
    }

    #[test]
    fn empty_script_has_no_statements() {
        assert!(parse_shell("   ").unwrap().is_empty());
    }
}
