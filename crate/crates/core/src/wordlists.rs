//! OS and stop-word lists used to classify image-name keywords.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

const BUILTIN_OS: &str = include_str!("../data/os_words.txt");
const BUILTIN_STOP: &str = include_str!("../data/stop_words.txt");
const BUILTIN_DEPENDENCY: &str = include_str!("../data/dependency_words.txt");

#[derive(Debug, Error)]
pub enum WordListError {
    #[error("word `{0}` is listed both as an OS and as a stop word")]
    Overlap(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Word lists driving inference and eligibility filtering.
///
/// `dependency_words` holds image-name words that were reviewed and found to
/// name software; it only matters for the unknown-keyword eligibility rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordLists {
    os_words: BTreeSet<String>,
    stop_words: BTreeSet<String>,
    dependency_words: BTreeSet<String>,
}

/// One lowercase word per line, `#` starts a comment.
pub fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::to_lowercase)
        .collect()
}

impl WordLists {
    pub fn new(
        os_words: BTreeSet<String>,
        stop_words: BTreeSet<String>,
        dependency_words: BTreeSet<String>,
    ) -> Result<Self, WordListError> {
        if let Some(w) = os_words.intersection(&stop_words).next() {
            return Err(WordListError::Overlap(w.clone()));
        }
        Ok(Self {
            os_words,
            stop_words,
            dependency_words,
        })
    }

    pub fn builtin() -> Self {
        Self::new(
            parse_word_list(BUILTIN_OS),
            parse_word_list(BUILTIN_STOP),
            parse_word_list(BUILTIN_DEPENDENCY),
        )
        .expect("builtin word lists are disjoint")
    }

    /// Builtin lists with any of the three replaced by the given files.
    pub fn load(
        os: Option<&Path>,
        stop: Option<&Path>,
        dependency: Option<&Path>,
    ) -> Result<Self, WordListError> {
        fn read(path: Option<&Path>, fallback: &str) -> Result<BTreeSet<String>, WordListError> {
            match path {
                Some(p) => std::fs::read_to_string(p)
                    .map(|t| parse_word_list(&t))
                    .map_err(|source| WordListError::Io {
                        path: p.display().to_string(),
                        source,
                    }),
                None => Ok(parse_word_list(fallback)),
            }
        }
        Self::new(
            read(os, BUILTIN_OS)?,
            read(stop, BUILTIN_STOP)?,
            read(dependency, BUILTIN_DEPENDENCY)?,
        )
    }

    pub fn is_os(&self, word: &str) -> bool {
        self.os_words.contains(word)
    }

    pub fn is_stop(&self, word: &str) -> bool {
        self.stop_words.contains(word)
    }

    /// Whether the word was classified in any list.
    pub fn is_known(&self, word: &str) -> bool {
        self.is_os(word) || self.is_stop(word) || self.dependency_words.contains(word)
    }

    pub fn os_words(&self) -> &BTreeSet<String> {
        &self.os_words
    }

    pub fn stop_words(&self) -> &BTreeSet<String> {
        &self.stop_words
    }

    pub fn dependency_words(&self) -> &BTreeSet<String> {
        &self.dependency_words
    }
}

impl Default for WordLists {
    fn default() -> Self {
        Self::builtin()
    }
}
