//! Optional TOML config file; any flag given on the command line wins.

use std::path::{Path, PathBuf};

use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub os_words: Option<PathBuf>,
    pub stop_words: Option<PathBuf>,
    pub dep_words: Option<PathBuf>,
    pub max_tokens: Option<usize>,
    pub k: Option<usize>,
    pub k1: Option<f64>,
    pub b: Option<f64>,
    pub lenient_from: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config: FileConfig = toml::from_str(&text)?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.os_words, &mut config.stop_words, &mut config.dep_words]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys_and_rejects_others() {
        let c: FileConfig = toml::from_str("seed = 7\nmax-tokens = 512\nk1 = 1.5\n").unwrap();
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.max_tokens, Some(512));
        assert_eq!(c.k1, Some(1.5));
        assert!(toml::from_str::<FileConfig>("colour = 1\n").is_err());
    }
}
