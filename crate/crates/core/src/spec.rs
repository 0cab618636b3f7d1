//! The ten-field structured Dockerfile requirement record.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wordlists::WordLists;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PackageManager {
    Apt,
    Apk,
    Yum,
    Any,
}

impl PackageManager {
    pub fn as_str(self) -> &'static str {
        match self {
            PackageManager::Apt => "apt",
            PackageManager::Apk => "apk",
            PackageManager::Yum => "yum",
            PackageManager::Any => "any",
        }
    }

    /// Whether this manager may be paired with the given OS value.
    pub fn coherent_with(self, os: &str) -> bool {
        let required = if os.starts_with("ubuntu") || os.starts_with("debian") {
            Some(PackageManager::Apt)
        } else if os.starts_with("alpine") {
            Some(PackageManager::Apk)
        } else if ["centos", "fedora", "rhel", "amazonlinux"]
            .iter()
            .any(|p| os.starts_with(p))
        {
            Some(PackageManager::Yum)
        } else {
            None
        };
        match required {
            Some(m) => self == m || self == PackageManager::Any,
            None => true,
        }
    }
}

impl fmt::Display for PackageManager {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PackageManager {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "apt" => Ok(PackageManager::Apt),
            "apk" => Ok(PackageManager::Apk),
            "yum" => Ok(PackageManager::Yum),
            "any" => Ok(PackageManager::Any),
            other => Err(format!("unknown package manager `{other}`")),
        }
    }
}

/// Structured requirements a Dockerfile should satisfy.
///
/// Field order here is the canonical serialization order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct DockerSpec {
    pub os: String,
    pub pkg_manager: PackageManager,
    pub dependencies: BTreeSet<String>,
    pub downloads_external: bool,
    pub uses_env: bool,
    pub uses_arg: bool,
    pub uses_label: bool,
    pub uses_expose: bool,
    pub uses_cmd: bool,
    pub uses_entrypoint: bool,
}

pub const ANY_OS: &str = "any";

impl Default for DockerSpec {
    /// The unconstrained spec: any OS, any manager, nothing required.
    fn default() -> Self {
        Self {
            os: ANY_OS.to_string(),
            pkg_manager: PackageManager::Any,
            dependencies: BTreeSet::new(),
            downloads_external: false,
            uses_env: false,
            uses_arg: false,
            uses_label: false,
            uses_expose: false,
            uses_cmd: false,
            uses_entrypoint: false,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    os: String,
    pkg_manager: PackageManager,
    dependencies: Vec<String>,
    downloads_external: bool,
    uses_env: bool,
    uses_arg: bool,
    uses_label: bool,
    uses_expose: bool,
    uses_cmd: bool,
    uses_entrypoint: bool,
}

impl TryFrom<RawSpec> for DockerSpec {
    type Error = String;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        if raw.dependencies.windows(2).any(|w| w[0] >= w[1]) {
            return Err("`dependencies` must be sorted and free of duplicates".to_string());
        }
        Ok(Self {
            os: raw.os,
            pkg_manager: raw.pkg_manager,
            dependencies: raw.dependencies.into_iter().collect(),
            downloads_external: raw.downloads_external,
            uses_env: raw.uses_env,
            uses_arg: raw.uses_arg,
            uses_label: raw.uses_label,
            uses_expose: raw.uses_expose,
            uses_cmd: raw.uses_cmd,
            uses_entrypoint: raw.uses_entrypoint,
        })
    }
}

/// The ten spec fields, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecField {
    Os,
    PkgManager,
    Dependencies,
    DownloadsExternal,
    UsesEnv,
    UsesArg,
    UsesLabel,
    UsesExpose,
    UsesCmd,
    UsesEntrypoint,
}

impl SpecField {
    pub const ALL: [SpecField; 10] = [
        SpecField::Os,
        SpecField::PkgManager,
        SpecField::Dependencies,
        SpecField::DownloadsExternal,
        SpecField::UsesEnv,
        SpecField::UsesArg,
        SpecField::UsesLabel,
        SpecField::UsesExpose,
        SpecField::UsesCmd,
        SpecField::UsesEntrypoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpecField::Os => "os",
            SpecField::PkgManager => "pkg_manager",
            SpecField::Dependencies => "dependencies",
            SpecField::DownloadsExternal => "downloads_external",
            SpecField::UsesEnv => "uses_env",
            SpecField::UsesArg => "uses_arg",
            SpecField::UsesLabel => "uses_label",
            SpecField::UsesExpose => "uses_expose",
            SpecField::UsesCmd => "uses_cmd",
            SpecField::UsesEntrypoint => "uses_entrypoint",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl DockerSpec {
    /// Value of a boolean field; `None` for the three non-flag fields.
    pub fn flag(&self, field: SpecField) -> Option<bool> {
        Some(match field {
            SpecField::DownloadsExternal => self.downloads_external,
            SpecField::UsesEnv => self.uses_env,
            SpecField::UsesArg => self.uses_arg,
            SpecField::UsesLabel => self.uses_label,
            SpecField::UsesExpose => self.uses_expose,
            SpecField::UsesCmd => self.uses_cmd,
            SpecField::UsesEntrypoint => self.uses_entrypoint,
            SpecField::Os | SpecField::PkgManager | SpecField::Dependencies => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyOs,
    MalformedOs(String),
    PkgOsIncoherent { os: String, pkg_manager: PackageManager },
    DependencyIsStopWord(String),
    DependencyIsOsWord(String),
    DependencyNotAlphabeticLeading(String),
    DependencyNotLowercase(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyOs => write!(f, "os is empty"),
            Violation::MalformedOs(os) => {
                write!(f, "os `{os}` is not a lowercase word with optional digit suffix")
            }
            Violation::PkgOsIncoherent { os, pkg_manager } => {
                write!(f, "pkg/os incoherent: `{pkg_manager}` cannot serve `{os}`")
            }
            Violation::DependencyIsStopWord(d) => write!(f, "dependency `{d}` is a stop word"),
            Violation::DependencyIsOsWord(d) => write!(f, "dependency is an OS word: `{d}`"),
            Violation::DependencyNotAlphabeticLeading(d) => {
                write!(f, "dependency `{d}` does not start with a letter")
            }
            Violation::DependencyNotLowercase(d) => write!(f, "dependency `{d}` is not lowercase"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn is_os_token(os: &str) -> bool {
    let letters = os.trim_end_matches(|c: char| c.is_ascii_digit());
    !letters.is_empty() && letters.chars().all(|c| c.is_ascii_lowercase())
}

pub fn validate_spec(spec: &DockerSpec, lists: &WordLists) -> ValidationReport {
    let mut violations = Vec::new();
    if spec.os.is_empty() {
        violations.push(Violation::EmptyOs);
    } else if !is_os_token(&spec.os) {
        violations.push(Violation::MalformedOs(spec.os.clone()));
    }
    if !spec.pkg_manager.coherent_with(&spec.os) {
        violations.push(Violation::PkgOsIncoherent {
            os: spec.os.clone(),
            pkg_manager: spec.pkg_manager,
        });
    }
    for dep in &spec.dependencies {
        if dep.chars().any(|c| c.is_uppercase()) {
            violations.push(Violation::DependencyNotLowercase(dep.clone()));
        }
        if !dep.chars().next().is_some_and(|c| c.is_alphabetic()) {
            violations.push(Violation::DependencyNotAlphabeticLeading(dep.clone()));
        }
        if lists.is_os(dep) {
            violations.push(Violation::DependencyIsOsWord(dep.clone()));
        }
        if lists.is_stop(dep) {
            violations.push(Violation::DependencyIsStopWord(dep.clone()));
        }
    }
    ValidationReport { violations }
}

#[derive(Debug, Error)]
#[error("spec schema error: {0}")]
pub struct SchemaError(#[from] serde_json::Error);

/// Canonical pretty JSON, newline terminated.
pub fn serialize_spec(spec: &DockerSpec) -> String {
    let mut out = serde_json::to_string_pretty(spec).expect("spec is always serializable");
    out.push('\n');
    out
}

pub fn deserialize_spec(text: &str) -> Result<DockerSpec, SchemaError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_with(os: &str, pkg: PackageManager, deps: &[&str]) -> DockerSpec {
        DockerSpec {
            os: os.into(),
            pkg_manager: pkg,
            dependencies: deps.iter().map(|s| s.to_string()).collect(),
            ..DockerSpec::default()
        }
    }

    #[test]
    fn incoherent_manager_is_reported() {
        let wl = WordLists::builtin();
        let report = validate_spec(&spec_with("alpine", PackageManager::Apt, &[]), &wl);
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].to_string().contains("pkg/os incoherent"));
        assert!(!validate_spec(&spec_with("ubuntu", PackageManager::Yum, &[]), &wl).is_valid());
        assert!(validate_spec(&spec_with("debian10", PackageManager::Apt, &[]), &wl).is_valid());
        assert!(validate_spec(&spec_with("centos", PackageManager::Any, &[]), &wl).is_valid());
    }

    #[test]
    fn empty_spec_is_valid() {
        assert!(validate_spec(&DockerSpec::default(), &WordLists::builtin()).is_valid());
    }

    #[test]
    fn os_word_dependency_is_reported() {
        let wl = WordLists::builtin();
        let report = validate_spec(&spec_with("alpine", PackageManager::Any, &["alpine"]), &wl);
        assert_eq!(
            report.violations,
            vec![Violation::DependencyIsOsWord("alpine".into())]
        );
        assert!(report.violations[0]
            .to_string()
            .contains("dependency is an OS word"));
    }

    #[test]
    fn dependency_shape_rules() {
        let wl = WordLists::builtin();
        let report = validate_spec(
            &spec_with("any", PackageManager::Any, &["9lives", "only", "Git", "jre8x"]),
            &wl,
        );
        assert_eq!(
            report.violations,
            vec![
                Violation::DependencyNotAlphabeticLeading("9lives".into()),
                Violation::DependencyNotLowercase("Git".into()),
                Violation::DependencyIsStopWord("only".into()),
            ]
        );
        assert!(!validate_spec(&spec_with("", PackageManager::Any, &[]), &wl).is_valid());
        assert!(!validate_spec(&spec_with("debian:10", PackageManager::Any, &[]), &wl).is_valid());
    }

    #[test]
    fn round_trip_of_empty_spec() {
        let s = DockerSpec::default();
        assert_eq!(deserialize_spec(&serialize_spec(&s)).unwrap(), s);
    }

    #[test]
    fn dependencies_serialize_sorted() {
        let s = spec_with("any", PackageManager::Any, &["tomcat", "ffmpeg"]);
        let json: serde_json::Value = serde_json::from_str(&serialize_spec(&s)).unwrap();
        assert_eq!(json["dependencies"], serde_json::json!(["ffmpeg", "tomcat"]));
    }

    #[test]
    fn canonical_field_order() {
        let text = serialize_spec(&DockerSpec::default());
        let keys: Vec<&str> = text
            .lines()
            .filter_map(|l| l.trim().strip_prefix('"'))
            .filter_map(|l| l.split('"').next())
            .collect();
        let expected: Vec<&str> = SpecField::ALL.iter().map(|f| f.name()).collect();
        assert_eq!(keys, expected);
    }

    #[test]
    fn schema_errors() {
        let mut v: serde_json::Value = serde_json::from_str(&serialize_spec(&DockerSpec::default())).unwrap();
        v.as_object_mut().unwrap().remove("os");
        assert!(deserialize_spec(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&serialize_spec(&DockerSpec::default())).unwrap();
        v["extra"] = serde_json::json!(true);
        assert!(deserialize_spec(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&serialize_spec(&DockerSpec::default())).unwrap();
        v["uses_env"] = serde_json::json!("yes");
        assert!(deserialize_spec(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&serialize_spec(&DockerSpec::default())).unwrap();
        v["pkg_manager"] = serde_json::json!("pacman");
        assert!(deserialize_spec(&v.to_string()).is_err());

        let mut v: serde_json::Value = serde_json::from_str(&serialize_spec(&DockerSpec::default())).unwrap();
        v["dependencies"] = serde_json::json!(["tomcat", "ffmpeg"]);
        assert!(deserialize_spec(&v.to_string()).is_err());
        v["dependencies"] = serde_json::json!(["a", "a"]);
        assert!(deserialize_spec(&v.to_string()).is_err());
    }

    #[test]
    fn reordered_fields_are_accepted() {
        let text = r#"{"uses_entrypoint":false,"uses_cmd":true,"uses_expose":false,
            "uses_label":false,"uses_arg":false,"uses_env":false,"downloads_external":false,
            "dependencies":["git"],"pkg_manager":"apt","os":"ubuntu"}"#;
        let s = deserialize_spec(text).unwrap();
        assert!(s.uses_cmd);
        assert_eq!(s.pkg_manager, PackageManager::Apt);
    }
}
