use serde::{Deserialize, Serialize};

use crate::spec::{DockerSpec, SpecField};

/// One number per spec field, serialized in canonical field order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldScores {
    pub os: f64,
    pub pkg_manager: f64,
    pub dependencies: f64,
    pub downloads_external: f64,
    pub uses_env: f64,
    pub uses_arg: f64,
    pub uses_label: f64,
    pub uses_expose: f64,
    pub uses_cmd: f64,
    pub uses_entrypoint: f64,
}

impl FieldScores {
    pub fn from_fn(mut f: impl FnMut(SpecField) -> f64) -> Self {
        Self {
            os: f(SpecField::Os),
            pkg_manager: f(SpecField::PkgManager),
            dependencies: f(SpecField::Dependencies),
            downloads_external: f(SpecField::DownloadsExternal),
            uses_env: f(SpecField::UsesEnv),
            uses_arg: f(SpecField::UsesArg),
            uses_label: f(SpecField::UsesLabel),
            uses_expose: f(SpecField::UsesExpose),
            uses_cmd: f(SpecField::UsesCmd),
            uses_entrypoint: f(SpecField::UsesEntrypoint),
        }
    }

    pub fn get(&self, field: SpecField) -> f64 {
        match field {
            SpecField::Os => self.os,
            SpecField::PkgManager => self.pkg_manager,
            SpecField::Dependencies => self.dependencies,
            SpecField::DownloadsExternal => self.downloads_external,
            SpecField::UsesEnv => self.uses_env,
            SpecField::UsesArg => self.uses_arg,
            SpecField::UsesLabel => self.uses_label,
            SpecField::UsesExpose => self.uses_expose,
            SpecField::UsesCmd => self.uses_cmd,
            SpecField::UsesEntrypoint => self.uses_entrypoint,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpecField, f64)> + '_ {
        SpecField::ALL.iter().map(move |&f| (f, self.get(f)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AdherenceReport {
    pub scores: FieldScores,
}

impl AdherenceReport {
    pub fn dependency_recall(&self) -> f64 {
        self.scores.dependencies
    }

    pub fn is_perfect(&self) -> bool {
        self.scores.iter().all(|(_, s)| s == 1.0)
    }
}

/// Share of target dependencies found in `obtained`; 1.0 when nothing is required.
pub fn dependency_recall(target: &DockerSpec, obtained: &DockerSpec) -> f64 {
    if target.dependencies.is_empty() {
        return 1.0;
    }
    let hit = target
        .dependencies
        .intersection(&obtained.dependencies)
        .count();
    hit as f64 / target.dependencies.len() as f64
}

pub fn adherence(target: &DockerSpec, obtained: &DockerSpec) -> AdherenceReport {
    let eq = |b: bool| if b { 1.0 } else { 0.0 };
    AdherenceReport {
        scores: FieldScores::from_fn(|field| match field {
            SpecField::Os => eq(target.os == obtained.os),
            SpecField::PkgManager => eq(target.pkg_manager == obtained.pkg_manager),
            SpecField::Dependencies => dependency_recall(target, obtained),
            flag => eq(target.flag(flag) == obtained.flag(flag)),
        }),
    }
}

/// Per-field mean over a set of reports, `None` when empty.
pub fn mean_adherence(reports: &[AdherenceReport]) -> Option<FieldScores> {
    if reports.is_empty() {
        return None;
    }
    let n = reports.len() as f64;
    Some(FieldScores::from_fn(|f| {
        reports.iter().map(|r| r.scores.get(f)).sum::<f64>() / n
    }))
}
