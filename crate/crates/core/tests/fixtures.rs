use std::collections::BTreeMap;
use std::path::PathBuf;

use dockspec_core::corpus::{build_corpus, CorpusConfig, Split};
use dockspec_core::syntax::InstructionKind;
use dockspec_core::{build_ast, infer_spec, parse_dockerfile, PackageManager, WordLists};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixtures().join(name)).unwrap()
}

fn corpus_inputs() -> Vec<(String, String)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixtures().join("corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

#[test]
fn tomcat_ffmpeg_structure() {
    let doc = parse_dockerfile(&read("tomcat-ffmpeg.Dockerfile")).unwrap();
    let ast = build_ast(&doc).unwrap();
    assert_eq!(ast.root.children.len(), 7);
    assert_eq!(doc.count_kind(InstructionKind::Run), 3);
    assert_eq!(doc.count_kind(InstructionKind::Workdir), 3);
    assert_eq!(doc.comments.len(), 2);
    // the first RUN is split into echo, apt-get update, apt-get install, apt-get clean
    let labels: Vec<&str> = ast.root.children[1]
        .children
        .iter()
        .map(|c| c.label.as_str())
        .collect();
    assert_eq!(labels, ["echo", "apt-get", "apt-get", "apt-get"]);
}

#[test]
fn tomcat_ffmpeg_spec() {
    let doc = parse_dockerfile(&read("tomcat-ffmpeg.Dockerfile")).unwrap();
    let spec = infer_spec(&doc, &WordLists::builtin()).unwrap();
    for d in ["tomcat", "x265", "ffmpeg"] {
        assert!(spec.dependencies.contains(d), "missing {d}");
    }
    assert_eq!(spec.pkg_manager, PackageManager::Apt);
    assert!(spec.downloads_external);
    assert!(!spec.uses_env && !spec.uses_arg && !spec.uses_label);
    assert!(!spec.uses_expose && !spec.uses_cmd && !spec.uses_entrypoint);
}

#[test]
fn base_image_examples() {
    let wl = WordLists::builtin();
    let spec = infer_spec(&parse_dockerfile(&read("tomcat-alpine.Dockerfile")).unwrap(), &wl).unwrap();
    assert_eq!(spec.os, "alpine");
    assert!(spec.dependencies.contains("tomcat"));
    let spec = infer_spec(&parse_dockerfile(&read("debian-slim.Dockerfile")).unwrap(), &wl).unwrap();
    assert_eq!(spec.os, "debian10");
}

#[test]
fn fixture_corpus_pipeline() {
    let inputs = corpus_inputs();
    assert!(inputs.len() >= 50);
    let build = build_corpus(&inputs, &WordLists::builtin(), CorpusConfig::default()).unwrap();
    let s = &build.stats;
    assert_eq!(s.files, inputs.len());
    assert_eq!(s.duplicates, 4);
    for reason in ["no-comments", "multi-stage", "unknown-from-word", "shell-syntax-error", "empty-arguments"] {
        assert_eq!(s.rejected.get(reason), Some(&1), "{reason}");
    }
    assert_eq!(s.parse_errors, 1);
    // three near-duplicate variants land in pre-training
    assert!(s.pretrain >= 3);
    assert_eq!(s.train + s.eval + s.test, s.finetune);

    let mut per_split: BTreeMap<Split, usize> = BTreeMap::new();
    for r in &build.records {
        *per_split.entry(r.split.unwrap()).or_default() += 1;
        assert!(!r.spec.dependencies.is_empty());
    }
    assert_eq!(per_split[&Split::Train], s.train);

    // identical runs give identical output
    let again = build_corpus(&inputs, &WordLists::builtin(), CorpusConfig::default()).unwrap();
    assert_eq!(again, build);
}
