//! Tree form of a Dockerfile used for edit-distance comparison.
//!
//! Shape: a `dockerfile` root, one child per instruction labelled with its
//! keyword. `RUN` children are shell statements labelled by command with the
//! argument words as leaves; other instructions carry their argument words as
//! leaves directly. Exec-form lists contribute one leaf per element.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::dockerfile::{DockerfileDocument, InstructionKind};
use super::shell::ShellSyntaxError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AstNode {
    pub label: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn leaf(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn new(label: impl Into<String>, children: Vec<AstNode>) -> Self {
        Self {
            label: label.into(),
            children,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(AstNode::size).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DockerfileAst {
    pub root: AstNode,
}

pub const ROOT_LABEL: &str = "dockerfile";

pub fn build_ast(doc: &DockerfileDocument) -> Result<DockerfileAst, ShellSyntaxError> {
    let mut children = Vec::with_capacity(doc.instructions.len());
    for ins in &doc.instructions {
        let kind = ins.kind.keyword();
        let node = if let Some(elems) = ins.exec_form() {
            AstNode::new(kind, elems.into_iter().map(AstNode::leaf).collect())
        } else if ins.kind == InstructionKind::Run {
            let statements = ins
                .shell_statements()?
                .into_iter()
                .map(|s| {
                    AstNode::new(
                        s.command.value,
                        s.arguments.into_iter().map(|w| AstNode::leaf(w.value)).collect(),
                    )
                })
                .collect();
            AstNode::new(kind, statements)
        } else {
            AstNode::new(
                kind,
                ins.raw_arguments
                    .split_whitespace()
                    .map(AstNode::leaf)
                    .collect(),
            )
        };
        children.push(node);
    }
    Ok(DockerfileAst {
        root: AstNode::new(ROOT_LABEL, children),
    })
}

pub fn ast_size(ast: &DockerfileAst) -> usize {
    ast.root.size()
}

impl DockerfileAst {
    /// Two-space indented dump, one label per line.
    pub fn to_indented_text(&self) -> String {
        fn walk(node: &AstNode, depth: usize, out: &mut String) {
            let _ = writeln!(out, "{:indent$}{}", "", node.label, indent = depth * 2);
            for c in &node.children {
                walk(c, depth + 1, out);
            }
        }
        let mut out = String::new();
        walk(&self.root, 0, &mut out);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_dockerfile;

    #[test]
    fn from_only_has_size_three() {
        let doc = parse_dockerfile("FROM tomcat:7.0.75-jre8\n").unwrap();
        let ast = build_ast(&doc).unwrap();
        assert_eq!(ast_size(&ast), 3);
        assert_eq!(ast.root.children[0].label, "FROM");
        assert_eq!(ast.root.children[0].children[0].label, "tomcat:7.0.75-jre8");
    }

    #[test]
    fn run_statements_become_nodes() {
        let doc = parse_dockerfile("FROM a\nRUN apt-get update && apt-get install -y git\n").unwrap();
        let ast = build_ast(&doc).unwrap();
        let run = &ast.root.children[1];
        assert_eq!(run.children.len(), 2);
        assert_eq!(run.children[1].label, "apt-get");
        assert_eq!(run.children[1].children.len(), 3);
        // root, FROM, a, RUN, 2 statements, 1 + 3 leaves
        assert_eq!(ast_size(&ast), 10);
    }

    #[test]
    fn exec_form_leaves_and_comments_ignored() {
        let doc = parse_dockerfile("FROM a\n# hi\nCMD [\"x\", \"y z\"]\n").unwrap();
        let ast = build_ast(&doc).unwrap();
        assert_eq!(ast.root.children.len(), 2);
        assert_eq!(
            ast.root.children[1].children,
            vec![AstNode::leaf("x"), AstNode::leaf("y z")]
        );
    }

    #[test]
    fn shell_error_propagates() {
        let doc = parse_dockerfile("FROM a\nRUN echo 'x\n").unwrap();
        assert!(build_ast(&doc).is_err());
    }

    #[test]
    fn indented_dump() {
        let doc = parse_dockerfile("FROM a\n").unwrap();
        let ast = build_ast(&doc).unwrap();
        assert_eq!(ast.to_indented_text(), "dockerfile\n  FROM\n    a\n");
        let json = serde_json::to_string(&ast.root).unwrap();
        assert_eq!(
            json,
            r#"{"label":"dockerfile","children":[{"label":"FROM","children":[{"label":"a"}]}]}"#
        );
    }
}
