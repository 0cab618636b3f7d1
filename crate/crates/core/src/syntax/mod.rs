//! Dockerfile and embedded shell syntax.

mod ast;
mod dockerfile;
mod shell;

pub use ast::{ast_size, build_ast, AstNode, DockerfileAst, ROOT_LABEL};
pub use dockerfile::{
    parse_dockerfile, sha1_hex, CommentLine, DockerfileDocument, Instruction, InstructionKind,
    ParseError,
};
pub use shell::{parse_shell, render_statements, Connector, ShellStatement, ShellSyntaxError, Word};
