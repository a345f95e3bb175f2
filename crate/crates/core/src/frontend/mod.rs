//! Python source front end: tokens, logical lines, syntax trees.

pub mod ast;
pub mod logical;
pub mod tokenize;

pub use ast::{parse_ast, AstNode, Ctx, NodeKind, ParseError, Span};
pub use logical::{logical_lines, LogicalLine};
pub use tokenize::{tokenize, Pos, Token, TokenKind, TokenizeError};
