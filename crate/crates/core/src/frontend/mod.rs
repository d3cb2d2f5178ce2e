//! Lexing, parsing, semantic analysis and desugaring of MiniC.

pub mod ast;
pub mod desugar;
pub mod error;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod sema;

pub use ast::{
    AssignOp, Ast, BinOp, Node, NodeId, NodeKind, NodeTag, ReturnType, SemaType, SourceLocation,
    UnOp,
};
pub use desugar::desugar;
pub use error::{FrontendError, SemaErrorKind};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::parse;
pub use printer::{print_ast, print_expr};
pub use sema::{analyze_semantics, Callee, Intrinsic, Semantics, SymbolTableEntry};
