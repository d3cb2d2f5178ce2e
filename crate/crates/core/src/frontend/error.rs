use thiserror::Error;

use super::ast::SourceLocation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemaErrorKind {
    UndeclaredIdentifier,
    Redefinition,
    TypeMismatch,
    ArityMismatch,
    NonLvalueRefArgument,
    IndexOfNonArray,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{loc}: lexical error: {message}")]
    Lexical { loc: SourceLocation, message: String },
    #[error("{loc}: syntax error: expected {expected}, found {found}")]
    Syntax {
        loc: SourceLocation,
        expected: String,
        found: String,
    },
    #[error("{loc}: {kind:?}: {message}")]
    Semantic {
        kind: SemaErrorKind,
        loc: SourceLocation,
        message: String,
    },
}

impl FrontendError {
    pub fn loc(&self) -> &SourceLocation {
        match self {
            FrontendError::Lexical { loc, .. }
            | FrontendError::Syntax { loc, .. }
            | FrontendError::Semantic { loc, .. } => loc,
        }
    }

    pub fn sema_kind(&self) -> Option<SemaErrorKind> {
        match self {
            FrontendError::Semantic { kind, .. } => Some(*kind),
            _ => None,
        }
    }
}
