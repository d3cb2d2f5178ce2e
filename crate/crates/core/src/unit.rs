use std::collections::BTreeMap;

use crate::cfg::{build_cfg, Cfg};
use crate::frontend::{
    analyze_semantics, desugar, parse, tokenize, Ast, FrontendError, NodeId, Semantics, Token,
};

/// A source file taken through the whole frontend: tokens, the typed AST as
/// written, the desugared typed AST and one CFG per defined function.
#[derive(Debug, Clone)]
pub struct TranslationUnit {
    pub file: String,
    pub source: String,
    pub tokens: Vec<Token>,
    /// Typed AST before desugaring; what the AST matchers look at.
    pub original: Ast,
    pub original_sema: Semantics,
    /// Typed, desugared AST; what the CFG-based analyses look at.
    pub ast: Ast,
    pub sema: Semantics,
    cfgs: BTreeMap<NodeId, Cfg>,
}

impl TranslationUnit {
    pub fn from_source(file: &str, source: &str) -> Result<Self, FrontendError> {
        let tokens = tokenize(source, file)?;
        let mut original = parse(&tokens)?;
        let original_sema = analyze_semantics(&mut original)?;
        let mut ast = desugar(&original);
        let sema = analyze_semantics(&mut ast)?;
        let cfgs = ast
            .functions()
            .filter(|&f| ast.body(f).is_some())
            .map(|f| (f, build_cfg(&ast, &sema, f)))
            .collect();
        Ok(Self {
            file: file.to_string(),
            source: source.to_string(),
            tokens,
            original,
            original_sema,
            ast,
            sema,
            cfgs,
        })
    }

    pub fn cfg(&self, function: NodeId) -> Option<&Cfg> {
        self.cfgs.get(&function)
    }

    /// CFGs of all defined functions, in declaration order.
    pub fn cfgs(&self) -> impl Iterator<Item = &Cfg> {
        self.ast.functions().filter_map(|f| self.cfgs.get(&f))
    }

    /// The definition of `name` (or its prototype if it has no body).
    pub fn function(&self, name: &str) -> Option<NodeId> {
        self.sema.functions.get(name).copied()
    }
}
