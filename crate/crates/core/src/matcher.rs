//! The two syntactic methods: fixed token-sequence patterns and AST matcher
//! combinators, with the style checks built on them.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::frontend::{AssignOp, Ast, BinOp, NodeId, NodeKind, NodeTag, Semantics, SourceLocation, Token, TokenKind};
use crate::report::Report;
use crate::unit::TranslationUnit;

pub const TOKEN_DIV_LITERAL_ZERO: &str = "style.TokenDivLiteralZero";
pub const SELF_ASSIGN: &str = "style.SelfAssign";
pub const CONSTANT_CONDITION: &str = "style.ConstantCondition";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenMatcher {
    /// Token text, whatever its kind.
    Exact(String),
    Kind(TokenKind),
    AnyOne,
}

impl TokenMatcher {
    fn matches(&self, t: &Token) -> bool {
        match self {
            TokenMatcher::Exact(s) => t.text == *s,
            TokenMatcher::Kind(k) => t.kind == *k,
            TokenMatcher::AnyOne => true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("token pattern must not be empty")]
pub struct EmptyPattern;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenPattern(Vec<TokenMatcher>);

impl TokenPattern {
    pub fn new(items: Vec<TokenMatcher>) -> Result<Self, EmptyPattern> {
        if items.is_empty() {
            return Err(EmptyPattern);
        }
        Ok(Self(items))
    }

    /// Shorthand for a pattern of `Exact` items.
    pub fn exact(texts: &[&str]) -> Result<Self, EmptyPattern> {
        Self::new(texts.iter().map(|t| TokenMatcher::Exact(t.to_string())).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A contiguous run of matched tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSpan {
    pub start: usize,
    pub len: usize,
    pub loc: SourceLocation,
}

/// Leftmost, non-overlapping matches in token order. The end-of-file token
/// never takes part.
pub fn match_tokens(pattern: &TokenPattern, tokens: &[Token]) -> Vec<TokenSpan> {
    let tokens = match tokens.last() {
        Some(t) if t.kind == TokenKind::EndOfFile => &tokens[..tokens.len() - 1],
        _ => tokens,
    };
    let n = pattern.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i + n <= tokens.len() {
        if pattern.0.iter().zip(&tokens[i..i + n]).all(|(m, t)| m.matches(t)) {
            out.push(TokenSpan {
                start: i,
                len: n,
                loc: tokens[i].loc.clone(),
            });
            i += n;
        } else {
            i += 1;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AstMatcher {
    KindIs(NodeTag),
    BinaryOp(BinOp),
    IntLit(Option<i64>),
    VarRefNamed(Option<String>),
    HasChild(usize, Box<AstMatcher>),
    /// Some strict descendant matches.
    AnyDescendant(Box<AstMatcher>),
    /// All match; the empty conjunction matches every node.
    AllOf(Vec<AstMatcher>),
    Bind(String, Box<AstMatcher>),
}

pub fn kind_is(tag: NodeTag) -> AstMatcher {
    AstMatcher::KindIs(tag)
}

pub fn binary_op(op: BinOp) -> AstMatcher {
    AstMatcher::BinaryOp(op)
}

pub fn int_lit(value: Option<i64>) -> AstMatcher {
    AstMatcher::IntLit(value)
}

pub fn var_ref_named(name: Option<&str>) -> AstMatcher {
    AstMatcher::VarRefNamed(name.map(str::to_string))
}

pub fn has_child(i: usize, m: AstMatcher) -> AstMatcher {
    AstMatcher::HasChild(i, Box::new(m))
}

pub fn any_descendant(m: AstMatcher) -> AstMatcher {
    AstMatcher::AnyDescendant(Box::new(m))
}

pub fn all_of(ms: Vec<AstMatcher>) -> AstMatcher {
    AstMatcher::AllOf(ms)
}

pub fn anything() -> AstMatcher {
    AstMatcher::AllOf(Vec::new())
}

pub fn bind(label: &str, m: AstMatcher) -> AstMatcher {
    AstMatcher::Bind(label.to_string(), Box::new(m))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("bind label '{0}' is used more than once")]
pub struct DuplicateLabel(pub String);

impl AstMatcher {
    /// Checks that bind labels are unique within the tree.
    pub fn validate(&self) -> Result<(), DuplicateLabel> {
        let mut seen = Vec::new();
        self.labels(&mut seen)
    }

    fn labels<'a>(&'a self, seen: &mut Vec<&'a str>) -> Result<(), DuplicateLabel> {
        match self {
            AstMatcher::Bind(l, m) => {
                if seen.contains(&l.as_str()) {
                    return Err(DuplicateLabel(l.clone()));
                }
                seen.push(l);
                m.labels(seen)
            }
            AstMatcher::HasChild(_, m) | AstMatcher::AnyDescendant(m) => m.labels(seen),
            AstMatcher::AllOf(ms) => ms.iter().try_for_each(|m| m.labels(seen)),
            _ => Ok(()),
        }
    }

    fn matches(&self, ast: &Ast, n: NodeId, out: &mut BTreeMap<String, NodeId>) -> bool {
        match self {
            AstMatcher::KindIs(t) => ast.kind(n).tag() == *t,
            AstMatcher::BinaryOp(op) => *ast.kind(n) == NodeKind::BinaryOp(*op),
            AstMatcher::IntLit(v) => matches!(ast.kind(n), NodeKind::IntLit(x) if v.is_none_or(|v| v == *x)),
            AstMatcher::VarRefNamed(name) => {
                matches!(ast.kind(n), NodeKind::VarRef(x) if name.as_ref().is_none_or(|s| s == x))
            }
            AstMatcher::HasChild(i, m) => ast.children(n).get(*i).is_some_and(|&c| m.matches(ast, c, out)),
            AstMatcher::AnyDescendant(m) => ast.preorder(n).into_iter().skip(1).any(|d| {
                let mut b = BTreeMap::new();
                let ok = m.matches(ast, d, &mut b);
                if ok {
                    out.extend(b);
                }
                ok
            }),
            AstMatcher::AllOf(ms) => {
                let mut b = BTreeMap::new();
                let ok = ms.iter().all(|m| m.matches(ast, n, &mut b));
                if ok {
                    out.extend(b);
                }
                ok
            }
            AstMatcher::Bind(l, m) => {
                let ok = m.matches(ast, n, out);
                if ok {
                    out.insert(l.clone(), n);
                }
                ok
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstMatch {
    pub node: NodeId,
    pub bindings: BTreeMap<String, NodeId>,
}

/// Every node under `root` (inclusive) that satisfies `m`, in pre-order.
///
/// Panics if `m` reuses a bind label.
pub fn match_ast(m: &AstMatcher, ast: &Ast, root: NodeId) -> Vec<AstMatch> {
    if let Err(e) = m.validate() {
        panic!("{e}");
    }
    ast.preorder(root)
        .into_iter()
        .filter_map(|node| {
            let mut bindings = BTreeMap::new();
            m.matches(ast, node, &mut bindings).then_some(AstMatch { node, bindings })
        })
        .collect()
}

/// Evaluates `m` at `node` alone, without searching below it.
pub fn match_node(m: &AstMatcher, ast: &Ast, node: NodeId) -> Option<AstMatch> {
    if let Err(e) = m.validate() {
        panic!("{e}");
    }
    let mut bindings = BTreeMap::new();
    m.matches(ast, node, &mut bindings).then_some(AstMatch { node, bindings })
}

/// `/` or `%` directly followed by the literal `0`, found on tokens alone.
pub fn token_div_literal_zero(unit: &TranslationUnit) -> Vec<Report> {
    let mut out = Vec::new();
    for (op, what) in [("/", "Division"), ("%", "Modulo")] {
        let pattern = TokenPattern::exact(&[op, "0"]).expect("non-empty");
        for span in match_tokens(&pattern, &unit.tokens) {
            out.push(Report::new(
                TOKEN_DIV_LITERAL_ZERO,
                format!("{what} by literal zero"),
                span.loc,
                Vec::new(),
            ));
        }
    }
    out
}

/// `x = x;` or `a[e] = a[e];`, comparing declarations rather than names.
pub fn self_assign(unit: &TranslationUnit) -> Vec<Report> {
    let (ast, sema) = (&unit.original, &unit.original_sema);
    let m = all_of(vec![
        kind_is(NodeTag::AssignStmt),
        has_child(0, bind("lhs", anything())),
        has_child(1, bind("rhs", anything())),
    ]);
    match_ast(&m, ast, ast.root())
        .into_iter()
        .filter(|hit| *ast.kind(hit.node) == NodeKind::AssignStmt(AssignOp::Assign))
        .filter(|hit| same_location(ast, sema, hit.bindings["lhs"], hit.bindings["rhs"]))
        .map(|hit| {
            let name = ast.children(hit.bindings["lhs"]).first().copied().unwrap_or(hit.bindings["lhs"]);
            let name = match ast.kind(name) {
                NodeKind::VarRef(n) => n.clone(),
                _ => "?".into(),
            };
            Report::new(
                SELF_ASSIGN,
                format!("'{name}' is assigned to itself"),
                ast.loc(hit.node).clone(),
                Vec::new(),
            )
        })
        .collect()
}

fn same_location(ast: &Ast, sema: &Semantics, a: NodeId, b: NodeId) -> bool {
    match (ast.kind(a), ast.kind(b)) {
        (NodeKind::VarRef(_), NodeKind::VarRef(_)) => sema.decl_of(a).is_some() && sema.decl_of(a) == sema.decl_of(b),
        (NodeKind::ArrayIndex, NodeKind::ArrayIndex) => {
            let (ca, cb) = (ast.children(a), ast.children(b));
            same_location(ast, sema, ca[0], cb[0]) && ast.structurally_equal(ca[1], ast, cb[1])
        }
        _ => false,
    }
}

/// `if`/`while` whose condition is an integer literal.
pub fn constant_condition(unit: &TranslationUnit) -> Vec<Report> {
    let ast = &unit.original;
    let mut out = Vec::new();
    for (tag, kw) in [(NodeTag::IfStmt, "if"), (NodeTag::WhileStmt, "while")] {
        let m = all_of(vec![kind_is(tag), has_child(0, bind("cond", int_lit(None)))]);
        for hit in match_ast(&m, ast, ast.root()) {
            let cond = hit.bindings["cond"];
            let NodeKind::IntLit(v) = ast.kind(cond) else { unreachable!() };
            out.push(Report::new(
                CONSTANT_CONDITION,
                format!("Condition of '{kw}' is the constant {v}"),
                ast.loc(cond).clone(),
                Vec::new(),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::tokenize;

    fn unit(src: &str) -> TranslationUnit {
        TranslationUnit::from_source("t.mc", src).unwrap()
    }

    #[test]
    fn token_spans() {
        let p = TokenPattern::exact(&["/", "0"]).unwrap();
        assert_eq!(match_tokens(&p, &tokenize("x = y / 0;", "t").unwrap()).len(), 1);
        assert_eq!(match_tokens(&p, &tokenize("x = y / z;", "t").unwrap()).len(), 0);

        let p = TokenPattern::new(vec![
            TokenMatcher::Kind(TokenKind::Identifier),
            TokenMatcher::Exact("=".into()),
            TokenMatcher::Kind(TokenKind::Identifier),
        ])
        .unwrap();
        assert_eq!(match_tokens(&p, &tokenize("a = a;", "t").unwrap()).len(), 1);
        assert_eq!(TokenPattern::new(vec![]), Err(EmptyPattern));
    }

    #[test]
    fn token_matches_do_not_overlap() {
        let p = TokenPattern::new(vec![TokenMatcher::AnyOne, TokenMatcher::AnyOne]).unwrap();
        let spans = match_tokens(&p, &tokenize("a b c d e", "t").unwrap());
        assert_eq!(spans.iter().map(|s| s.start).collect::<Vec<_>>(), vec![0, 2]);
    }

    #[test]
    fn ast_matchers() {
        let u = unit("int f() { return 1+2*3; }");
        let plus = match_ast(&binary_op(BinOp::Add), &u.original, u.original.root());
        assert_eq!(plus.len(), 1);

        let u = unit("void g(int b, int &x) { if (b) x = b+1; else x = 42; }");
        let body = u.original.body(u.function("g").unwrap()).unwrap();
        let m = any_descendant(int_lit(Some(42)));
        assert!(match_node(&m, &u.original, body).is_some());
        // Searching the subtree also hits the if and the assignment above 42.
        assert_eq!(match_ast(&m, &u.original, body).len(), 3);
        assert_eq!(match_ast(&int_lit(Some(42)), &u.original, body).len(), 1);

        let none = all_of(vec![kind_is(NodeTag::IntLit), kind_is(NodeTag::VarRef)]);
        assert!(match_ast(&none, &u.original, u.original.root()).is_empty());
    }

    #[test]
    fn bindings_and_labels() {
        let u = unit("void f(int a) { a = a + 1; }");
        let m = all_of(vec![
            kind_is(NodeTag::AssignStmt),
            has_child(1, bind("sum", has_child(1, bind("one", int_lit(Some(1)))))),
        ]);
        let hits = match_ast(&m, &u.original, u.original.root());
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].bindings.len(), 2);
        let dup = all_of(vec![bind("x", anything()), bind("x", anything())]);
        assert_eq!(dup.validate(), Err(DuplicateLabel("x".into())));
    }

    #[test]
    fn style_checks() {
        let u = unit("void f() { int x; int y; x = 1; x = x; y = x; if (1) x = 2; while (0) { } y = 1/0; }");
        assert_eq!(self_assign(&u).len(), 1);
        assert_eq!(constant_condition(&u).len(), 2);
        assert_eq!(token_div_literal_zero(&u).len(), 1);
    }

    #[test]
    fn self_assign_uses_declarations() {
        let u = unit("void f(int x) { int y; y = 0; { int x; x = 1; y = x; } x = x; }");
        let r = self_assign(&u);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].loc.line, 1);
        let u = unit("void f() { int a[3]; int i; i = 0; a[i+1] = a[i+1]; a[i] = a[i+1]; }");
        assert_eq!(self_assign(&u).len(), 1);
    }
}
