//! Arena-backed abstract syntax tree for MiniC.
//!
//! Every node lives in a single [`Ast`] arena and is addressed by its
//! [`NodeId`]. Children are stored as id lists, so the tree can be walked
//! generically (the AST matcher relies on that) while the typed accessors on
//! [`Ast`] give structured views for the later phases.

use std::fmt;

use serde::Serialize;

/// Position of a lexical element in a source file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SourceLocation {
    pub file: String,
    /// 1-based.
    pub line: u32,
    /// 1-based.
    pub column: u32,
    /// 0-based byte offset.
    pub offset: usize,
}

impl SourceLocation {
    pub fn new(file: impl Into<String>, line: u32, column: u32, offset: usize) -> Self {
        Self {
            file: file.into(),
            line,
            column,
            offset,
        }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Semantic type attached to declarations and expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SemaType {
    Int,
    IntArray(i64),
    RefInt,
    Void,
}

impl fmt::Display for SemaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemaType::Int => write!(f, "int"),
            SemaType::IntArray(n) => write!(f, "int[{n}]"),
            SemaType::RefInt => write!(f, "int&"),
            SemaType::Void => write!(f, "void"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReturnType {
    Int,
    Void,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AssignOp {
    Assign,
    Add,
    Sub,
    Mul,
    Div,
}

impl AssignOp {
    pub fn as_str(self) -> &'static str {
        match self {
            AssignOp::Assign => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
            AssignOp::Div => "/=",
        }
    }

    /// The binary operator a compound assignment applies.
    pub fn binary(self) -> Option<BinOp> {
        match self {
            AssignOp::Assign => None,
            AssignOp::Add => Some(BinOp::Add),
            AssignOp::Sub => Some(BinOp::Sub),
            AssignOp::Mul => Some(BinOp::Mul),
            AssignOp::Div => Some(BinOp::Div),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

impl UnOp {
    pub fn as_str(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::Not => "!",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn as_str(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding strength, higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne => 3,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 6,
        }
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }

    pub fn is_relational(self) -> bool {
        matches!(
            self,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    Program,
    /// Children: parameters, then the body block unless `external`.
    FunctionDecl {
        name: String,
        ret: ReturnType,
        external: bool,
    },
    ParamDecl {
        name: String,
        by_ref: bool,
    },
    /// Children: optional initializer.
    VarDecl {
        name: String,
        array_len: Option<i64>,
    },
    Block,
    /// Children: condition, then-branch, optional else-branch.
    IfStmt,
    /// Children: condition, body.
    WhileStmt,
    /// Children: the parts that are present, in source order, then the body.
    ForStmt {
        has_init: bool,
        has_cond: bool,
        has_step: bool,
    },
    /// Children: optional value.
    ReturnStmt,
    /// Children: a single call.
    ExprStmt,
    /// Children: lvalue, value.
    AssignStmt(AssignOp),
    IntLit(i64),
    VarRef(String),
    /// Children: base variable reference, index.
    ArrayIndex,
    UnaryOp(UnOp),
    BinaryOp(BinOp),
    /// Children: arguments.
    Call(String),
}

/// Payload-free discriminant of [`NodeKind`], used by matchers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeTag {
    Program,
    FunctionDecl,
    ParamDecl,
    VarDecl,
    Block,
    IfStmt,
    WhileStmt,
    ForStmt,
    ReturnStmt,
    ExprStmt,
    AssignStmt,
    IntLit,
    VarRef,
    ArrayIndex,
    UnaryOp,
    BinaryOp,
    Call,
}

impl NodeKind {
    pub fn tag(&self) -> NodeTag {
        match self {
            NodeKind::Program => NodeTag::Program,
            NodeKind::FunctionDecl { .. } => NodeTag::FunctionDecl,
            NodeKind::ParamDecl { .. } => NodeTag::ParamDecl,
            NodeKind::VarDecl { .. } => NodeTag::VarDecl,
            NodeKind::Block => NodeTag::Block,
            NodeKind::IfStmt => NodeTag::IfStmt,
            NodeKind::WhileStmt => NodeTag::WhileStmt,
            NodeKind::ForStmt { .. } => NodeTag::ForStmt,
            NodeKind::ReturnStmt => NodeTag::ReturnStmt,
            NodeKind::ExprStmt => NodeTag::ExprStmt,
            NodeKind::AssignStmt(_) => NodeTag::AssignStmt,
            NodeKind::IntLit(_) => NodeTag::IntLit,
            NodeKind::VarRef(_) => NodeTag::VarRef,
            NodeKind::ArrayIndex => NodeTag::ArrayIndex,
            NodeKind::UnaryOp(_) => NodeTag::UnaryOp,
            NodeKind::BinaryOp(_) => NodeTag::BinaryOp,
            NodeKind::Call(_) => NodeTag::Call,
        }
    }

    pub fn is_expr(&self) -> bool {
        matches!(
            self,
            NodeKind::IntLit(_)
                | NodeKind::VarRef(_)
                | NodeKind::ArrayIndex
                | NodeKind::UnaryOp(_)
                | NodeKind::BinaryOp(_)
                | NodeKind::Call(_)
        )
    }
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
    pub loc: SourceLocation,
    pub ty: Option<SemaType>,
}

/// A translation unit's syntax tree.
///
/// Nodes detached by rewriting stay in the arena; everything reachable from
/// `root` is the live tree.
#[derive(Debug, Clone)]
pub struct Ast {
    nodes: Vec<Node>,
    root: NodeId,
}

impl Ast {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            root: NodeId(0),
        }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn set_root(&mut self, root: NodeId) {
        self.root = root;
    }

    pub fn add(&mut self, kind: NodeKind, children: Vec<NodeId>, loc: SourceLocation) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            kind,
            children,
            loc,
            ty: None,
        });
        id
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut Node {
        &mut self.nodes[id.index()]
    }

    pub fn kind(&self, id: NodeId) -> &NodeKind {
        &self.nodes[id.index()].kind
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.index()].children
    }

    pub fn loc(&self, id: NodeId) -> &SourceLocation {
        &self.nodes[id.index()].loc
    }

    pub fn ty(&self, id: NodeId) -> Option<SemaType> {
        self.nodes[id.index()].ty
    }

    pub fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    /// Live nodes in pre-order.
    pub fn preorder(&self, from: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![from];
        while let Some(id) = stack.pop() {
            out.push(id);
            for &c in self.children(id).iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn functions(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.children(self.root).iter().copied()
    }

    pub fn function_name(&self, func: NodeId) -> &str {
        match self.kind(func) {
            NodeKind::FunctionDecl { name, .. } => name,
            other => panic!("not a function declaration: {other:?}"),
        }
    }

    pub fn function_by_name(&self, name: &str) -> Option<NodeId> {
        self.functions().find(|&f| self.function_name(f) == name)
    }

    pub fn params(&self, func: NodeId) -> &[NodeId] {
        let children = self.children(func);
        match self.kind(func) {
            NodeKind::FunctionDecl { external: true, .. } => children,
            _ => &children[..children.len() - 1],
        }
    }

    pub fn body(&self, func: NodeId) -> Option<NodeId> {
        match self.kind(func) {
            NodeKind::FunctionDecl {
                external: false, ..
            } => self.children(func).last().copied(),
            _ => None,
        }
    }

    /// Name introduced by a declaration node.
    pub fn decl_name(&self, decl: NodeId) -> &str {
        match self.kind(decl) {
            NodeKind::VarDecl { name, .. } | NodeKind::ParamDecl { name, .. } => name,
            NodeKind::FunctionDecl { name, .. } => name,
            other => panic!("not a declaration: {other:?}"),
        }
    }

    /// Structural equality of two subtrees, ignoring ids, locations and types.
    pub fn structurally_equal(&self, a: NodeId, other: &Ast, b: NodeId) -> bool {
        if self.kind(a) != other.kind(b) {
            return false;
        }
        let (ca, cb) = (self.children(a), other.children(b));
        ca.len() == cb.len()
            && ca
                .iter()
                .zip(cb)
                .all(|(&x, &y)| self.structurally_equal(x, other, y))
    }
}

impl Default for Ast {
    fn default() -> Self {
        Self::new()
    }
}
