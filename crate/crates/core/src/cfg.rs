//! Per-function control flow graphs over the desugared AST.
//!
//! Block elements are expression and statement nodes in evaluation order
//! (operands before the operator that consumes them), so an interpreter can
//! walk a block left to right with every operand already computed. Lvalues
//! are not elements: only their index sub-expressions are, and the statement
//! or call that consumes the lvalue resolves the location itself.
//!
//! `&&` and `||` never appear as elements. In conditions they become chains of
//! conditional branches; in value position the two outcomes meet in blocks
//! that bind the operator node to a constant 1 or 0.

use std::collections::HashMap;
use std::fmt;

use serde_json::{json, Value};

use crate::frontend::{Ast, BinOp, Callee, NodeId, NodeKind, Semantics, UnOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub u32);

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Element {
    Node(NodeId),
    /// Gives a short-circuit operator node its value on one outcome path.
    Bind { node: NodeId, value: i64 },
}

impl Element {
    pub fn node(self) -> NodeId {
        match self {
            Element::Node(n) | Element::Bind { node: n, .. } => n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminator {
    Jump(BlockId),
    /// Branch on the value of `cond`, computed by an element of this block.
    CondBranch {
        cond: NodeId,
        on_true: BlockId,
        on_false: BlockId,
    },
    /// Leaves the function; the value, if any, was computed by an element.
    Return(Option<NodeId>),
    Exit,
}

#[derive(Debug, Clone)]
pub struct BasicBlock {
    pub id: BlockId,
    pub elements: Vec<Element>,
    pub terminator: Terminator,
}

/// Which source-level branch a conditional edge selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    /// The `if`/`while` statement the branch belongs to.
    pub stmt: NodeId,
    pub then_block: BlockId,
    pub else_block: BlockId,
}

#[derive(Debug, Clone)]
pub struct Cfg {
    pub function: NodeId,
    pub blocks: Vec<BasicBlock>,
    pub entry: BlockId,
    pub exit: BlockId,
    preds: Vec<Vec<BlockId>>,
    rpo: Vec<BlockId>,
    reachable: Vec<bool>,
    decisions: HashMap<BlockId, Decision>,
}

impl Cfg {
    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.blocks[id.index()]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn successors(&self, id: BlockId) -> Vec<BlockId> {
        match self.block(id).terminator {
            Terminator::Jump(t) => vec![t],
            Terminator::CondBranch {
                on_true, on_false, ..
            } => vec![on_true, on_false],
            Terminator::Return(_) => vec![self.exit],
            Terminator::Exit => vec![],
        }
    }

    pub fn predecessors(&self, id: BlockId) -> &[BlockId] {
        &self.preds[id.index()]
    }

    /// Reachable blocks in reverse post-order.
    pub fn reverse_post_order(&self) -> &[BlockId] {
        &self.rpo
    }

    pub fn is_reachable(&self, id: BlockId) -> bool {
        self.reachable[id.index()]
    }

    /// Source-level meaning of the conditional branch ending `block`, when its
    /// targets are the statement's then/else blocks.
    pub fn decision(&self, block: BlockId) -> Option<&Decision> {
        self.decisions.get(&block)
    }

    /// Rendering used by `--dump-cfg`.
    pub fn to_json(&self, ast: &Ast) -> Value {
        let blocks: Vec<Value> = self
            .blocks
            .iter()
            .map(|b| {
                let term = match b.terminator {
                    Terminator::Jump(t) => json!({"kind": "jump", "targets": [t.0]}),
                    Terminator::CondBranch {
                        cond,
                        on_true,
                        on_false,
                    } => json!({
                        "kind": "cond_branch",
                        "cond": cond.0,
                        "targets": [on_true.0, on_false.0],
                    }),
                    Terminator::Return(v) => json!({
                        "kind": "return",
                        "value": v.map(|n| n.0),
                        "targets": [self.exit.0],
                    }),
                    Terminator::Exit => json!({"kind": "exit", "targets": []}),
                };
                json!({
                    "id": b.id.0,
                    "elements": b.elements.iter().map(|e| e.node().0).collect::<Vec<_>>(),
                    "term": term,
                    "reachable": self.is_reachable(b.id),
                })
            })
            .collect();
        json!({
            "function": ast.function_name(self.function),
            "entry": self.entry.0,
            "exit": self.exit.0,
            "blocks": blocks,
        })
    }
}

/// Builds the CFG of a defined function. The body must already be desugared.
pub fn build_cfg(ast: &Ast, sema: &Semantics, function: NodeId) -> Cfg {
    let body = ast
        .body(function)
        .expect("CFG construction needs a function body");
    let mut b = Builder {
        ast,
        sema,
        blocks: Vec::new(),
        current: BlockId(0),
        decisions: HashMap::new(),
    };
    let entry = b.new_block();
    let exit = b.new_block();
    b.blocks[exit.index()].terminator = Some(Terminator::Exit);
    b.current = entry;
    b.stmt(body);
    b.terminate(Terminator::Jump(exit));

    let blocks: Vec<BasicBlock> = b
        .blocks
        .into_iter()
        .enumerate()
        .map(|(i, pb)| BasicBlock {
            id: BlockId(i as u32),
            elements: pb.elements,
            terminator: pb.terminator.expect("every block is terminated"),
        })
        .collect();
    let mut cfg = Cfg {
        function,
        preds: vec![Vec::new(); blocks.len()],
        reachable: vec![false; blocks.len()],
        blocks,
        entry,
        exit,
        rpo: Vec::new(),
        decisions: b.decisions,
    };
    for i in 0..cfg.blocks.len() {
        let id = BlockId(i as u32);
        for s in cfg.successors(id) {
            cfg.preds[s.index()].push(id);
        }
    }
    let mut post = Vec::new();
    let mut stack = vec![(entry, 0usize)];
    cfg.reachable[entry.index()] = true;
    while let Some((id, next)) = stack.pop() {
        let succs = cfg.successors(id);
        if next < succs.len() {
            stack.push((id, next + 1));
            let s = succs[next];
            if !cfg.reachable[s.index()] {
                cfg.reachable[s.index()] = true;
                stack.push((s, 0));
            }
        } else {
            post.push(id);
        }
    }
    post.reverse();
    cfg.rpo = post;
    cfg
}

struct PendingBlock {
    elements: Vec<Element>,
    terminator: Option<Terminator>,
}

struct Builder<'a> {
    ast: &'a Ast,
    sema: &'a Semantics,
    blocks: Vec<PendingBlock>,
    current: BlockId,
    decisions: HashMap<BlockId, Decision>,
}

impl Builder<'_> {
    fn new_block(&mut self) -> BlockId {
        self.blocks.push(PendingBlock {
            elements: Vec::new(),
            terminator: None,
        });
        BlockId(self.blocks.len() as u32 - 1)
    }

    fn push(&mut self, e: Element) {
        self.blocks[self.current.index()].elements.push(e);
    }

    fn terminate(&mut self, t: Terminator) {
        let b = &mut self.blocks[self.current.index()];
        debug_assert!(b.terminator.is_none(), "block terminated twice");
        b.terminator = Some(t);
    }

    fn stmt(&mut self, s: NodeId) {
        let ast = self.ast;
        let c = ast.children(s);
        match ast.kind(s) {
            NodeKind::Block => {
                for &child in c {
                    self.stmt(child);
                }
            }
            NodeKind::VarDecl { .. } => {
                if let Some(&init) = c.first() {
                    self.expr(init);
                }
                self.push(Element::Node(s));
            }
            NodeKind::AssignStmt(_) => {
                self.lvalue(c[0]);
                self.expr(c[1]);
                self.push(Element::Node(s));
            }
            NodeKind::ExprStmt => {
                self.expr(c[0]);
                self.push(Element::Node(s));
            }
            NodeKind::IfStmt => {
                let then_block = self.new_block();
                let else_block = (c.len() == 3).then(|| self.new_block());
                let join = self.new_block();
                let on_false = else_block.unwrap_or(join);
                self.decide(s, c[0], then_block, on_false);
                self.current = then_block;
                self.stmt(c[1]);
                self.terminate(Terminator::Jump(join));
                if let Some(eb) = else_block {
                    self.current = eb;
                    self.stmt(c[2]);
                    self.terminate(Terminator::Jump(join));
                }
                self.current = join;
            }
            NodeKind::WhileStmt => {
                let header = self.new_block();
                self.terminate(Terminator::Jump(header));
                let body = self.new_block();
                let after = self.new_block();
                self.current = header;
                self.decide(s, c[0], body, after);
                self.current = body;
                self.stmt(c[1]);
                self.terminate(Terminator::Jump(header));
                self.current = after;
            }
            NodeKind::ReturnStmt => {
                if let Some(&e) = c.first() {
                    self.expr(e);
                }
                self.terminate(Terminator::Return(c.first().copied()));
                // Anything that follows is unreachable but still gets a home.
                self.current = self.new_block();
            }
            NodeKind::ForStmt { .. } => panic!("for loops must be desugared before CFG construction"),
            other => unreachable!("not a statement: {other:?}"),
        }
    }

    fn decide(&mut self, stmt: NodeId, cond: NodeId, then_block: BlockId, else_block: BlockId) {
        let first = self.blocks.len();
        let start = self.current;
        self.cond(cond, then_block, else_block);
        let decision = Decision {
            stmt,
            then_block,
            else_block,
        };
        let candidates = std::iter::once(start).chain((first..self.blocks.len()).map(|i| BlockId(i as u32)));
        let hits: Vec<BlockId> = candidates
            .filter(|b| match self.blocks[b.index()].terminator {
                Some(Terminator::CondBranch {
                    on_true, on_false, ..
                }) => [on_true, on_false]
                    .iter()
                    .any(|t| *t == then_block || *t == else_block),
                _ => false,
            })
            .collect();
        for b in hits {
            self.decisions.insert(b, decision);
        }
    }

    /// Lowers a condition into branches to `t` / `f`.
    fn cond(&mut self, e: NodeId, t: BlockId, f: BlockId) {
        let ast = self.ast;
        let c = ast.children(e);
        match ast.kind(e) {
            NodeKind::UnaryOp(UnOp::Not) => self.cond(c[0], f, t),
            NodeKind::BinaryOp(BinOp::And) => {
                let rhs = self.new_block();
                self.cond(c[0], rhs, f);
                self.current = rhs;
                self.cond(c[1], t, f);
            }
            NodeKind::BinaryOp(BinOp::Or) => {
                let rhs = self.new_block();
                self.cond(c[0], t, rhs);
                self.current = rhs;
                self.cond(c[1], t, f);
            }
            _ => {
                self.expr(e);
                self.terminate(Terminator::CondBranch {
                    cond: e,
                    on_true: t,
                    on_false: f,
                });
            }
        }
    }

    fn lvalue(&mut self, l: NodeId) {
        if let NodeKind::ArrayIndex = self.ast.kind(l) {
            self.expr(self.ast.children(l)[1]);
        }
    }

    fn expr(&mut self, e: NodeId) {
        let ast = self.ast;
        let c = ast.children(e);
        match ast.kind(e) {
            NodeKind::IntLit(_) | NodeKind::VarRef(_) => {}
            NodeKind::ArrayIndex => self.expr(c[1]),
            NodeKind::UnaryOp(_) => self.expr(c[0]),
            NodeKind::BinaryOp(op) if op.is_logical() => {
                let on_true = self.new_block();
                let on_false = self.new_block();
                let join = self.new_block();
                self.cond(e, on_true, on_false);
                for (block, value) in [(on_true, 1), (on_false, 0)] {
                    self.current = block;
                    self.push(Element::Bind { node: e, value });
                    self.terminate(Terminator::Jump(join));
                }
                self.current = join;
                return;
            }
            NodeKind::BinaryOp(_) => {
                self.expr(c[0]);
                self.expr(c[1]);
            }
            NodeKind::Call(_) => {
                let by_ref = self.ref_params(e);
                for (i, &arg) in c.iter().enumerate() {
                    if by_ref.get(i).copied().unwrap_or(false) {
                        self.lvalue(arg);
                    } else {
                        self.expr(arg);
                    }
                }
            }
            other => unreachable!("not an expression: {other:?}"),
        }
        self.push(Element::Node(e));
    }

    fn ref_params(&self, call: NodeId) -> Vec<bool> {
        match self.sema.callee(call) {
            Some(Callee::Function(f)) => self
                .ast
                .params(f)
                .iter()
                .map(|&p| matches!(self.ast.kind(p), NodeKind::ParamDecl { by_ref: true, .. }))
                .collect(),
            _ => Vec::new(),
        }
    }
}

/// Whether argument `index` of `call` binds to a reference parameter.
pub fn is_ref_argument(ast: &Ast, sema: &Semantics, call: NodeId, index: usize) -> bool {
    match sema.callee(call) {
        Some(Callee::Function(f)) => ast
            .params(f)
            .get(index)
            .is_some_and(|&p| matches!(ast.kind(p), NodeKind::ParamDecl { by_ref: true, .. })),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{analyze_semantics, desugar, parse, tokenize};

    fn cfg_of(src: &str) -> (Ast, Cfg) {
        let mut ast = parse(&tokenize(src, "t.mc").unwrap()).unwrap();
        analyze_semantics(&mut ast).unwrap();
        let mut ast = desugar(&ast);
        let sema = analyze_semantics(&mut ast).unwrap();
        let f = ast.functions().last().unwrap();
        let cfg = build_cfg(&ast, &sema, f);
        (ast, cfg)
    }

    #[test]
    fn diamond() {
        let (_, cfg) = cfg_of("void f(int c) { int a; if (c) a = 1; else a = 2; }");
        assert_eq!(cfg.len(), 5);
        assert!(matches!(
            cfg.block(cfg.entry).terminator,
            Terminator::CondBranch { .. }
        ));
        assert!(cfg.predecessors(cfg.entry).is_empty());
        assert!(cfg.successors(cfg.exit).is_empty());
    }

    #[test]
    fn loop_back_edge() {
        let (_, cfg) = cfg_of("void f(int c) { int b; while (c) b = 1; }");
        let header = cfg.successors(cfg.entry)[0];
        let Terminator::CondBranch { on_true: body, .. } = cfg.block(header).terminator else {
            panic!("header must branch");
        };
        assert_eq!(cfg.successors(body), vec![header]);
        assert!(cfg.predecessors(header).contains(&body));
    }

    #[test]
    fn short_circuit_condition() {
        let (ast, cfg) = cfg_of("void f(int a, int b) { int x; if (a && b) x = 1; }");
        for b in &cfg.blocks {
            for e in &b.elements {
                assert!(!matches!(
                    ast.kind(e.node()),
                    NodeKind::BinaryOp(BinOp::And | BinOp::Or)
                ));
            }
        }
        // b is evaluated in its own block, reached only on a's true edge.
        let Terminator::CondBranch { on_true, .. } = cfg.block(cfg.entry).terminator else {
            panic!()
        };
        assert!(matches!(
            cfg.block(on_true).terminator,
            Terminator::CondBranch { .. }
        ));
    }

    #[test]
    fn not_swaps_targets() {
        let (ast, cfg) = cfg_of("void f(int a) { int x; if (!a) x = 1; else x = 2; }");
        let Terminator::CondBranch {
            cond,
            on_true,
            on_false,
        } = cfg.block(cfg.entry).terminator
        else {
            panic!()
        };
        assert!(matches!(ast.kind(cond), NodeKind::VarRef(_)));
        let d = cfg.decision(cfg.entry).unwrap();
        assert_eq!(d.then_block, on_false);
        assert_eq!(d.else_block, on_true);
    }

    #[test]
    fn code_after_return_is_unreachable() {
        let (_, cfg) = cfg_of("int f() { return 1; int y = 2; }");
        let dead: Vec<_> = cfg
            .blocks
            .iter()
            .filter(|b| !cfg.is_reachable(b.id))
            .collect();
        assert_eq!(dead.len(), 1);
        assert_eq!(dead[0].elements.len(), 2);
        assert_eq!(cfg.reverse_post_order().len(), cfg.len() - 1);
    }
}
