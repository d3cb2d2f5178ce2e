//! Rewrites `for` loops and compound assignments into the core statement set.

use std::collections::HashSet;

use super::ast::{AssignOp, Ast, NodeId, NodeKind};

/// Returns a copy of `ast` with every `for` loop turned into a `while` loop
/// and every `x op= e` turned into `x = x op e`.
///
/// Array targets of compound assignments have their index hoisted into a fresh
/// temporary so that it is evaluated exactly once. Node ids of untouched nodes
/// are preserved. The result must be re-checked with
/// [`analyze_semantics`](super::sema::analyze_semantics) to type the new nodes.
pub fn desugar(ast: &Ast) -> Ast {
    let mut out = ast.clone();
    let taken: HashSet<String> = ast
        .preorder(ast.root())
        .into_iter()
        .filter_map(|n| match ast.kind(n) {
            NodeKind::VarRef(name) | NodeKind::Call(name) => Some(name.clone()),
            NodeKind::VarDecl { name, .. }
            | NodeKind::ParamDecl { name, .. }
            | NodeKind::FunctionDecl { name, .. } => Some(name.clone()),
            _ => None,
        })
        .collect();
    let mut rw = Rewriter {
        ast: &mut out,
        taken,
        next_temp: 0,
    };
    for func in rw.ast.functions().collect::<Vec<_>>() {
        if let Some(body) = rw.ast.body(func) {
            rw.stmt(body);
        }
    }
    out
}

struct Rewriter<'a> {
    ast: &'a mut Ast,
    taken: HashSet<String>,
    next_temp: u32,
}

impl Rewriter<'_> {
    fn fresh_name(&mut self) -> String {
        loop {
            let name = format!("__sa_tmp{}", self.next_temp);
            self.next_temp += 1;
            if self.taken.insert(name.clone()) {
                return name;
            }
        }
    }

    fn copy_lvalue(&mut self, id: NodeId) -> NodeId {
        let node = self.ast.node(id).clone();
        let children = node
            .children
            .iter()
            .map(|&c| self.copy_lvalue(c))
            .collect();
        self.ast.add(node.kind, children, node.loc)
    }

    fn stmt(&mut self, id: NodeId) -> NodeId {
        let children = self.ast.children(id).to_vec();
        match self.ast.kind(id).clone() {
            NodeKind::Block | NodeKind::IfStmt | NodeKind::WhileStmt => {
                let is_block = matches!(self.ast.kind(id), NodeKind::Block);
                let new: Vec<_> = children
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        // Conditions are expressions and stay as they are.
                        if !is_block && i == 0 {
                            c
                        } else {
                            self.stmt(c)
                        }
                    })
                    .collect();
                self.ast.node_mut(id).children = new;
                id
            }
            NodeKind::ForStmt {
                has_init,
                has_cond,
                has_step,
            } => self.for_loop(id, &children, has_init, has_cond, has_step),
            NodeKind::AssignStmt(op) => match op.binary() {
                None => id,
                Some(bin) => self.compound(id, &children, bin),
            },
            _ => id,
        }
    }

    fn for_loop(
        &mut self,
        id: NodeId,
        children: &[NodeId],
        has_init: bool,
        has_cond: bool,
        has_step: bool,
    ) -> NodeId {
        let loc = self.ast.loc(id).clone();
        let mut parts = children.iter().copied();
        let init = has_init.then(|| parts.next().unwrap());
        let cond = has_cond.then(|| parts.next().unwrap());
        let step = has_step.then(|| parts.next().unwrap());
        let body = parts.next().unwrap();

        let init = init.map(|s| self.stmt(s));
        let step = step.map(|s| self.stmt(s));
        let body = self.stmt(body);
        let cond = cond.unwrap_or_else(|| self.ast.add(NodeKind::IntLit(1), vec![], loc.clone()));

        // The step joins the body's statement list unless the body declares
        // names the step could accidentally resolve to.
        let flat = matches!(self.ast.kind(body), NodeKind::Block)
            && !self
                .ast
                .children(body)
                .iter()
                .any(|&c| matches!(self.ast.kind(c), NodeKind::VarDecl { .. }));
        let mut loop_stmts = if flat {
            self.ast.children(body).to_vec()
        } else {
            vec![body]
        };
        loop_stmts.extend(step);
        let loop_body = self.ast.add(NodeKind::Block, loop_stmts, loc.clone());
        let while_loop = self
            .ast
            .add(NodeKind::WhileStmt, vec![cond, loop_body], loc.clone());
        let mut outer = Vec::new();
        outer.extend(init);
        outer.push(while_loop);
        self.ast.add(NodeKind::Block, outer, loc)
    }

    fn compound(&mut self, id: NodeId, children: &[NodeId], bin: super::ast::BinOp) -> NodeId {
        let (target, value) = (children[0], children[1]);
        let loc = self.ast.loc(id).clone();
        let op_loc = self.ast.loc(value).clone();
        match self.ast.kind(target).clone() {
            NodeKind::VarRef(_) => {
                let read = self.copy_lvalue(target);
                let rhs = self
                    .ast
                    .add(NodeKind::BinaryOp(bin), vec![read, value], op_loc);
                let node = self.ast.node_mut(id);
                node.kind = NodeKind::AssignStmt(AssignOp::Assign);
                node.children = vec![target, rhs];
                id
            }
            NodeKind::ArrayIndex => {
                let base = self.ast.children(target)[0];
                let index = self.ast.children(target)[1];
                let index_loc = self.ast.loc(index).clone();
                let temp = self.fresh_name();
                let decl = self.ast.add(
                    NodeKind::VarDecl {
                        name: temp.clone(),
                        array_len: None,
                    },
                    vec![index],
                    index_loc.clone(),
                );
                let mk_elem = |rw: &mut Self| {
                    let b = rw.copy_lvalue(base);
                    let t = rw
                        .ast
                        .add(NodeKind::VarRef(temp.clone()), vec![], index_loc.clone());
                    rw.ast
                        .add(NodeKind::ArrayIndex, vec![b, t], rw.ast.loc(target).clone())
                };
                let write = mk_elem(self);
                let read = mk_elem(self);
                let rhs = self
                    .ast
                    .add(NodeKind::BinaryOp(bin), vec![read, value], op_loc);
                let node = self.ast.node_mut(id);
                node.kind = NodeKind::AssignStmt(AssignOp::Assign);
                node.children = vec![write, rhs];
                self.ast.add(NodeKind::Block, vec![decl, id], loc)
            }
            other => unreachable!("invalid assignment target {other:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{lexer::tokenize, parser::parse, printer::print_ast, sema::analyze_semantics};
    use super::*;

    fn desugared(src: &str) -> (Ast, Ast) {
        let mut ast = parse(&tokenize(src, "t.mc").unwrap()).unwrap();
        analyze_semantics(&mut ast).unwrap();
        let mut out = desugar(&ast);
        analyze_semantics(&mut out).expect("desugared output re-checks");
        (ast, out)
    }

    #[test]
    fn for_becomes_while() {
        let (_, out) = desugared("void f() { int i; int s = 0; for (i = 0; i < 3; i += 1) s += i; }");
        let text = print_ast(&out);
        assert!(text.contains("i = 0;"), "{text}");
        assert!(text.contains("while (i < 3) {"), "{text}");
        assert!(text.contains("s = s + i;"), "{text}");
        assert!(text.contains("i = i + 1;"), "{text}");
        assert!(!out
            .preorder(out.root())
            .iter()
            .any(|&n| matches!(out.kind(n), NodeKind::ForStmt { .. })));
    }

    #[test]
    fn identity_without_sugar() {
        let (orig, out) = desugared("int f(int a) { int b = a * 2; if (b) b = 1; return b; }");
        assert!(orig.structurally_equal(orig.root(), &out, out.root()));
    }

    #[test]
    fn array_index_hoisted() {
        let (_, out) = desugared("void f() { int a[3]; a[input()] += 1; }");
        let calls = out
            .preorder(out.root())
            .into_iter()
            .filter(|&n| matches!(out.kind(n), NodeKind::Call(_)))
            .count();
        assert_eq!(calls, 1);
        let text = print_ast(&out);
        assert!(text.contains("int __sa_tmp0 = input();"), "{text}");
        assert!(text.contains("a[__sa_tmp0] = a[__sa_tmp0] + 1;"), "{text}");
    }

    #[test]
    fn idempotent() {
        let (_, once) = desugared(
            "void f() { int a[2]; int i; for (i = 0; i < 2; i += 1) { a[i] = 0; a[i] *= 2; } for (;;) { return; } }",
        );
        let twice = desugar(&once);
        assert!(once.structurally_equal(once.root(), &twice, twice.root()));
    }
}
