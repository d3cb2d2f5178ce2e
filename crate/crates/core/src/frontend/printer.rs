//! Canonical source rendering of an [`Ast`].

use std::fmt::Write;

use super::ast::{Ast, NodeId, NodeKind, ReturnType};

pub fn print_ast(ast: &Ast) -> String {
    let mut p = Printer {
        ast,
        out: String::new(),
    };
    for (i, f) in ast.functions().enumerate() {
        if i > 0 {
            p.out.push('\n');
        }
        p.function(f);
    }
    p.out
}

/// Renders a single expression.
pub fn print_expr(ast: &Ast, e: NodeId) -> String {
    let mut p = Printer {
        ast,
        out: String::new(),
    };
    p.expr(e, 0);
    p.out
}

struct Printer<'a> {
    ast: &'a Ast,
    out: String,
}

impl Printer<'_> {
    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn function(&mut self, f: NodeId) {
        let NodeKind::FunctionDecl { name, ret, .. } = self.ast.kind(f) else {
            unreachable!()
        };
        let ret = match ret {
            ReturnType::Int => "int",
            ReturnType::Void => "void",
        };
        let params: Vec<String> = self
            .ast
            .params(f)
            .iter()
            .map(|&p| match self.ast.kind(p) {
                NodeKind::ParamDecl { name, by_ref } => {
                    format!("int {}{}", if *by_ref { "&" } else { "" }, name)
                }
                _ => unreachable!(),
            })
            .collect();
        write!(self.out, "{ret} {name}({})", params.join(", ")).unwrap();
        match self.ast.body(f) {
            Some(body) => {
                self.out.push(' ');
                self.block(body, 0);
                self.out.push('\n');
            }
            None => self.out.push_str(";\n"),
        }
    }

    fn block(&mut self, b: NodeId, depth: usize) {
        self.out.push_str("{\n");
        for &s in self.ast.children(b) {
            self.stmt(s, depth + 1);
        }
        self.indent(depth);
        self.out.push('}');
    }

    /// Writes a statement on its own line(s), indented to `depth`.
    fn stmt(&mut self, s: NodeId, depth: usize) {
        self.indent(depth);
        self.stmt_inline(s, depth);
        self.out.push('\n');
    }

    fn stmt_inline(&mut self, s: NodeId, depth: usize) {
        let children = self.ast.children(s);
        match self.ast.kind(s) {
            NodeKind::Block => self.block(s, depth),
            NodeKind::VarDecl { name, array_len } => {
                write!(self.out, "int {name}").unwrap();
                if let Some(n) = array_len {
                    write!(self.out, "[{n}]").unwrap();
                }
                if let Some(&init) = children.first() {
                    self.out.push_str(" = ");
                    self.expr(init, 0);
                }
                self.out.push(';');
            }
            NodeKind::IfStmt => {
                self.out.push_str("if (");
                self.expr(children[0], 0);
                self.out.push_str(") ");
                self.branch(children[1], depth);
                if let Some(&e) = children.get(2) {
                    self.out.push_str(" else ");
                    self.branch(e, depth);
                }
            }
            NodeKind::WhileStmt => {
                self.out.push_str("while (");
                self.expr(children[0], 0);
                self.out.push_str(") ");
                self.branch(children[1], depth);
            }
            NodeKind::ForStmt {
                has_init,
                has_cond,
                has_step,
            } => {
                let mut i = 0;
                self.out.push_str("for (");
                if *has_init {
                    self.assign(children[i]);
                    i += 1;
                }
                self.out.push_str("; ");
                if *has_cond {
                    self.expr(children[i], 0);
                    i += 1;
                }
                self.out.push_str("; ");
                if *has_step {
                    self.assign(children[i]);
                    i += 1;
                }
                self.out.push_str(") ");
                self.branch(children[i], depth);
            }
            NodeKind::ReturnStmt => {
                self.out.push_str("return");
                if let Some(&e) = children.first() {
                    self.out.push(' ');
                    self.expr(e, 0);
                }
                self.out.push(';');
            }
            NodeKind::ExprStmt => {
                self.expr(children[0], 0);
                self.out.push(';');
            }
            NodeKind::AssignStmt(_) => {
                self.assign(s);
                self.out.push(';');
            }
            other => unreachable!("not a statement: {other:?}"),
        }
    }

    fn branch(&mut self, s: NodeId, depth: usize) {
        self.stmt_inline(s, depth);
    }

    fn assign(&mut self, s: NodeId) {
        let NodeKind::AssignStmt(op) = self.ast.kind(s) else {
            unreachable!()
        };
        let c = self.ast.children(s);
        self.expr(c[0], 0);
        write!(self.out, " {} ", op.as_str()).unwrap();
        self.expr(c[1], 0);
    }

    /// `min_prec` is the weakest operator that may appear unparenthesized.
    fn expr(&mut self, e: NodeId, min_prec: u8) {
        let c = self.ast.children(e);
        match self.ast.kind(e) {
            NodeKind::IntLit(v) if *v < 0 => write!(self.out, "({v})").unwrap(),
            NodeKind::IntLit(v) => write!(self.out, "{v}").unwrap(),
            NodeKind::VarRef(name) => self.out.push_str(name),
            NodeKind::ArrayIndex => {
                self.expr(c[0], 0);
                self.out.push('[');
                self.expr(c[1], 0);
                self.out.push(']');
            }
            NodeKind::Call(name) => {
                write!(self.out, "{name}(").unwrap();
                for (i, &a) in c.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.expr(a, 0);
                }
                self.out.push(')');
            }
            NodeKind::UnaryOp(op) => {
                self.out.push_str(op.as_str());
                self.expr(c[0], 7);
            }
            NodeKind::BinaryOp(op) => {
                let prec = op.precedence();
                let paren = prec < min_prec;
                if paren {
                    self.out.push('(');
                }
                self.expr(c[0], prec);
                write!(self.out, " {} ", op.as_str()).unwrap();
                // Left-associative: an equal-precedence right operand needs parens.
                self.expr(c[1], prec + 1);
                if paren {
                    self.out.push(')');
                }
            }
            other => unreachable!("not an expression: {other:?}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{lexer::tokenize, parser::parse};
    use super::*;

    fn roundtrip(src: &str) {
        let ast = parse(&tokenize(src, "a.mc").unwrap()).unwrap();
        let printed = print_ast(&ast);
        let again = parse(&tokenize(&printed, "b.mc").unwrap()).unwrap();
        assert!(
            ast.structurally_equal(ast.root(), &again, again.root()),
            "{printed}"
        );
    }

    #[test]
    fn parenthesization() {
        roundtrip("int f(int a, int b) { return (a - b) - (a - b) * -(a + 1) / !b; }");
        roundtrip("int f(int a) { return a || a && (a || a) == 1 < 2; }");
    }

    #[test]
    fn statements() {
        roundtrip(
            "void f(int &x); int g(int b, int &x) { int a[3]; if (b) x = b + 1; else if (x) { x = 42; } \
             while (b < 3) b += 1; for (;;) ; for (b = 0; b < 2; b -= 1) { a[b] = 1; } f(x); return a[0]; }",
        );
    }
}
