//! Recursive-descent parser for MiniC. Stops at the first syntax error.

use super::ast::{AssignOp, Ast, BinOp, NodeId, NodeKind, ReturnType, SourceLocation, UnOp};
use super::error::FrontendError;
use super::lexer::{Token, TokenKind};

pub fn parse(tokens: &[Token]) -> Result<Ast, FrontendError> {
    assert!(
        matches!(tokens.last(), Some(t) if t.kind == TokenKind::EndOfFile),
        "token stream must end with EndOfFile"
    );
    let mut p = Parser {
        tokens,
        pos: 0,
        ast: Ast::new(),
    };
    let root = p.program()?;
    p.ast.set_root(root);
    Ok(p.ast)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    ast: Ast,
}

type PResult<T> = Result<T, FrontendError>;

fn describe(tok: &Token) -> String {
    match tok.kind {
        TokenKind::EndOfFile => "end of file".into(),
        TokenKind::Identifier => format!("identifier '{}'", tok.text),
        TokenKind::IntLiteral => format!("integer literal '{}'", tok.text),
        _ => format!("'{}'", tok.text),
    }
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &'t Token {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn advance(&mut self) -> &'t Token {
        let t = &self.tokens[self.pos];
        if t.kind != TokenKind::EndOfFile {
            self.pos += 1;
        }
        t
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is(text)
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        let tok = self.peek();
        Err(FrontendError::Syntax {
            loc: tok.loc.clone(),
            expected: expected.into(),
            found: describe(tok),
        })
    }

    fn expect(&mut self, text: &str) -> PResult<&'t Token> {
        if self.at(text) {
            Ok(self.advance())
        } else {
            self.error(format!("'{text}'"))
        }
    }

    fn ident(&mut self) -> PResult<&'t Token> {
        if self.peek().kind == TokenKind::Identifier {
            Ok(self.advance())
        } else {
            self.error("identifier")
        }
    }

    fn add(&mut self, kind: NodeKind, children: Vec<NodeId>, loc: &SourceLocation) -> NodeId {
        self.ast.add(kind, children, loc.clone())
    }

    fn program(&mut self) -> PResult<NodeId> {
        let loc = self.peek().loc.clone();
        let mut funcs = Vec::new();
        while self.peek().kind != TokenKind::EndOfFile {
            funcs.push(self.function()?);
        }
        Ok(self.add(NodeKind::Program, funcs, &loc))
    }

    fn function(&mut self) -> PResult<NodeId> {
        let ret = if self.eat("int") {
            ReturnType::Int
        } else if self.eat("void") {
            ReturnType::Void
        } else {
            return self.error("'int' or 'void'");
        };
        let name = self.ident()?;
        self.expect("(")?;
        let mut children = Vec::new();
        if !self.at(")") {
            loop {
                children.push(self.param()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect(")")?;
        let external = if self.eat(";") {
            true
        } else if self.at("{") {
            children.push(self.block()?);
            false
        } else {
            return self.error("'{' or ';'");
        };
        Ok(self.add(
            NodeKind::FunctionDecl {
                name: name.text.clone(),
                ret,
                external,
            },
            children,
            &name.loc,
        ))
    }

    fn param(&mut self) -> PResult<NodeId> {
        self.expect("int")?;
        let by_ref = self.eat("&");
        let name = self.ident()?;
        Ok(self.add(
            NodeKind::ParamDecl {
                name: name.text.clone(),
                by_ref,
            },
            vec![],
            &name.loc,
        ))
    }

    fn block(&mut self) -> PResult<NodeId> {
        let open = self.expect("{")?;
        let mut stmts = Vec::new();
        while !self.at("}") {
            if self.peek().kind == TokenKind::EndOfFile {
                return self.error("'}'");
            }
            stmts.push(self.stmt()?);
        }
        self.advance();
        Ok(self.add(NodeKind::Block, stmts, &open.loc))
    }

    fn stmt(&mut self) -> PResult<NodeId> {
        let tok = self.peek();
        match tok.kind {
            TokenKind::Keyword => match tok.text.as_str() {
                "int" => self.decl(),
                "if" => {
                    self.advance();
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    let then = self.stmt()?;
                    let mut children = vec![cond, then];
                    if self.eat("else") {
                        children.push(self.stmt()?);
                    }
                    Ok(self.add(NodeKind::IfStmt, children, &tok.loc))
                }
                "while" => {
                    self.advance();
                    self.expect("(")?;
                    let cond = self.expr()?;
                    self.expect(")")?;
                    let body = self.stmt()?;
                    Ok(self.add(NodeKind::WhileStmt, vec![cond, body], &tok.loc))
                }
                "for" => self.for_stmt(),
                "return" => {
                    self.advance();
                    let mut children = Vec::new();
                    if !self.at(";") {
                        children.push(self.expr()?);
                    }
                    self.expect(";")?;
                    Ok(self.add(NodeKind::ReturnStmt, children, &tok.loc))
                }
                _ => self.error("statement"),
            },
            TokenKind::Punctuator if tok.text == "{" => self.block(),
            TokenKind::Punctuator if tok.text == ";" => {
                self.advance();
                Ok(self.add(NodeKind::Block, vec![], &tok.loc))
            }
            TokenKind::Identifier => {
                let s = if self.peek_at(1).is("(") {
                    let call = self.primary()?;
                    self.add(NodeKind::ExprStmt, vec![call], &tok.loc)
                } else {
                    self.assign()?
                };
                self.expect(";")?;
                Ok(s)
            }
            _ => self.error("statement"),
        }
    }

    fn for_stmt(&mut self) -> PResult<NodeId> {
        let kw = self.advance();
        self.expect("(")?;
        let mut children = Vec::new();
        let has_init = !self.at(";");
        if has_init {
            children.push(self.assign()?);
        }
        self.expect(";")?;
        let has_cond = !self.at(";");
        if has_cond {
            children.push(self.expr()?);
        }
        self.expect(";")?;
        let has_step = !self.at(")");
        if has_step {
            children.push(self.assign()?);
        }
        self.expect(")")?;
        children.push(self.stmt()?);
        Ok(self.add(
            NodeKind::ForStmt {
                has_init,
                has_cond,
                has_step,
            },
            children,
            &kw.loc,
        ))
    }

    fn decl(&mut self) -> PResult<NodeId> {
        self.expect("int")?;
        let name = self.ident()?;
        let mut array_len = None;
        if self.eat("[") {
            let lit = self.peek();
            if lit.kind != TokenKind::IntLiteral {
                return self.error("array length");
            }
            self.advance();
            array_len = Some(lit.text.parse::<i64>().expect("lexer validated literal"));
            self.expect("]")?;
        }
        let mut children = Vec::new();
        if self.eat("=") {
            children.push(self.expr()?);
        }
        self.expect(";")?;
        Ok(self.add(
            NodeKind::VarDecl {
                name: name.text.clone(),
                array_len,
            },
            children,
            &name.loc,
        ))
    }

    fn lvalue(&mut self) -> PResult<NodeId> {
        let name = self.ident()?;
        let var = self.add(NodeKind::VarRef(name.text.clone()), vec![], &name.loc);
        if self.eat("[") {
            let index = self.expr()?;
            self.expect("]")?;
            Ok(self.add(NodeKind::ArrayIndex, vec![var, index], &name.loc))
        } else {
            Ok(var)
        }
    }

    fn assign(&mut self) -> PResult<NodeId> {
        let loc = self.peek().loc.clone();
        let target = self.lvalue()?;
        let op = match self.peek().text.as_str() {
            "=" => AssignOp::Assign,
            "+=" => AssignOp::Add,
            "-=" => AssignOp::Sub,
            "*=" => AssignOp::Mul,
            "/=" => AssignOp::Div,
            _ => return self.error("assignment operator"),
        };
        self.advance();
        let value = self.expr()?;
        Ok(self.add(NodeKind::AssignStmt(op), vec![target, value], &loc))
    }

    pub(crate) fn expr(&mut self) -> PResult<NodeId> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinOp> {
        let tok = self.peek();
        if tok.kind != TokenKind::Punctuator {
            return None;
        }
        Some(match tok.text.as_str() {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            _ => return None,
        })
    }

    // Precedence climbing; every level is left-associative.
    fn binary(&mut self, min_prec: u8) -> PResult<NodeId> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            if op.precedence() < min_prec {
                break;
            }
            let op_tok = self.advance();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = self.add(NodeKind::BinaryOp(op), vec![lhs, rhs], &op_tok.loc);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<NodeId> {
        let tok = self.peek();
        let op = if tok.is("-") {
            UnOp::Neg
        } else if tok.is("!") {
            UnOp::Not
        } else {
            return self.primary();
        };
        self.advance();
        let operand = self.unary()?;
        Ok(self.add(NodeKind::UnaryOp(op), vec![operand], &tok.loc))
    }

    fn primary(&mut self) -> PResult<NodeId> {
        let tok = self.peek();
        match tok.kind {
            TokenKind::IntLiteral => {
                self.advance();
                let value = tok.text.parse::<i64>().expect("lexer validated literal");
                Ok(self.add(NodeKind::IntLit(value), vec![], &tok.loc))
            }
            TokenKind::Identifier => {
                if self.peek_at(1).is("(") {
                    self.advance();
                    self.advance();
                    let mut args = Vec::new();
                    if !self.at(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(",") {
                                break;
                            }
                        }
                    }
                    self.expect(")")?;
                    Ok(self.add(NodeKind::Call(tok.text.clone()), args, &tok.loc))
                } else {
                    self.lvalue()
                }
            }
            TokenKind::Punctuator if tok.text == "(" => {
                self.advance();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => self.error("expression"),
        }
    }
}
