//! Scope and type checking.

use std::collections::{BTreeMap, HashMap};

use super::ast::{Ast, NodeId, NodeKind, ReturnType, SemaType};
use super::error::{FrontendError, SemaErrorKind};

/// Built-in functions every program may call without declaring them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Intrinsic {
    /// `input()`: an unknown integer.
    Input,
    /// `open()`: a fresh resource handle.
    Open,
    /// `close(h)`.
    Close,
    /// `sa_dump(e)`: prints the symbolic value of `e` during analysis.
    SaDump,
}

impl Intrinsic {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "input" => Intrinsic::Input,
            "open" => Intrinsic::Open,
            "close" => Intrinsic::Close,
            "sa_dump" => Intrinsic::SaDump,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Intrinsic::Input => "input",
            Intrinsic::Open => "open",
            Intrinsic::Close => "close",
            Intrinsic::SaDump => "sa_dump",
        }
    }

    fn arity(self) -> usize {
        match self {
            Intrinsic::Input | Intrinsic::Open => 0,
            Intrinsic::Close | Intrinsic::SaDump => 1,
        }
    }

    fn returns(self) -> SemaType {
        match self {
            Intrinsic::Input | Intrinsic::Open => SemaType::Int,
            Intrinsic::Close | Intrinsic::SaDump => SemaType::Void,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Callee {
    Function(NodeId),
    Intrinsic(Intrinsic),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTableEntry {
    pub name: String,
    pub decl: NodeId,
    pub ty: SemaType,
    pub scope_depth: u32,
}

/// Name resolution results for one translation unit.
#[derive(Debug, Clone, Default)]
pub struct Semantics {
    /// `VarRef` node to the declaration it names.
    pub bindings: HashMap<NodeId, NodeId>,
    pub calls: HashMap<NodeId, Callee>,
    /// Function name to its definition, or its prototype when no body exists.
    pub functions: BTreeMap<String, NodeId>,
    /// Every variable and parameter declaration, in declaration order.
    pub symbols: Vec<SymbolTableEntry>,
    decl_index: HashMap<NodeId, usize>,
    owner: HashMap<NodeId, NodeId>,
}

impl Semantics {
    pub fn decl_of(&self, var_ref: NodeId) -> Option<NodeId> {
        self.bindings.get(&var_ref).copied()
    }

    pub fn symbol(&self, decl: NodeId) -> Option<&SymbolTableEntry> {
        self.decl_index.get(&decl).map(|&i| &self.symbols[i])
    }

    pub fn decl_type(&self, decl: NodeId) -> Option<SemaType> {
        self.symbol(decl).map(|s| s.ty)
    }

    /// The function a variable or parameter declaration belongs to.
    pub fn owner_function(&self, decl: NodeId) -> Option<NodeId> {
        self.owner.get(&decl).copied()
    }

    pub fn callee(&self, call: NodeId) -> Option<Callee> {
        self.calls.get(&call).copied()
    }

    /// Declarations (params and locals) of `func`, in declaration order.
    pub fn decls_of_function(&self, func: NodeId) -> Vec<NodeId> {
        self.symbols
            .iter()
            .filter(|s| self.owner.get(&s.decl) == Some(&func))
            .map(|s| s.decl)
            .collect()
    }
}

fn err<T>(ast: &Ast, at: NodeId, kind: SemaErrorKind, message: String) -> Result<T, FrontendError> {
    Err(FrontendError::Semantic {
        kind,
        loc: ast.loc(at).clone(),
        message,
    })
}

struct Signature {
    ret: ReturnType,
    params: Vec<bool>,
}

fn signature(ast: &Ast, func: NodeId) -> Signature {
    let ret = match ast.kind(func) {
        NodeKind::FunctionDecl { ret, .. } => *ret,
        _ => unreachable!(),
    };
    let params = ast
        .params(func)
        .iter()
        .map(|&p| matches!(ast.kind(p), NodeKind::ParamDecl { by_ref: true, .. }))
        .collect();
    Signature { ret, params }
}

/// Resolves names, checks types and annotates every expression node with its
/// [`SemaType`].
pub fn analyze_semantics(ast: &mut Ast) -> Result<Semantics, FrontendError> {
    let mut sema = Semantics::default();

    let mut defined: HashMap<String, NodeId> = HashMap::new();
    for func in ast.functions().collect::<Vec<_>>() {
        let name = ast.function_name(func).to_string();
        if Intrinsic::from_name(&name).is_some() {
            return err(
                ast,
                func,
                SemaErrorKind::Redefinition,
                format!("'{name}' is a built-in function"),
            );
        }
        let external = ast.body(func).is_none();
        if let Some(&prev) = sema.functions.get(&name) {
            let (a, b) = (signature(ast, prev), signature(ast, func));
            if a.ret != b.ret || a.params != b.params {
                return err(
                    ast,
                    func,
                    SemaErrorKind::TypeMismatch,
                    format!("conflicting declaration of '{name}'"),
                );
            }
            if !external {
                if defined.contains_key(&name) {
                    return err(
                        ast,
                        func,
                        SemaErrorKind::Redefinition,
                        format!("redefinition of function '{name}'"),
                    );
                }
                defined.insert(name.clone(), func);
                sema.functions.insert(name, func);
            }
        } else {
            if !external {
                defined.insert(name.clone(), func);
            }
            sema.functions.insert(name, func);
        }
    }

    for func in ast.functions().collect::<Vec<_>>() {
        let mut checker = Checker {
            ast: &mut *ast,
            sema: &mut sema,
            scopes: vec![HashMap::new()],
            func,
        };
        checker.function()?;
    }
    Ok(sema)
}

struct Checker<'a> {
    ast: &'a mut Ast,
    sema: &'a mut Semantics,
    scopes: Vec<HashMap<String, NodeId>>,
    func: NodeId,
}

impl Checker<'_> {
    fn declare(&mut self, decl: NodeId, ty: SemaType) -> Result<(), FrontendError> {
        let name = self.ast.decl_name(decl).to_string();
        let scope = self.scopes.last_mut().expect("scope stack never empty");
        if scope.contains_key(&name) {
            return err(
                self.ast,
                decl,
                SemaErrorKind::Redefinition,
                format!("redefinition of '{name}'"),
            );
        }
        scope.insert(name.clone(), decl);
        self.sema.decl_index.insert(decl, self.sema.symbols.len());
        self.sema.symbols.push(SymbolTableEntry {
            name,
            decl,
            ty,
            scope_depth: (self.scopes.len() - 1) as u32,
        });
        self.sema.owner.insert(decl, self.func);
        self.ast.node_mut(decl).ty = Some(ty);
        Ok(())
    }

    fn lookup(&self, name: &str) -> Option<NodeId> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn function(&mut self) -> Result<(), FrontendError> {
        let func = self.func;
        let ret = match self.ast.kind(func) {
            NodeKind::FunctionDecl { ret, .. } => *ret,
            _ => unreachable!(),
        };
        self.ast.node_mut(func).ty = Some(match ret {
            ReturnType::Int => SemaType::Int,
            ReturnType::Void => SemaType::Void,
        });
        for p in self.ast.params(func).to_vec() {
            let by_ref = matches!(self.ast.kind(p), NodeKind::ParamDecl { by_ref: true, .. });
            self.declare(p, if by_ref { SemaType::RefInt } else { SemaType::Int })?;
        }
        if let Some(body) = self.ast.body(func) {
            // The outermost block shares the parameters' scope.
            for s in self.ast.children(body).to_vec() {
                self.stmt(s, ret)?;
            }
        }
        Ok(())
    }

    fn stmt(&mut self, s: NodeId, ret: ReturnType) -> Result<(), FrontendError> {
        let children = self.ast.children(s).to_vec();
        match self.ast.kind(s).clone() {
            NodeKind::VarDecl { name, array_len } => {
                let ty = match array_len {
                    Some(n) if n <= 0 => {
                        return err(
                            self.ast,
                            s,
                            SemaErrorKind::TypeMismatch,
                            format!("array '{name}' must have a positive length"),
                        )
                    }
                    Some(n) => SemaType::IntArray(n),
                    None => SemaType::Int,
                };
                if let Some(&init) = children.first() {
                    if array_len.is_some() {
                        return err(
                            self.ast,
                            init,
                            SemaErrorKind::TypeMismatch,
                            format!("array '{name}' cannot be initialized with a scalar"),
                        );
                    }
                    self.expect_int(init)?;
                }
                // Declared after the initializer: `int x = x;` sees the outer x.
                self.declare(s, ty)?;
            }
            NodeKind::Block => {
                self.scopes.push(HashMap::new());
                for c in children {
                    self.stmt(c, ret)?;
                }
                self.scopes.pop();
            }
            NodeKind::IfStmt | NodeKind::WhileStmt => {
                self.expect_int(children[0])?;
                for &c in &children[1..] {
                    self.scoped_stmt(c, ret)?;
                }
            }
            NodeKind::ForStmt {
                has_init,
                has_cond,
                has_step,
            } => {
                let mut i = 0;
                if has_init {
                    self.stmt(children[i], ret)?;
                    i += 1;
                }
                if has_cond {
                    self.expect_int(children[i])?;
                    i += 1;
                }
                if has_step {
                    self.stmt(children[i], ret)?;
                    i += 1;
                }
                self.scoped_stmt(children[i], ret)?;
            }
            NodeKind::ReturnStmt => match (ret, children.first()) {
                (ReturnType::Int, Some(&e)) => self.expect_int(e)?,
                (ReturnType::Void, None) => {}
                (ReturnType::Int, None) => {
                    return err(
                        self.ast,
                        s,
                        SemaErrorKind::TypeMismatch,
                        "non-void function must return a value".into(),
                    )
                }
                (ReturnType::Void, Some(&e)) => {
                    return err(
                        self.ast,
                        e,
                        SemaErrorKind::TypeMismatch,
                        "void function cannot return a value".into(),
                    )
                }
            },
            NodeKind::ExprStmt => {
                self.expr(children[0])?;
            }
            NodeKind::AssignStmt(_) => {
                let (target, value) = (children[0], children[1]);
                let t = self.expr(target)?;
                if !self.is_lvalue(target) || t != SemaType::Int {
                    return err(
                        self.ast,
                        target,
                        SemaErrorKind::TypeMismatch,
                        format!("cannot assign to a value of type {t}"),
                    );
                }
                self.expect_int(value)?;
            }
            other => unreachable!("unexpected statement {other:?}"),
        }
        Ok(())
    }

    /// A branch body that is not a block still gets its own scope.
    fn scoped_stmt(&mut self, s: NodeId, ret: ReturnType) -> Result<(), FrontendError> {
        self.scopes.push(HashMap::new());
        let r = self.stmt(s, ret);
        self.scopes.pop();
        r
    }

    fn is_lvalue(&self, e: NodeId) -> bool {
        match self.ast.kind(e) {
            NodeKind::VarRef(_) => matches!(self.ast.ty(e), Some(SemaType::Int)),
            NodeKind::ArrayIndex => true,
            _ => false,
        }
    }

    fn expect_int(&mut self, e: NodeId) -> Result<(), FrontendError> {
        let t = self.expr(e)?;
        if t != SemaType::Int {
            return err(
                self.ast,
                e,
                SemaErrorKind::TypeMismatch,
                format!("expected int, found {t}"),
            );
        }
        Ok(())
    }

    fn expr(&mut self, e: NodeId) -> Result<SemaType, FrontendError> {
        let children = self.ast.children(e).to_vec();
        let ty = match self.ast.kind(e).clone() {
            NodeKind::IntLit(_) => SemaType::Int,
            NodeKind::VarRef(name) => {
                let Some(decl) = self.lookup(&name) else {
                    return err(
                        self.ast,
                        e,
                        SemaErrorKind::UndeclaredIdentifier,
                        format!("use of undeclared identifier '{name}'"),
                    );
                };
                self.sema.bindings.insert(e, decl);
                match self.sema.decl_type(decl).expect("declared") {
                    // References are read through transparently.
                    SemaType::RefInt => SemaType::Int,
                    t => t,
                }
            }
            NodeKind::ArrayIndex => {
                let base_ty = self.expr(children[0])?;
                if !matches!(base_ty, SemaType::IntArray(_)) {
                    return err(
                        self.ast,
                        children[0],
                        SemaErrorKind::IndexOfNonArray,
                        format!("subscripted value of type {base_ty} is not an array"),
                    );
                }
                self.expect_int(children[1])?;
                SemaType::Int
            }
            NodeKind::UnaryOp(_) => {
                self.expect_int(children[0])?;
                SemaType::Int
            }
            NodeKind::BinaryOp(_) => {
                self.expect_int(children[0])?;
                self.expect_int(children[1])?;
                SemaType::Int
            }
            NodeKind::Call(name) => self.call(e, &name, &children)?,
            other => unreachable!("not an expression: {other:?}"),
        };
        self.ast.node_mut(e).ty = Some(ty);
        Ok(ty)
    }

    fn call(&mut self, e: NodeId, name: &str, args: &[NodeId]) -> Result<SemaType, FrontendError> {
        let (callee, by_ref, ret) = if let Some(intr) = Intrinsic::from_name(name) {
            (
                Callee::Intrinsic(intr),
                vec![false; intr.arity()],
                intr.returns(),
            )
        } else if let Some(&f) = self.sema.functions.get(name) {
            let sig = signature(self.ast, f);
            let ret = match sig.ret {
                ReturnType::Int => SemaType::Int,
                ReturnType::Void => SemaType::Void,
            };
            (Callee::Function(f), sig.params, ret)
        } else {
            return err(
                self.ast,
                e,
                SemaErrorKind::UndeclaredIdentifier,
                format!("call to undeclared function '{name}'"),
            );
        };
        if args.len() != by_ref.len() {
            return err(
                self.ast,
                e,
                SemaErrorKind::ArityMismatch,
                format!(
                    "'{name}' expects {} argument(s), {} given",
                    by_ref.len(),
                    args.len()
                ),
            );
        }
        for (&arg, &is_ref) in args.iter().zip(&by_ref) {
            self.expect_int(arg)?;
            if is_ref && !self.is_lvalue(arg) {
                return err(
                    self.ast,
                    arg,
                    SemaErrorKind::NonLvalueRefArgument,
                    format!("argument to reference parameter of '{name}' must be an lvalue"),
                );
            }
        }
        self.sema.calls.insert(e, callee);
        Ok(ret)
    }
}
