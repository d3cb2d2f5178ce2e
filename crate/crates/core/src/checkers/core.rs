//! Checks for critical defects: each one ends the path it is found on.

use crate::constraints::{assume, assume_in_range, query_zeroness, QueryValue, RangeSet, Relation, Zeroness};
use crate::frontend::{BinOp, Callee, NodeId, NodeKind, SemaType};
use crate::symexec::{Checker, CheckerContext, SVal};

pub const DIV_ZERO: &str = "core.DivideByZero";
pub const UNINIT_READ: &str = "core.UninitRead";
pub const ARRAY_BOUNDS: &str = "core.ArrayBounds";

/// Division or modulo by a definite zero. A divisor that may be zero is
/// assumed non-zero from then on.
pub struct DivideByZero;

impl Checker for DivideByZero {
    fn id(&self) -> &'static str {
        DIV_ZERO
    }

    fn pre_stmt(&self, ctx: &mut CheckerContext<'_>, node: NodeId) {
        let ast = ctx.ast();
        let what = match ast.kind(node) {
            NodeKind::BinaryOp(BinOp::Div) => "Division",
            NodeKind::BinaryOp(BinOp::Rem) => "Modulo",
            _ => return,
        };
        let divisor = ast.children(node)[1];
        let zeroness = match ctx.value(divisor) {
            SVal::Int(v) => query_zeroness(&ctx.state.constraints, QueryValue::Concrete(v)),
            SVal::Sym(e) => query_zeroness(&ctx.state.constraints, QueryValue::Symbolic(e)),
            _ => return,
        };
        match zeroness {
            Zeroness::OnlyZero => {
                let track = ctx.track_var(divisor);
                ctx.report(DIV_ZERO, format!("{what} by zero"), ast.loc(node).clone(), track);
                ctx.sink();
            }
            Zeroness::MaybeZero => {
                let e = ctx.value(divisor).as_sym().expect("only symbols are undecided");
                let refined = assume(&ctx.state.constraints, e, Relation::Ne, 0, true);
                ctx.state.constraints = refined.expect("a maybe-zero value can be non-zero");
            }
            Zeroness::NeverZero => {}
        }
    }
}

/// Read of storage that was never written on the current path.
pub struct UninitRead;

impl Checker for UninitRead {
    fn id(&self) -> &'static str {
        UNINIT_READ
    }

    fn post_stmt(&self, ctx: &mut CheckerContext<'_>, node: NodeId) {
        let ast = ctx.ast();
        let message = match ast.kind(node) {
            NodeKind::VarRef(name) => format!("Variable '{name}' is uninitialized when used"),
            NodeKind::ArrayIndex => {
                let base = ast.children(node)[0];
                format!("Element of array '{}' is uninitialized when used", var_name(ctx, base))
            }
            _ => return,
        };
        if ctx.value(node) != SVal::Undefined {
            return;
        }
        let track = match ast.kind(node) {
            NodeKind::VarRef(_) => ctx.track_var(node),
            _ => ctx.track_var(ast.children(node)[0]),
        };
        ctx.report(UNINIT_READ, message, ast.loc(node).clone(), track);
        ctx.sink();
    }
}

fn var_name(ctx: &CheckerContext<'_>, var_ref: NodeId) -> String {
    match ctx.ast().kind(var_ref) {
        NodeKind::VarRef(name) => name.clone(),
        _ => "?".into(),
    }
}

/// Array accesses whose index lies outside the declared extent. An index
/// that may be in range is assumed to be.
pub struct ArrayBounds;

impl Checker for ArrayBounds {
    fn id(&self) -> &'static str {
        ARRAY_BOUNDS
    }

    fn pre_stmt(&self, ctx: &mut CheckerContext<'_>, node: NodeId) {
        let ast = ctx.ast();
        let c = ast.children(node);
        // Elements evaluate rvalue accesses; lvalue accesses are resolved by
        // the assignment or call that consumes them.
        let mut accesses = Vec::new();
        match ast.kind(node) {
            NodeKind::ArrayIndex => accesses.push(node),
            NodeKind::AssignStmt(_) => accesses.push(c[0]),
            NodeKind::Call(_) => {
                if let Some(Callee::Function(_)) = ctx.unit.sema.callee(node) {
                    for (i, &arg) in c.iter().enumerate() {
                        if crate::cfg::is_ref_argument(ast, &ctx.unit.sema, node, i) {
                            accesses.push(arg);
                        }
                    }
                }
            }
            _ => return,
        }
        for access in accesses {
            if !matches!(ast.kind(access), NodeKind::ArrayIndex) {
                continue;
            }
            if !self.check(ctx, access) {
                return;
            }
        }
    }
}

impl ArrayBounds {
    /// False when the path was ended.
    fn check(&self, ctx: &mut CheckerContext<'_>, access: NodeId) -> bool {
        let ast = ctx.ast();
        let [base, index] = ast.children(access) else {
            return true;
        };
        let Some(SemaType::IntArray(n)) = ctx.unit.sema.decl_of(*base).and_then(|d| ctx.unit.sema.decl_type(d)) else {
            return true;
        };
        let valid = RangeSet::interval(0, n - 1);
        let out_of_bounds = match ctx.value(*index) {
            SVal::Int(v) => !valid.contains(v),
            SVal::Sym(e) => match assume_in_range(&ctx.state.constraints, e, &valid) {
                Some(refined) => {
                    ctx.state.constraints = refined;
                    false
                }
                None => true,
            },
            _ => false,
        };
        if out_of_bounds {
            let message = format!("Array index out of bounds for '{}' of size {n}", var_name(ctx, *base));
            let track = ctx.track_var(*index);
            ctx.report(ARRAY_BOUNDS, message, ast.loc(access).clone(), track);
            ctx.sink();
        }
        !out_of_bounds
    }
}
