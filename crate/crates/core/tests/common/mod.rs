#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use minisa::cfg::{BlockId, Cfg, Element, Terminator};
use minisa::constraints::{RangeSet, Universe};
use minisa::frontend::{AssignOp, Ast, BinOp, Callee, Intrinsic, NodeId, NodeKind, Semantics, UnOp};
use minisa::unit::TranslationUnit;

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

pub fn corpus(name: &str) -> TranslationUnit {
    let path = corpus_path(name);
    let src = std::fs::read_to_string(&path).unwrap();
    TranslationUnit::from_source(path.to_str().unwrap(), &src).unwrap()
}

pub fn corpus_files() -> Vec<PathBuf> {
    let mut v: Vec<_> = std::fs::read_dir(corpus_path(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "mc"))
        .collect();
    v.sort();
    v
}

// ---------------------------------------------------------------------------
// Concrete interpreter over the AST as written. Knows nothing about CFGs,
// desugaring, symbols or ranges.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stop {
    Uninit,
    DivZero,
    OutOfBounds,
    NoBody(String),
    NotConcrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Loc {
    Var(usize, NodeId),
    Elem(usize, NodeId, i64),
}

enum Flow {
    Next,
    Return(Option<i64>),
}

pub struct Interp<'a> {
    ast: &'a Ast,
    sema: &'a Semantics,
    mem: HashMap<Loc, i64>,
    refs: HashMap<(usize, NodeId), Loc>,
    frames: usize,
}

impl<'a> Interp<'a> {
    pub fn new(unit: &'a TranslationUnit) -> Self {
        Self {
            ast: &unit.original,
            sema: &unit.original_sema,
            mem: HashMap::new(),
            refs: HashMap::new(),
            frames: 0,
        }
    }

    /// Runs a parameterless function.
    pub fn call_named(&mut self, name: &str) -> Result<Option<i64>, Stop> {
        let f = *self.sema.functions.get(name).expect("function exists");
        self.call(f, Vec::new())
    }

    fn call(&mut self, f: NodeId, args: Vec<Result<i64, Loc>>) -> Result<Option<i64>, Stop> {
        let body = self
            .ast
            .body(f)
            .ok_or_else(|| Stop::NoBody(self.ast.function_name(f).to_string()))?;
        self.frames += 1;
        let fr = self.frames;
        for (&p, a) in self.ast.params(f).iter().zip(args) {
            match a {
                Ok(v) => {
                    self.mem.insert(Loc::Var(fr, p), v);
                }
                Err(loc) => {
                    self.refs.insert((fr, p), loc);
                }
            }
        }
        match self.stmt(fr, body)? {
            Flow::Return(v) => Ok(v),
            Flow::Next => Ok(None),
        }
    }

    fn stmt(&mut self, fr: usize, s: NodeId) -> Result<Flow, Stop> {
        let ast = self.ast;
        let c = ast.children(s);
        match ast.kind(s) {
            NodeKind::Block => {
                for &x in c {
                    if let Flow::Return(v) = self.stmt(fr, x)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            NodeKind::VarDecl { array_len, .. } => {
                match array_len {
                    Some(n) => {
                        for i in 0..*n {
                            self.mem.remove(&Loc::Elem(fr, s, i));
                        }
                    }
                    None => {
                        self.mem.remove(&Loc::Var(fr, s));
                    }
                }
                if let Some(&init) = c.first() {
                    let v = self.expr(fr, init)?;
                    self.mem.insert(Loc::Var(fr, s), v);
                }
            }
            NodeKind::IfStmt => {
                if self.expr(fr, c[0])? != 0 {
                    return self.stmt(fr, c[1]);
                } else if let Some(&e) = c.get(2) {
                    return self.stmt(fr, e);
                }
            }
            NodeKind::WhileStmt => {
                while self.expr(fr, c[0])? != 0 {
                    if let Flow::Return(v) = self.stmt(fr, c[1])? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            NodeKind::ForStmt {
                has_init,
                has_cond,
                has_step,
            } => {
                let mut it = c.iter().copied();
                let init = has_init.then(|| it.next().unwrap());
                let cond = has_cond.then(|| it.next().unwrap());
                let step = has_step.then(|| it.next().unwrap());
                let body = it.next().unwrap();
                if let Some(i) = init {
                    self.stmt(fr, i)?;
                }
                while match cond {
                    Some(e) => self.expr(fr, e)? != 0,
                    None => true,
                } {
                    if let Flow::Return(v) = self.stmt(fr, body)? {
                        return Ok(Flow::Return(v));
                    }
                    if let Some(st) = step {
                        self.stmt(fr, st)?;
                    }
                }
            }
            NodeKind::ReturnStmt => {
                let v = match c.first() {
                    Some(&e) => Some(self.expr(fr, e)?),
                    None => None,
                };
                return Ok(Flow::Return(v));
            }
            NodeKind::ExprStmt => {
                self.expr_or_void(fr, c[0])?;
            }
            NodeKind::AssignStmt(op) => {
                let loc = self.lvalue(fr, c[0])?;
                let rhs = self.expr(fr, c[1])?;
                let v = match op {
                    AssignOp::Assign => rhs,
                    AssignOp::Add => self.load(loc)?.wrapping_add(rhs),
                    AssignOp::Sub => self.load(loc)?.wrapping_sub(rhs),
                    AssignOp::Mul => self.load(loc)?.wrapping_mul(rhs),
                    AssignOp::Div => {
                        if rhs == 0 {
                            return Err(Stop::DivZero);
                        }
                        self.load(loc)?.wrapping_div(rhs)
                    }
                };
                self.mem.insert(loc, v);
            }
            other => panic!("not a statement: {other:?}"),
        }
        Ok(Flow::Next)
    }

    fn resolve(&self, fr: usize, decl: NodeId) -> Loc {
        self.refs.get(&(fr, decl)).copied().unwrap_or(Loc::Var(fr, decl))
    }

    fn lvalue(&mut self, fr: usize, l: NodeId) -> Result<Loc, Stop> {
        let ast = self.ast;
        let decl = |n: NodeId| self.sema.decl_of(n).expect("resolved");
        match ast.kind(l) {
            NodeKind::VarRef(_) => Ok(self.resolve(fr, decl(l))),
            NodeKind::ArrayIndex => {
                let c = ast.children(l);
                let d = decl(c[0]);
                let i = self.expr(fr, c[1])?;
                let n = match ast.kind(d) {
                    NodeKind::VarDecl {
                        array_len: Some(n), ..
                    } => *n,
                    _ => panic!("not an array"),
                };
                if i < 0 || i >= n {
                    return Err(Stop::OutOfBounds);
                }
                Ok(Loc::Elem(fr, d, i))
            }
            other => panic!("not an lvalue: {other:?}"),
        }
    }

    fn load(&self, loc: Loc) -> Result<i64, Stop> {
        self.mem.get(&loc).copied().ok_or(Stop::Uninit)
    }

    fn expr(&mut self, fr: usize, e: NodeId) -> Result<i64, Stop> {
        self.expr_or_void(fr, e).map(|v| v.expect("void value used"))
    }

    fn expr_or_void(&mut self, fr: usize, e: NodeId) -> Result<Option<i64>, Stop> {
        let ast = self.ast;
        let c = ast.children(e);
        let v = match ast.kind(e) {
            NodeKind::IntLit(v) => *v,
            NodeKind::VarRef(_) | NodeKind::ArrayIndex => {
                let loc = self.lvalue(fr, e)?;
                self.load(loc)?
            }
            NodeKind::UnaryOp(UnOp::Neg) => self.expr(fr, c[0])?.wrapping_neg(),
            NodeKind::UnaryOp(UnOp::Not) => (self.expr(fr, c[0])? == 0) as i64,
            NodeKind::BinaryOp(BinOp::And) => (self.expr(fr, c[0])? != 0 && self.expr(fr, c[1])? != 0) as i64,
            NodeKind::BinaryOp(BinOp::Or) => (self.expr(fr, c[0])? != 0 || self.expr(fr, c[1])? != 0) as i64,
            NodeKind::BinaryOp(op) => {
                let a = self.expr(fr, c[0])?;
                let b = self.expr(fr, c[1])?;
                match op {
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    BinOp::Mul => a.wrapping_mul(b),
                    BinOp::Div | BinOp::Rem if b == 0 => return Err(Stop::DivZero),
                    BinOp::Div => a.wrapping_div(b),
                    BinOp::Rem => a.wrapping_rem(b),
                    BinOp::Lt => (a < b) as i64,
                    BinOp::Le => (a <= b) as i64,
                    BinOp::Gt => (a > b) as i64,
                    BinOp::Ge => (a >= b) as i64,
                    BinOp::Eq => (a == b) as i64,
                    BinOp::Ne => (a != b) as i64,
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            NodeKind::Call(_) => match self.sema.callee(e).expect("resolved") {
                Callee::Intrinsic(Intrinsic::SaDump) => {
                    self.expr(fr, c[0])?;
                    return Ok(None);
                }
                Callee::Intrinsic(_) => return Err(Stop::NotConcrete),
                Callee::Function(f) => {
                    let mut args = Vec::new();
                    for (&p, &a) in ast.params(f).iter().zip(c) {
                        if matches!(ast.kind(p), NodeKind::ParamDecl { by_ref: true, .. }) {
                            args.push(Err(self.lvalue(fr, a)?));
                        } else {
                            args.push(Ok(self.expr(fr, a)?));
                        }
                    }
                    return self.call(f, args);
                }
            },
            other => panic!("not an expression: {other:?}"),
        };
        Ok(Some(v))
    }
}

// ---------------------------------------------------------------------------
// Liveness by path enumeration (loop-free CFGs only).

/// Reads and writes of one CFG element, in evaluation order: reads happen
/// before the write.
fn uses_defs(ast: &Ast, sema: &Semantics, e: Element) -> (Vec<NodeId>, Vec<NodeId>) {
    let Element::Node(n) = e else {
        return (vec![], vec![]);
    };
    let base = |x: NodeId| -> Option<NodeId> {
        match ast.kind(x) {
            NodeKind::VarRef(_) => sema.decl_of(x),
            NodeKind::ArrayIndex => sema.decl_of(ast.children(x)[0]),
            _ => None,
        }
    };
    match ast.kind(n) {
        NodeKind::VarRef(_) | NodeKind::ArrayIndex => (base(n).into_iter().collect(), vec![]),
        NodeKind::AssignStmt(_) => {
            let t = ast.children(n)[0];
            match ast.kind(t) {
                NodeKind::VarRef(_) => (vec![], base(t).into_iter().collect()),
                _ => (base(t).into_iter().collect(), vec![]),
            }
        }
        NodeKind::VarDecl { .. } => (vec![], vec![n]),
        NodeKind::Call(_) => {
            let uses = ast
                .children(n)
                .iter()
                .enumerate()
                .filter(|(i, _)| minisa::cfg::is_ref_argument(ast, sema, n, *i))
                .filter_map(|(_, &a)| base(a))
                .collect();
            (uses, vec![])
        }
        _ => (vec![], vec![]),
    }
}

fn successors(cfg: &Cfg, b: BlockId) -> Vec<BlockId> {
    match cfg.block(b).terminator {
        Terminator::Jump(t) => vec![t],
        Terminator::CondBranch { on_true, on_false, .. } => vec![on_true, on_false],
        Terminator::Return(_) => vec![cfg.exit],
        Terminator::Exit => vec![],
    }
}

/// Variables read before being written on some path from element `index`
/// of `block` to the exit.
pub fn brute_live(ast: &Ast, sema: &Semantics, cfg: &Cfg, block: BlockId, index: usize) -> BTreeSet<NodeId> {
    let mut live = BTreeSet::new();
    let mut stack = vec![(block, index, BTreeSet::new())];
    while let Some((b, i, mut written)) = stack.pop() {
        let elems = &cfg.block(b).elements;
        for &e in &elems[i..] {
            let (uses, defs) = uses_defs(ast, sema, e);
            for u in uses {
                if !written.contains(&u) {
                    live.insert(u);
                }
            }
            written.extend(defs);
        }
        for s in successors(cfg, b) {
            stack.push((s, 0, written.clone()));
        }
    }
    live
}

pub fn is_acyclic(cfg: &Cfg) -> bool {
    fn visit(cfg: &Cfg, b: BlockId, state: &mut Vec<u8>) -> bool {
        match state[b.index()] {
            1 => return false,
            2 => return true,
            _ => {}
        }
        state[b.index()] = 1;
        let ok = successors(cfg, b).into_iter().all(|s| visit(cfg, s, state));
        state[b.index()] = 2;
        ok
    }
    let mut state = vec![0; cfg.len()];
    (0..cfg.len()).all(|i| visit(cfg, BlockId(i as u32), &mut state))
}

// ---------------------------------------------------------------------------
// Range sets as bit sets over a small universe.

pub const BITS: u32 = 5;

pub fn universe() -> Universe {
    Universe::bits(BITS)
}

/// Bit `v - min` is set for each member `v`.
pub fn to_bits(r: &RangeSet) -> u32 {
    let u = universe();
    let mut m = 0u32;
    for v in u.min..=u.max {
        if r.contains(v) {
            m |= 1 << (v - u.min);
        }
    }
    m
}

/// The canonical range set with exactly the members of `m`.
pub fn from_bits(m: u32) -> RangeSet {
    let u = universe();
    let mut ranges = Vec::new();
    let mut v = u.min;
    while v <= u.max {
        if m >> (v - u.min) & 1 == 1 {
            let lo = v;
            while v < u.max && m >> (v + 1 - u.min) & 1 == 1 {
                v += 1;
            }
            ranges.push((lo, v));
        }
        v += 1;
    }
    RangeSet::from_ranges(ranges)
}

pub fn full_mask() -> u32 {
    ((1u64 << (1u32 << BITS)) - 1) as u32
}

/// Wrapping two's-complement addition within the universe.
pub fn wrap_add(v: i64, k: i64) -> i64 {
    let u = universe();
    let size = u.max - u.min + 1;
    (v - u.min + k).rem_euclid(size) + u.min
}
