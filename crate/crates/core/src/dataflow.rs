//! Worklist fixpoint solver over a [`Cfg`] and the set-based analyses built
//! on it: zero tracking, definite assignment and liveness.
//!
//! Facts are sets of declaration node ids. Blocks that have not been computed
//! yet hold no fact at all and are skipped at joins, so a loop header's first
//! visit only sees its forward predecessors. This is what makes the `Must`
//! (intersection) solutions maximal rather than collapsing to the empty set.

use std::collections::{BTreeSet, HashSet};

use crate::cfg::{BlockId, Cfg, Element};
use crate::frontend::{Ast, BinOp, NodeId, NodeKind, SemaType, Semantics};
use crate::report::Report;

pub type FlowFact = BTreeSet<NodeId>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergeMode {
    /// Union at joins.
    May,
    /// Intersection at joins.
    Must,
}

impl MergeMode {
    fn join(self, acc: &mut Option<FlowFact>, other: &FlowFact) {
        match acc {
            None => *acc = Some(other.clone()),
            Some(a) => match self {
                MergeMode::May => a.extend(other.iter().copied()),
                MergeMode::Must => a.retain(|d| other.contains(d)),
            },
        }
    }
}

impl std::str::FromStr for MergeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "may" => Ok(MergeMode::May),
            "must" => Ok(MergeMode::Must),
            other => Err(format!("unknown merge mode '{other}' (expected may or must)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Per-element transfer function. For backward problems it is applied to
/// the fact after the element and yields the fact before it.
pub trait Transfer {
    fn apply(&self, element: Element, fact: &mut FlowFact);
}

impl<F: Fn(Element, &mut FlowFact)> Transfer for F {
    fn apply(&self, element: Element, fact: &mut FlowFact) {
        self(element, fact)
    }
}

/// Fixpoint of a dataflow problem.
///
/// `entry[b]` is the fact at the start of block `b` and `exit[b]` the fact
/// after its last element, independent of direction. Blocks never reached by
/// the propagation (unreachable code) hold the initial fact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub direction: Direction,
    pub entry: Vec<FlowFact>,
    pub exit: Vec<FlowFact>,
    /// Number of block transfer evaluations until convergence.
    pub evaluations: usize,
}

impl Solution {
    pub fn entry_of(&self, b: BlockId) -> &FlowFact {
        &self.entry[b.index()]
    }

    pub fn exit_of(&self, b: BlockId) -> &FlowFact {
        &self.exit[b.index()]
    }

    /// Facts at every program point: `points[b][i]` holds before element `i`
    /// of block `b`, and `points[b][len]` at the end of the block.
    pub fn points(&self, cfg: &Cfg, transfer: &dyn Transfer) -> Vec<Vec<FlowFact>> {
        cfg.blocks
            .iter()
            .map(|block| {
                let n = block.elements.len();
                let mut out = vec![FlowFact::new(); n + 1];
                match self.direction {
                    Direction::Forward => {
                        let mut f = self.entry[block.id.index()].clone();
                        for (i, &e) in block.elements.iter().enumerate() {
                            out[i] = f.clone();
                            transfer.apply(e, &mut f);
                        }
                        out[n] = f;
                    }
                    Direction::Backward => {
                        let mut f = self.exit[block.id.index()].clone();
                        out[n] = f.clone();
                        for (i, &e) in block.elements.iter().enumerate().rev() {
                            transfer.apply(e, &mut f);
                            out[i] = f.clone();
                        }
                    }
                }
                out
            })
            .collect()
    }
}

fn block_order(cfg: &Cfg, direction: Direction) -> Vec<BlockId> {
    let mut order: Vec<BlockId> = cfg.reverse_post_order().to_vec();
    if direction == Direction::Backward {
        order.reverse();
    }
    let seen: HashSet<BlockId> = order.iter().copied().collect();
    order.extend(cfg.blocks.iter().map(|b| b.id).filter(|b| !seen.contains(b)));
    order
}

fn solve(
    cfg: &Cfg,
    transfer: &dyn Transfer,
    merge: MergeMode,
    init: &FlowFact,
    direction: Direction,
) -> Solution {
    let n = cfg.len();
    let order = block_order(cfg, direction);
    let mut position = vec![0; n];
    for (i, b) in order.iter().enumerate() {
        position[b.index()] = i;
    }
    let start = match direction {
        Direction::Forward => cfg.entry,
        Direction::Backward => cfg.exit,
    };
    // `input` is the fact flowing into a block in the solve direction and
    // `output` the one leaving it.
    let mut input: Vec<Option<FlowFact>> = vec![None; n];
    let mut output: Vec<Option<FlowFact>> = vec![None; n];
    let mut worklist: BTreeSet<usize> = (0..n).collect();
    let mut evaluations = 0;

    while let Some(pos) = worklist.pop_first() {
        let b = order[pos];
        let sources: Vec<BlockId> = match direction {
            Direction::Forward => cfg.predecessors(b).to_vec(),
            Direction::Backward => cfg.successors(b),
        };
        let mut fact = None;
        if b == start {
            fact = Some(init.clone());
        }
        // Dead code must not weaken what reachable blocks know.
        let live = cfg.is_reachable(b);
        for s in sources.into_iter().filter(|s| !live || cfg.is_reachable(*s)) {
            if let Some(f) = &output[s.index()] {
                merge.join(&mut fact, f);
            }
        }
        let fact = fact.unwrap_or_else(|| init.clone());
        let mut out = fact.clone();
        let elements = &cfg.block(b).elements;
        match direction {
            Direction::Forward => elements.iter().for_each(|&e| transfer.apply(e, &mut out)),
            Direction::Backward => elements
                .iter()
                .rev()
                .for_each(|&e| transfer.apply(e, &mut out)),
        }
        evaluations += 1;
        input[b.index()] = Some(fact);
        if output[b.index()].as_ref() != Some(&out) {
            output[b.index()] = Some(out);
            let targets = match direction {
                Direction::Forward => cfg.successors(b),
                Direction::Backward => cfg.predecessors(b).to_vec(),
            };
            worklist.extend(targets.iter().map(|t| position[t.index()]));
        }
    }

    let unwrap = |v: Vec<Option<FlowFact>>| -> Vec<FlowFact> {
        v.into_iter()
            .map(|f| f.unwrap_or_else(|| init.clone()))
            .collect()
    };
    let (input, output) = (unwrap(input), unwrap(output));
    let (entry, exit) = match direction {
        Direction::Forward => (input, output),
        Direction::Backward => (output, input),
    };
    Solution {
        direction,
        entry,
        exit,
        evaluations,
    }
}

/// Forward fixpoint: the entry block starts from `init`, every other block
/// from the merge of its computed predecessors.
pub fn solve_forward(
    cfg: &Cfg,
    transfer: &dyn Transfer,
    merge: MergeMode,
    init: &FlowFact,
) -> Solution {
    solve(cfg, transfer, merge, init, Direction::Forward)
}

/// Backward fixpoint: the exit block starts from `init`.
pub fn solve_backward(
    cfg: &Cfg,
    transfer: &dyn Transfer,
    merge: MergeMode,
    init: &FlowFact,
) -> Solution {
    solve(cfg, transfer, merge, init, Direction::Backward)
}

/// True if one more sweep over all blocks would change nothing.
pub fn is_fixpoint(cfg: &Cfg, sol: &Solution, transfer: &dyn Transfer, merge: MergeMode, init: &FlowFact) -> bool {
    cfg.blocks.iter().all(|block| {
        let b = block.id;
        let (sources, start) = match sol.direction {
            Direction::Forward => (cfg.predecessors(b).to_vec(), cfg.entry),
            Direction::Backward => (cfg.successors(b), cfg.exit),
        };
        let outputs = |s: BlockId| match sol.direction {
            Direction::Forward => sol.exit_of(s),
            Direction::Backward => sol.entry_of(s),
        };
        let mut fact = (b == start).then(|| init.clone());
        let live = cfg.is_reachable(b);
        for s in sources.iter().filter(|s| !live || cfg.is_reachable(**s)) {
            merge.join(&mut fact, outputs(*s));
        }
        let Some(fact) = fact else {
            // Nothing flows in: only the defaulting rule applies.
            return true;
        };
        let mut out = fact.clone();
        match sol.direction {
            Direction::Forward => {
                block.elements.iter().for_each(|&e| transfer.apply(e, &mut out));
                &fact == sol.entry_of(b) && &out == sol.exit_of(b)
            }
            Direction::Backward => {
                block.elements.iter().rev().for_each(|&e| transfer.apply(e, &mut out));
                &fact == sol.exit_of(b) && &out == sol.entry_of(b)
            }
        }
    })
}

/// Variables passed by reference at a call element.
fn ref_args<'a>(ast: &'a Ast, sema: &'a Semantics, call: NodeId) -> impl Iterator<Item = NodeId> + 'a {
    ast.children(call)
        .iter()
        .enumerate()
        .filter(move |(i, _)| crate::cfg::is_ref_argument(ast, sema, call, *i))
        .map(|(_, &a)| a)
}

/// The declaration named by a variable reference or the base of an index.
fn base_decl(ast: &Ast, sema: &Semantics, lvalue: NodeId) -> Option<NodeId> {
    match ast.kind(lvalue) {
        NodeKind::VarRef(_) => sema.decl_of(lvalue),
        NodeKind::ArrayIndex => base_decl(ast, sema, ast.children(lvalue)[0]),
        _ => None,
    }
}

/// Zero tracking: the set of variables known (May: possibly) to hold 0.
pub struct ZeroTransfer<'a> {
    pub ast: &'a Ast,
    pub sema: &'a Semantics,
}

impl ZeroTransfer<'_> {
    fn assign(&self, target: NodeId, rhs: Option<NodeId>, fact: &mut FlowFact) {
        let zero = match rhs.map(|r| (r, self.ast.kind(r))) {
            Some((_, NodeKind::IntLit(c))) => *c == 0,
            Some((r, NodeKind::VarRef(_))) => self
                .sema
                .decl_of(r)
                .is_some_and(|d| fact.contains(&d)),
            _ => false,
        };
        if zero {
            fact.insert(target);
        } else {
            fact.remove(&target);
        }
    }
}

impl Transfer for ZeroTransfer<'_> {
    fn apply(&self, element: Element, fact: &mut FlowFact) {
        let Element::Node(n) = element else { return };
        let (ast, sema) = (self.ast, self.sema);
        match ast.kind(n) {
            NodeKind::AssignStmt(_) => {
                let c = ast.children(n);
                if matches!(ast.kind(c[0]), NodeKind::VarRef(_)) {
                    if let Some(d) = sema.decl_of(c[0]) {
                        self.assign(d, Some(c[1]), fact);
                    }
                }
            }
            NodeKind::VarDecl {
                array_len: None, ..
            } => self.assign(n, ast.children(n).first().copied(), fact),
            NodeKind::Call(_) => {
                for a in ref_args(ast, sema, n) {
                    if matches!(ast.kind(a), NodeKind::VarRef(_)) {
                        if let Some(d) = sema.decl_of(a) {
                            fact.remove(&d);
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

/// Per-point zero sets of one function (see [`Solution::points`]).
pub fn zero_analysis(ast: &Ast, sema: &Semantics, cfg: &Cfg, mode: MergeMode) -> Vec<Vec<FlowFact>> {
    let t = ZeroTransfer { ast, sema };
    solve_forward(cfg, &t, mode, &FlowFact::new()).points(cfg, &t)
}

pub const FLOW_DIV_ZERO: &str = "flow.DivideByZero";
pub const FLOW_UNINIT: &str = "flow.UninitVar";

/// One report per `/` or `%` whose divisor is a literal 0 or a variable in
/// the zero set at that element.
pub fn flow_div_zero_check(ast: &Ast, sema: &Semantics, cfg: &Cfg, mode: MergeMode) -> Vec<Report> {
    let points = zero_analysis(ast, sema, cfg, mode);
    let mut out = Vec::new();
    for block in cfg.blocks.iter().filter(|b| cfg.is_reachable(b.id)) {
        for (i, &e) in block.elements.iter().enumerate() {
            let Element::Node(n) = e else { continue };
            let NodeKind::BinaryOp(op @ (BinOp::Div | BinOp::Rem)) = ast.kind(n) else {
                continue;
            };
            let what = if *op == BinOp::Div { "Division" } else { "Modulo" };
            let divisor = ast.children(n)[1];
            let message = match ast.kind(divisor) {
                NodeKind::IntLit(0) => format!("{what} by literal zero"),
                NodeKind::VarRef(name)
                    if sema
                        .decl_of(divisor)
                        .is_some_and(|d| points[block.id.index()][i].contains(&d)) =>
                {
                    format!("{what} by zero: '{name}' is marked as zero")
                }
                _ => continue,
            };
            out.push(Report::new(FLOW_DIV_ZERO, message, ast.loc(n).clone(), vec![]));
        }
    }
    out
}

/// Definite assignment: variables assigned on every path so far.
pub struct AssignedTransfer<'a> {
    pub ast: &'a Ast,
    pub sema: &'a Semantics,
}

impl Transfer for AssignedTransfer<'_> {
    fn apply(&self, element: Element, fact: &mut FlowFact) {
        let Element::Node(n) = element else { return };
        let (ast, sema) = (self.ast, self.sema);
        match ast.kind(n) {
            NodeKind::AssignStmt(_) => {
                let target = ast.children(n)[0];
                if matches!(ast.kind(target), NodeKind::VarRef(_)) {
                    fact.extend(sema.decl_of(target));
                }
            }
            NodeKind::VarDecl {
                array_len: None, ..
            } => {
                if ast.children(n).is_empty() {
                    fact.remove(&n);
                } else {
                    fact.insert(n);
                }
            }
            NodeKind::Call(_) => {
                for a in ref_args(ast, sema, n) {
                    if matches!(ast.kind(a), NodeKind::VarRef(_)) {
                        fact.extend(sema.decl_of(a));
                    }
                }
            }
            _ => {}
        }
    }
}

/// Reports reads of scalar locals that are not assigned on every path
/// reaching them. Arrays are not tracked.
pub fn uninit_check(ast: &Ast, sema: &Semantics, cfg: &Cfg) -> Vec<Report> {
    let t = AssignedTransfer { ast, sema };
    let init: FlowFact = ast.params(cfg.function).iter().copied().collect();
    let points = solve_forward(cfg, &t, MergeMode::Must, &init).points(cfg, &t);
    let mut out = Vec::new();
    for block in cfg.blocks.iter().filter(|b| cfg.is_reachable(b.id)) {
        for (i, &e) in block.elements.iter().enumerate() {
            let Element::Node(n) = e else { continue };
            let NodeKind::VarRef(name) = ast.kind(n) else {
                continue;
            };
            let Some(d) = sema.decl_of(n) else { continue };
            if sema.decl_type(d) != Some(SemaType::Int)
                || !matches!(ast.kind(d), NodeKind::VarDecl { .. })
                || points[block.id.index()][i].contains(&d)
            {
                continue;
            }
            out.push(Report::new(
                FLOW_UNINIT,
                format!("Variable '{name}' may be used uninitialized"),
                ast.loc(n).clone(),
                vec![],
            ));
        }
    }
    out
}

/// Live variables. A write to an array element is not a kill and keeps the
/// array alive; by-reference arguments count as uses.
pub struct LivenessTransfer<'a> {
    pub ast: &'a Ast,
    pub sema: &'a Semantics,
}

impl Transfer for LivenessTransfer<'_> {
    fn apply(&self, element: Element, fact: &mut FlowFact) {
        let Element::Node(n) = element else { return };
        let (ast, sema) = (self.ast, self.sema);
        match ast.kind(n) {
            NodeKind::VarRef(_) => fact.extend(sema.decl_of(n)),
            NodeKind::ArrayIndex => fact.extend(base_decl(ast, sema, n)),
            NodeKind::AssignStmt(_) => {
                let target = ast.children(n)[0];
                match ast.kind(target) {
                    NodeKind::VarRef(_) => {
                        if let Some(d) = sema.decl_of(target) {
                            fact.remove(&d);
                        }
                    }
                    _ => fact.extend(base_decl(ast, sema, target)),
                }
            }
            NodeKind::VarDecl { .. } => {
                fact.remove(&n);
            }
            NodeKind::Call(_) => {
                for a in ref_args(ast, sema, n) {
                    fact.extend(base_decl(ast, sema, a));
                }
            }
            _ => {}
        }
    }
}

/// Liveness of one function, queryable per program point.
#[derive(Debug, Clone)]
pub struct Liveness {
    pub solution: Solution,
    points: Vec<Vec<FlowFact>>,
}

impl Liveness {
    pub fn compute(ast: &Ast, sema: &Semantics, cfg: &Cfg) -> Self {
        let t = LivenessTransfer { ast, sema };
        let solution = solve_backward(cfg, &t, MergeMode::May, &FlowFact::new());
        let points = solution.points(cfg, &t);
        Self { solution, points }
    }

    /// Variables live before element `index` of `block` (`index == len` is
    /// the end of the block, before the terminator's successors).
    pub fn live_at(&self, block: BlockId, index: usize) -> &FlowFact {
        &self.points[block.index()][index]
    }

    pub fn live_in(&self, block: BlockId) -> &FlowFact {
        self.solution.entry_of(block)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unit::TranslationUnit;

    const DIV_ZERO: &str = "void f(int a) {
  int i;
  int j;
  if (a) {
    i = 0;
  } else {
    i = 1;
  }
  if (!a) {
    j = 5 / i;
  } else {
    j = 3 / i;
  }
  j += 2 / i;
}
";

    fn unit(src: &str) -> TranslationUnit {
        TranslationUnit::from_source("t.mc", src).unwrap()
    }

    fn lines(reports: &[Report]) -> Vec<u32> {
        reports.iter().map(|r| r.loc.line).collect()
    }

    #[test]
    fn div_zero_may_and_must() {
        let u = unit(DIV_ZERO);
        let cfg = u.cfgs().next().unwrap();
        let may = flow_div_zero_check(&u.ast, &u.sema, cfg, MergeMode::May);
        assert_eq!(lines(&may), vec![10, 12, 14]);
        assert_eq!(cfg.len(), 8);
        let must = flow_div_zero_check(&u.ast, &u.sema, cfg, MergeMode::Must);
        assert!(must.is_empty());
    }

    #[test]
    fn literal_and_nonzero_divisors() {
        let u = unit("void f() { int x; int y; x = 1; y = 2 / x; y = y % 0; }");
        let cfg = u.cfgs().next().unwrap();
        for mode in [MergeMode::May, MergeMode::Must] {
            let r = flow_div_zero_check(&u.ast, &u.sema, cfg, mode);
            assert_eq!(r.len(), 1);
            assert_eq!(r[0].message, "Modulo by literal zero");
        }
    }

    #[test]
    fn copy_propagates_zero() {
        let u = unit("int f() { int x = 0; int y = x; return 1 / y; }");
        let cfg = u.cfgs().next().unwrap();
        assert_eq!(flow_div_zero_check(&u.ast, &u.sema, cfg, MergeMode::Must).len(), 1);
    }

    #[test]
    fn uninit() {
        let cases = [
            ("int f() { int x; return x; }", 1),
            ("int f(int b) { int x; if (b) x = 1; return x; }", 1),
            ("int f() { int x = 0; return x; }", 0),
            ("void g(int &r) { r = 1; } int f() { int x; g(x); return x; }", 0),
            ("int f(int b) { int x; while (b) { x = 1; b = b - 1; } return x; }", 1),
            ("int f(int b) { int x; if (b) x = 1; else x = 2; return x; }", 0),
            ("int f(int b) { int x; if (b) { return 0; b = 1; } x = 1; return x; }", 0),
        ];
        for (src, n) in cases {
            let u = unit(src);
            let cfg = u.cfg(u.function("f").unwrap()).unwrap();
            assert_eq!(uninit_check(&u.ast, &u.sema, cfg).len(), n, "{src}");
        }
    }

    #[test]
    fn identity_transfer_passes_init_through() {
        let u = unit("void f() { int a = 1; int b = 2; }");
        let cfg = u.cfgs().next().unwrap();
        let init: FlowFact = [NodeId(99)].into_iter().collect();
        let id = |_: Element, _: &mut FlowFact| {};
        let s = solve_forward(cfg, &id, MergeMode::Must, &init);
        assert_eq!(s.exit_of(cfg.exit), &init);
    }

    #[test]
    fn diamond_merge() {
        // Mark a sentinel in the then-branch only.
        let u = unit("void f(int c) { int a; if (c) a = 1; else a = 2; }");
        let cfg = u.cfgs().next().unwrap();
        let then_assign = u
            .ast
            .preorder(u.ast.root())
            .into_iter()
            .find(|&n| {
                matches!(u.ast.kind(n), NodeKind::AssignStmt(_))
                    && matches!(u.ast.kind(u.ast.children(n)[1]), NodeKind::IntLit(1))
            })
            .unwrap();
        let mark = move |e: Element, f: &mut FlowFact| {
            if e.node() == then_assign {
                f.insert(NodeId(7));
            }
        };
        let may = solve_forward(cfg, &mark, MergeMode::May, &FlowFact::new());
        let must = solve_forward(cfg, &mark, MergeMode::Must, &FlowFact::new());
        assert!(may.exit_of(cfg.exit).contains(&NodeId(7)));
        assert!(must.exit_of(cfg.exit).is_empty());
    }

    #[test]
    fn stable_loop_converges_quickly() {
        let u = unit("void f(int c) { int a = 0; while (c) { a = 0; } }");
        let cfg = u.cfgs().next().unwrap();
        let t = ZeroTransfer {
            ast: &u.ast,
            sema: &u.sema,
        };
        let s = solve_forward(cfg, &t, MergeMode::Must, &FlowFact::new());
        // One pass over all blocks plus at most one more.
        assert!(s.evaluations <= 2 * cfg.len(), "{} evaluations", s.evaluations);
        assert!(is_fixpoint(cfg, &s, &t, MergeMode::Must, &FlowFact::new()));
    }

    #[test]
    fn liveness_basics() {
        let u = unit("int f(int x) { int dead = 3; return x; }");
        let cfg = u.cfgs().next().unwrap();
        let l = Liveness::compute(&u.ast, &u.sema, cfg);
        let x = u.ast.params(cfg.function)[0];
        assert!(l.live_in(cfg.entry).contains(&x));
        let dead = u.sema.decls_of_function(cfg.function)[1];
        assert!(cfg.blocks.iter().all(|b| !l.live_in(b.id).contains(&dead)));
        for b in &cfg.blocks {
            for i in 0..=b.elements.len() {
                assert!(!l.live_at(b.id, i).contains(&dead));
            }
        }
    }

    #[test]
    fn liveness_of_by_ref_param_write() {
        // x is written in both arms and never read: it is dead everywhere.
        let u = unit("void g(int b, int &x) { if (b) x = b + 1; else x = 42; }");
        let cfg = u.cfgs().next().unwrap();
        let l = Liveness::compute(&u.ast, &u.sema, cfg);
        let params = u.ast.params(cfg.function);
        let (b, x) = (params[0], params[1]);
        assert!(l.live_in(cfg.entry).contains(&b));
        assert!(cfg.blocks.iter().all(|blk| !l.live_in(blk.id).contains(&x)));
    }
}
