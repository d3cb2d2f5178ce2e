use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::graph::{ExplodedGraph, PointKind, ProgramPoint};
use super::state::{FrameId, MemRegion, ProgramState, SVal, SymbolTable};
use super::{
    AnalysisOptions, Checker, CheckerContext, FunctionAnalysis, FunctionFacts, PendingReport, Stats, Track,
};
use crate::cfg::{BlockId, Cfg, Element, Terminator};
use crate::constraints::{
    assume, eval_concrete_binop, query_zeroness, QueryValue, RangeSet, Relation, SymExpr, Zeroness,
};
use crate::frontend::{BinOp, Callee, Intrinsic, NodeId, NodeKind, ReturnType, UnOp};
use crate::report::{EventKind, PathEvent, Report};
use crate::unit::TranslationUnit;

type Counters = BTreeMap<(FrameId, BlockId), u32>;

struct FrameInfo {
    function: NodeId,
    caller: Option<FrameId>,
    call: Option<NodeId>,
    depth: u32,
}

#[derive(Clone, Copy)]
enum Hook {
    Pre,
    Post,
    End,
}

pub(super) struct Engine<'a> {
    unit: &'a TranslationUnit,
    checkers: &'a [Box<dyn Checker>],
    opts: &'a AnalysisOptions,
    facts: &'a FunctionFacts,
    graph: ExplodedGraph,
    symbols: SymbolTable,
    frames: Vec<FrameInfo>,
    frame_ids: HashMap<(FrameId, NodeId), FrameId>,
    counters: Vec<Rc<Counters>>,
    worklist: Vec<usize>,
    inline_counts: HashMap<NodeId, u32>,
    inlined: BTreeSet<NodeId>,
    stats: Stats,
    pending: Vec<(usize, PendingReport)>,
    dumps: Vec<String>,
    stopped: bool,
}

impl<'a> Engine<'a> {
    pub(super) fn new(
        unit: &'a TranslationUnit,
        checkers: &'a [Box<dyn Checker>],
        opts: &'a AnalysisOptions,
        facts: &'a FunctionFacts,
    ) -> Self {
        Self {
            unit,
            checkers,
            opts,
            facts,
            graph: ExplodedGraph::default(),
            symbols: SymbolTable::default(),
            frames: Vec::new(),
            frame_ids: HashMap::new(),
            counters: Vec::new(),
            worklist: Vec::new(),
            inline_counts: HashMap::new(),
            inlined: BTreeSet::new(),
            stats: Stats::default(),
            pending: Vec::new(),
            dumps: Vec::new(),
            stopped: false,
        }
    }

    fn cfg(&self, frame: FrameId) -> &'a Cfg {
        let f = self.frames[frame.0 as usize].function;
        self.unit.cfg(f).expect("frames only exist for defined functions")
    }

    pub(super) fn run(mut self, function: NodeId) -> FunctionAnalysis {
        let ast = &self.unit.ast;
        self.frames.push(FrameInfo {
            function,
            caller: None,
            call: None,
            depth: 0,
        });
        let mut state = ProgramState::default();
        for &p in ast.params(function) {
            let s = self.symbols.param(ast.decl_name(p));
            state.constraints.track(s);
            state
                .store
                .insert(MemRegion::var(FrameId::TOP, p), SVal::Sym(SymExpr::Atom(s)));
        }
        let entry = self.cfg(FrameId::TOP).entry;
        let counters: Counters = [((FrameId::TOP, entry), 1)].into_iter().collect();
        let point = ProgramPoint::new(PointKind::BlockEntrance(entry), FrameId::TOP);
        self.add_node(None, point, state, false, Rc::new(counters), Vec::new());
        while let Some(n) = self.worklist.pop() {
            if self.stopped {
                break;
            }
            self.step(n);
        }
        self.stats.functions_analyzed = 1;
        self.stats.nodes_created = self.graph.len() as u64;
        let reports = self.build_reports();
        FunctionAnalysis {
            function,
            name: ast.function_name(function).to_string(),
            stats: self.stats,
            reports,
            dumps: self.dumps,
            inlined: self.inlined,
            graph: self.opts.keep_graphs.then_some(self.graph),
            symbols: self.symbols,
        }
    }

    /// Adds a node reached from `pred`. Fresh non-sink nodes are queued.
    fn add_node(
        &mut self,
        pred: Option<usize>,
        point: ProgramPoint,
        state: ProgramState,
        sink: bool,
        counters: Rc<Counters>,
        reports: Vec<PendingReport>,
    ) -> Option<usize> {
        if self.stopped {
            return None;
        }
        if self.graph.len() >= self.opts.budget.max_nodes as usize {
            self.stopped = true;
            self.stats.node_budget_exhausted += 1;
            return None;
        }
        let (id, fresh) = self.graph.get_or_insert(point, state, sink, pred);
        if !fresh {
            return None;
        }
        self.counters.push(counters);
        self.pending.extend(reports.into_iter().map(|r| (id, r)));
        if !sink {
            self.worklist.push(id);
        }
        Some(id)
    }

    /// Adds a node whose state first passes through the checkers' `hook`.
    fn add_checked(&mut self, pred: usize, point: ProgramPoint, state: ProgramState, hook: Hook) -> Option<usize> {
        let frame = point.frame;
        let (node, call) = match point.kind {
            PointKind::PreStmt { node, .. } | PointKind::PostStmt { node, .. } => {
                (Some(node), matches!(self.unit.ast.kind(node), NodeKind::Call(_)))
            }
            _ => (None, false),
        };
        let mut ctx = CheckerContext::new(self.unit, &self.symbols, frame, state);
        for ch in self.checkers {
            match (hook, node) {
                (Hook::Pre, Some(n)) => {
                    ch.pre_stmt(&mut ctx, n);
                    if call && !ctx.is_sink() {
                        ch.pre_call(&mut ctx, n);
                    }
                }
                (Hook::Post, Some(n)) => {
                    ch.post_stmt(&mut ctx, n);
                    if call && !ctx.is_sink() {
                        ch.post_call(&mut ctx, n);
                    }
                }
                (Hook::End, _) => ch.end_of_path(&mut ctx),
                _ => {}
            }
            if ctx.is_sink() {
                break;
            }
        }
        let (state, reports, sink) = ctx.into_parts();
        let counters = self.counters[pred].clone();
        self.add_node(Some(pred), point, state, sink, counters, reports)
    }

    fn step(&mut self, n: usize) {
        let node = self.graph.node(n);
        let point = node.point;
        let state = (*node.state).clone();
        let frame = point.frame;
        match point.kind {
            PointKind::BlockEntrance(b) => {
                let state = self.collect(frame, b, 0, state);
                self.next_element(n, frame, b, 0, state);
            }
            PointKind::PreStmt { block, index, .. } => self.eval_element(n, frame, block, index, state),
            PointKind::PostStmt { block, index, node } => {
                let mut state = state;
                if self.opts.collect_garbage && !self.is_branch_cond(frame, block, node) {
                    self.consume(&mut state, frame, node, false);
                }
                let state = self.collect(frame, block, index + 1, state);
                self.next_element(n, frame, block, index + 1, state);
            }
            PointKind::BranchTaken { block, which } => {
                let Terminator::CondBranch { on_true, on_false, .. } = self.cfg(frame).block(block).terminator else {
                    unreachable!()
                };
                self.enter_block(n, frame, if which { on_true } else { on_false }, state);
            }
            PointKind::CallEnter { .. } => {
                let entry = self.cfg(frame).entry;
                self.enter_block(n, frame, entry, state);
            }
            PointKind::CallExit { call } => {
                let (block, index) = self.position_of(frame, call);
                let point = ProgramPoint::new(PointKind::PostStmt { block, index, node: call }, frame);
                self.add_checked(n, point, state, Hook::Post);
            }
            PointKind::EndOfFunction => self.return_from(n, frame, state),
        }
    }

    fn position_of(&self, frame: FrameId, node: NodeId) -> (BlockId, usize) {
        let cfg = self.cfg(frame);
        for b in &cfg.blocks {
            if let Some(i) = b.elements.iter().position(|e| *e == Element::Node(node)) {
                return (b.id, i);
            }
        }
        unreachable!("call site is an element of its function's CFG")
    }

    fn is_branch_cond(&self, frame: FrameId, block: BlockId, node: NodeId) -> bool {
        matches!(self.cfg(frame).block(block).terminator, Terminator::CondBranch { cond, .. } if cond == node)
    }

    /// Forgets the values of `node`'s operands (and of `node` itself when
    /// `inclusive`); they have been consumed.
    fn consume(&self, state: &mut ProgramState, frame: FrameId, node: NodeId, inclusive: bool) {
        for n in self.unit.ast.preorder(node) {
            if inclusive || n != node {
                state.env.remove(&(frame, n));
            }
        }
    }

    /// Dead-symbol collection at a point of `frame`: store bindings of dead
    /// locals, then constraints on symbols nothing refers to.
    fn collect(&self, frame: FrameId, block: BlockId, index: usize, mut state: ProgramState) -> ProgramState {
        if !self.opts.collect_garbage {
            return state;
        }
        let function = self.frames[frame.0 as usize].function;
        let live = self.facts.liveness[&function].live_at(block, index);
        for &decl in &self.facts.locals[&function] {
            if !live.contains(&decl) {
                let region = MemRegion::var(frame, decl);
                state.clear_elements(&region);
                state.store.remove(&region);
            }
        }
        state.remove_dead_constraints();
        state
    }

    fn next_element(&mut self, pred: usize, frame: FrameId, block: BlockId, index: usize, state: ProgramState) {
        let cfg = self.cfg(frame);
        let elements = &cfg.block(block).elements;
        if let Some(&e) = elements.get(index) {
            let point = ProgramPoint::new(
                PointKind::PreStmt {
                    block,
                    index,
                    node: e.node(),
                },
                frame,
            );
            match e {
                Element::Bind { .. } => {
                    let counters = self.counters[pred].clone();
                    self.add_node(Some(pred), point, state, false, counters, Vec::new());
                }
                Element::Node(_) => {
                    self.add_checked(pred, point, state, Hook::Pre);
                }
            }
        } else {
            self.terminator(pred, frame, block, state);
        }
    }

    fn enter_block(&mut self, pred: usize, frame: FrameId, target: BlockId, state: ProgramState) {
        let mut counters = (*self.counters[pred]).clone();
        let c = counters.entry((frame, target)).or_insert(0);
        *c += 1;
        if *c > self.opts.budget.max_block_visits {
            self.stats.block_visit_exhausted += 1;
            return;
        }
        let point = ProgramPoint::new(PointKind::BlockEntrance(target), frame);
        self.add_node(Some(pred), point, state, false, Rc::new(counters), Vec::new());
    }

    fn terminator(&mut self, pred: usize, frame: FrameId, block: BlockId, mut state: ProgramState) {
        let cfg = self.cfg(frame);
        match cfg.block(block).terminator {
            Terminator::Jump(t) => self.enter_block(pred, frame, t, state),
            Terminator::CondBranch { cond, .. } => {
                let mut ctx = CheckerContext::new(self.unit, &self.symbols, frame, state);
                for ch in self.checkers {
                    ch.branch_condition(&mut ctx, cond);
                }
                let (checked, reports, _) = ctx.into_parts();
                self.pending.extend(reports.into_iter().map(|r| (pred, r)));
                let value = checked.env_value(frame, cond);
                let mut arms = Vec::new();
                for which in [true, false] {
                    if let Some(mut s) = self.assume_branch(frame, cond, &value, which, &checked) {
                        if self.opts.collect_garbage {
                            self.consume(&mut s, frame, cond, true);
                            s.remove_dead_constraints();
                        }
                        arms.push((which, s));
                    }
                }
                let counters = self.counters[pred].clone();
                let mut created = Vec::new();
                for (which, s) in arms {
                    let point = ProgramPoint::new(PointKind::BranchTaken { block, which }, frame);
                    // Queue manually below so the true arm is explored first.
                    if let Some(id) = self.add_node(Some(pred), point, s, false, counters.clone(), Vec::new()) {
                        self.worklist.pop();
                        created.push(id);
                    }
                }
                self.worklist.extend(created.into_iter().rev());
            }
            Terminator::Return(value) => {
                if let Some(v) = value {
                    let ret = state.env_value(frame, v);
                    let function = self.frames[frame.0 as usize].function;
                    if self.opts.collect_garbage {
                        self.consume(&mut state, frame, v, true);
                    }
                    state.env.insert((frame, function), ret);
                }
                let exit = cfg.exit;
                self.enter_block(pred, frame, exit, state);
            }
            Terminator::Exit => {
                let point = ProgramPoint::new(PointKind::EndOfFunction, frame);
                if frame == FrameId::TOP {
                    self.add_checked(pred, point, state, Hook::End);
                } else {
                    let counters = self.counters[pred].clone();
                    self.add_node(Some(pred), point, state, false, counters, Vec::new());
                }
            }
        }
    }

    fn assume_branch(
        &self,
        frame: FrameId,
        cond: NodeId,
        value: &SVal,
        which: bool,
        state: &ProgramState,
    ) -> Option<ProgramState> {
        let with = |cm: Option<crate::constraints::ConstraintMap>| {
            cm.map(|constraints| ProgramState {
                constraints,
                ..state.clone()
            })
        };
        match value {
            SVal::Int(c) => ((*c != 0) == which).then(|| state.clone()),
            SVal::Sym(e) => with(assume(&state.constraints, *e, Relation::Ne, 0, which)),
            _ => {
                let ast = &self.unit.ast;
                let rel = match ast.kind(cond) {
                    NodeKind::BinaryOp(op) => Relation::from_binop(*op),
                    _ => None,
                };
                let Some(rel) = rel else {
                    return Some(state.clone());
                };
                let c = ast.children(cond);
                match (state.env_value(frame, c[0]), state.env_value(frame, c[1])) {
                    (SVal::Sym(e), SVal::Int(k)) => with(assume(&state.constraints, e, rel, k, which)),
                    (SVal::Int(k), SVal::Sym(e)) => with(assume(&state.constraints, e, rel.flip(), k, which)),
                    _ => Some(state.clone()),
                }
            }
        }
    }

    /// Region a declaration names in `frame`; reference parameters resolve
    /// to the region they were bound to.
    fn decl_region(&self, state: &ProgramState, frame: FrameId, decl: NodeId) -> MemRegion {
        let own = MemRegion::var(frame, decl);
        match state.store.get(&own) {
            Some(SVal::Region(r)) => r.clone(),
            _ => own,
        }
    }

    fn lvalue_region(&self, state: &ProgramState, frame: FrameId, lvalue: NodeId) -> MemRegion {
        let ast = &self.unit.ast;
        match ast.kind(lvalue) {
            NodeKind::VarRef(_) => {
                let decl = self.unit.sema.decl_of(lvalue).expect("resolved");
                self.decl_region(state, frame, decl)
            }
            NodeKind::ArrayIndex => {
                let c = ast.children(lvalue);
                let base = self.lvalue_region(state, frame, c[0]);
                let index = normalize_index(state, state.env_value(frame, c[1]));
                MemRegion::Element {
                    base: Box::new(base),
                    index: Box::new(index),
                }
            }
            other => unreachable!("not an lvalue: {other:?}"),
        }
    }

    fn eval_element(&mut self, pred: usize, frame: FrameId, block: BlockId, index: usize, mut state: ProgramState) {
        let element = self.cfg(frame).block(block).elements[index];
        let ast = &self.unit.ast;
        let node = element.node();
        let c = ast.children(node);
        match element {
            Element::Bind { value, .. } => {
                state.env.insert((frame, node), SVal::Int(value));
            }
            Element::Node(_) => match ast.kind(node) {
                NodeKind::IntLit(v) => {
                    state.env.insert((frame, node), SVal::Int(*v));
                }
                NodeKind::VarRef(_) | NodeKind::ArrayIndex => {
                    let region = self.lvalue_region(&state, frame, node);
                    let v = state.load(&region);
                    state.env.insert((frame, node), v);
                }
                NodeKind::UnaryOp(op) => {
                    let v = unary(&state, *op, state.env_value(frame, c[0]));
                    state.env.insert((frame, node), v);
                }
                NodeKind::BinaryOp(op) => {
                    let v = binary(&state, *op, state.env_value(frame, c[0]), state.env_value(frame, c[1]));
                    state.env.insert((frame, node), v);
                }
                NodeKind::VarDecl { array_len, .. } => {
                    let region = MemRegion::var(frame, node);
                    if array_len.is_some() {
                        state.clear_elements(&region);
                        state.store.remove(&region);
                    } else if let Some(&init) = c.first() {
                        let v = state.env_value(frame, init);
                        state.bind(region, v);
                    } else {
                        state.store.remove(&region);
                    }
                }
                NodeKind::AssignStmt(_) => {
                    let region = self.lvalue_region(&state, frame, c[0]);
                    let v = state.env_value(frame, c[1]);
                    state.bind(region, v);
                }
                NodeKind::ExprStmt => {}
                NodeKind::Call(_) => return self.eval_call(pred, frame, block, index, node, state),
                other => unreachable!("not an element: {other:?}"),
            },
        }
        self.finish_element(pred, frame, block, index, node, state);
    }

    fn finish_element(
        &mut self,
        pred: usize,
        frame: FrameId,
        block: BlockId,
        index: usize,
        node: NodeId,
        state: ProgramState,
    ) {
        let point = ProgramPoint::new(PointKind::PostStmt { block, index, node }, frame);
        if matches!(self.cfg(frame).block(block).elements[index], Element::Bind { .. }) {
            let counters = self.counters[pred].clone();
            self.add_node(Some(pred), point, state, false, counters, Vec::new());
        } else {
            self.add_checked(pred, point, state, Hook::Post);
        }
    }

    fn eval_call(
        &mut self,
        pred: usize,
        frame: FrameId,
        block: BlockId,
        index: usize,
        call: NodeId,
        mut state: ProgramState,
    ) {
        let ast = &self.unit.ast;
        let args = ast.children(call);
        match self.unit.sema.callee(call).expect("calls are resolved") {
            Callee::Intrinsic(i @ (Intrinsic::Input | Intrinsic::Open)) => {
                let s = self.symbols.conjure(i.name());
                state.constraints.track(s);
                state
                    .env
                    .insert((frame, call), SVal::Sym(SymExpr::Atom(s)));
            }
            Callee::Intrinsic(Intrinsic::Close) => {}
            Callee::Intrinsic(Intrinsic::SaDump) => {
                let v = state.env_value(frame, args[0]);
                let range = match &v {
                    SVal::Int(k) => RangeSet::single(*k),
                    SVal::Sym(e) => state.constraints.range_of(*e),
                    SVal::Undefined => RangeSet::empty(),
                    _ => RangeSet::full(),
                };
                let loc = ast.loc(call);
                self.dumps.push(format!(
                    "sa_dump @{}:{}: {} ; constraints: {}",
                    loc.file,
                    loc.line,
                    self.symbols.sval(ast, &v),
                    range
                ));
            }
            Callee::Function(f) => {
                if self.should_inline(frame, f) {
                    return self.inline_call(pred, frame, call, f, state);
                }
                self.stats.conservative_calls += 1;
                for (i, &arg) in args.iter().enumerate() {
                    if !crate::cfg::is_ref_argument(ast, &self.unit.sema, call, i) {
                        continue;
                    }
                    match self.lvalue_region(&state, frame, arg) {
                        r @ MemRegion::Var { .. } => {
                            let MemRegion::Var { decl, .. } = r else { unreachable!() };
                            let s = self.symbols.conjure(ast.decl_name(decl));
                            state.constraints.track(s);
                            state.bind(r, SVal::Sym(SymExpr::Atom(s)));
                        }
                        MemRegion::Element { base, .. } => state.invalidate_array(&base),
                    }
                }
                if matches!(ast.kind(f), NodeKind::FunctionDecl { ret: ReturnType::Int, .. }) {
                    let s = self.symbols.conjure(ast.function_name(f));
                    state.constraints.track(s);
                    state
                        .env
                        .insert((frame, call), SVal::Sym(SymExpr::Atom(s)));
                }
            }
        }
        self.finish_element(pred, frame, block, index, call, state);
    }

    fn should_inline(&self, frame: FrameId, callee: NodeId) -> bool {
        let Some(cfg) = self.unit.cfg(callee) else {
            return false;
        };
        let b = &self.opts.budget;
        let blocks = cfg.len() as u32;
        let mut recursive = false;
        let mut cur = Some(frame);
        while let Some(f) = cur {
            let info = &self.frames[f.0 as usize];
            recursive |= info.function == callee;
            cur = info.caller;
        }
        let depth = self.frames[frame.0 as usize].depth;
        let small = blocks <= b.small_fn_blocks && !recursive;
        let depth_ok = depth < b.max_call_depth || small;
        let size_ok = blocks < b.large_cfg_blocks
            || self.inline_counts.get(&callee).copied().unwrap_or(0) < b.max_inline_of_large;
        depth_ok && size_ok
    }

    fn inline_call(&mut self, pred: usize, frame: FrameId, call: NodeId, callee: NodeId, mut state: ProgramState) {
        let depth = self.frames[frame.0 as usize].depth + 1;
        let next = FrameId(self.frames.len() as u32);
        let g = *self.frame_ids.entry((frame, call)).or_insert(next);
        if g == next {
            self.frames.push(FrameInfo {
                function: callee,
                caller: Some(frame),
                call: Some(call),
                depth,
            });
        }
        let ast = &self.unit.ast;
        state.pop_frame(g);
        for (&p, &arg) in ast.params(callee).iter().zip(ast.children(call)) {
            let by_ref = matches!(ast.kind(p), NodeKind::ParamDecl { by_ref: true, .. });
            let v = if by_ref {
                SVal::Region(self.lvalue_region(&state, frame, arg))
            } else {
                state.env_value(frame, arg)
            };
            state.store.insert(MemRegion::var(g, p), v);
        }
        if self.opts.collect_garbage {
            self.consume(&mut state, frame, call, false);
        }
        self.stats.inlined_calls += 1;
        self.stats.max_frame_depth = self.stats.max_frame_depth.max(depth as u64);
        *self.inline_counts.entry(callee).or_insert(0) += 1;
        self.inlined.insert(callee);

        let mut counters = (*self.counters[pred]).clone();
        counters.retain(|(f, _), _| *f != g);
        let point = ProgramPoint::new(PointKind::CallEnter { call, callee }, g);
        self.add_node(Some(pred), point, state, false, Rc::new(counters), Vec::new());
    }

    /// Leaves an inlined frame: the return value moves to the call site.
    fn return_from(&mut self, pred: usize, frame: FrameId, mut state: ProgramState) {
        let info = &self.frames[frame.0 as usize];
        let (Some(caller), Some(call)) = (info.caller, info.call) else {
            return; // end of the top-level function
        };
        let ret = state.env.get(&(frame, info.function)).cloned();
        state.pop_frame(frame);
        if matches!(self.unit.ast.kind(info.function), NodeKind::FunctionDecl { ret: ReturnType::Int, .. }) {
            state.env.insert((caller, call), ret.unwrap_or(SVal::Undefined));
        }
        let mut counters = (*self.counters[pred]).clone();
        counters.retain(|(f, _), _| *f != frame);
        let point = ProgramPoint::new(PointKind::CallExit { call }, caller);
        self.add_node(Some(pred), point, state, false, Rc::new(counters), Vec::new());
    }

    fn build_reports(&self) -> Vec<Report> {
        self.pending
            .iter()
            .map(|(node, p)| Report::new(p.checker, p.message.clone(), p.loc.clone(), self.path_events(*node, &p.track)))
            .collect()
    }

    fn path_events(&self, node: usize, track: &Track) -> Vec<PathEvent> {
        let ast = &self.unit.ast;
        let mut events = Vec::new();
        let mut note: Option<(usize, PathEvent)> = None;
        for id in self.graph.path_to(node) {
            let n = self.graph.node(id);
            let frame = n.point.frame;
            match n.point.kind {
                PointKind::BranchTaken { block, which } => {
                    let cfg = self.cfg(frame);
                    let Some(d) = cfg.decision(block) else { continue };
                    let Terminator::CondBranch { on_true, on_false, .. } = cfg.block(block).terminator else {
                        continue;
                    };
                    let target = if which { on_true } else { on_false };
                    let taken = target == d.then_block;
                    let text = match (ast.kind(d.stmt), taken) {
                        (NodeKind::WhileStmt, true) => "Loop condition is true. Entering loop body",
                        (NodeKind::WhileStmt, false) => "Loop condition is false. Exiting loop",
                        (_, true) => "Taking true branch",
                        (_, false) => "Taking false branch",
                    };
                    events.push(PathEvent {
                        loc: ast.loc(d.stmt).clone(),
                        kind: if taken { EventKind::BranchTrue } else { EventKind::BranchFalse },
                        note: text.into(),
                    });
                }
                PointKind::CallEnter { call, callee } => events.push(PathEvent {
                    loc: ast.loc(call).clone(),
                    kind: EventKind::CallEnter,
                    note: format!("Calling '{}'", ast.function_name(callee)),
                }),
                PointKind::CallExit { call } => {
                    let name = match ast.kind(call) {
                        NodeKind::Call(name) => name.clone(),
                        _ => unreachable!(),
                    };
                    events.push(PathEvent {
                        loc: ast.loc(call).clone(),
                        kind: EventKind::CallExit,
                        note: format!("Returning from '{name}'"),
                    });
                }
                PointKind::PostStmt { node: stmt, .. } => {
                    if let Some(text) = self.track_note(track, frame, stmt, &n.state) {
                        note = Some((
                            events.len(),
                            PathEvent {
                                loc: ast.loc(stmt).clone(),
                                kind: EventKind::Event,
                                note: text,
                            },
                        ));
                    }
                }
                _ => {}
            }
        }
        if let Some((at, e)) = note {
            events.insert(at, e);
        }
        events
    }

    fn track_note(&self, track: &Track, frame: FrameId, stmt: NodeId, state: &ProgramState) -> Option<String> {
        let ast = &self.unit.ast;
        match track {
            Track::None => None,
            Track::Expr { frame: f, node, note } => (*f == frame && *node == stmt).then(|| note.clone()),
            Track::Variable { frame: f, decl } => {
                if *f != frame {
                    return None;
                }
                let name = ast.decl_name(*decl);
                let value = || {
                    let v = state.load(&self.decl_region(state, frame, *decl));
                    self.symbols.sval(ast, &v)
                };
                match ast.kind(stmt) {
                    NodeKind::VarDecl { .. } if stmt == *decl => Some(if ast.children(stmt).is_empty() {
                        format!("'{name}' declared without an initial value")
                    } else {
                        format!("'{name}' initialized to {}", value())
                    }),
                    NodeKind::AssignStmt(_) => {
                        let target = ast.children(stmt)[0];
                        (matches!(ast.kind(target), NodeKind::VarRef(_))
                            && self.unit.sema.decl_of(target) == Some(*decl))
                        .then(|| format!("'{name}' is assigned {}", value()))
                    }
                    _ => None,
                }
            }
        }
    }
}

/// Pins a symbolic index whose range is a single value to that value.
fn normalize_index(state: &ProgramState, v: SVal) -> SVal {
    match v {
        SVal::Sym(e) => match state.constraints.range_of(e).as_single() {
            Some(k) => SVal::Int(k),
            None => v,
        },
        SVal::Int(_) => v,
        _ => SVal::Unknown,
    }
}

fn unary(state: &ProgramState, op: UnOp, v: SVal) -> SVal {
    match (op, v) {
        (_, SVal::Undefined) => SVal::Undefined,
        (UnOp::Neg, SVal::Int(k)) => SVal::Int(k.wrapping_neg()),
        (UnOp::Not, SVal::Int(k)) => SVal::Int((k == 0) as i64),
        (UnOp::Not, SVal::Sym(e)) => match query_zeroness(&state.constraints, QueryValue::Symbolic(e)) {
            Zeroness::OnlyZero => SVal::Int(1),
            Zeroness::NeverZero => SVal::Int(0),
            Zeroness::MaybeZero => SVal::Unknown,
        },
        _ => SVal::Unknown,
    }
}

fn binary(state: &ProgramState, op: BinOp, l: SVal, r: SVal) -> SVal {
    if l == SVal::Undefined || r == SVal::Undefined {
        return SVal::Undefined;
    }
    match (op, l, r) {
        (op, SVal::Int(a), SVal::Int(b)) => eval_concrete_binop(a, op, b).map_or(SVal::Unknown, SVal::Int),
        (BinOp::Add, SVal::Sym(e), SVal::Int(k)) | (BinOp::Add, SVal::Int(k), SVal::Sym(e)) => SVal::Sym(e + k),
        (BinOp::Sub, SVal::Sym(e), SVal::Int(k)) => SVal::Sym(e + k.wrapping_neg()),
        (op, SVal::Sym(e), SVal::Int(k)) if op.is_relational() => decide(state, e, op, k, false),
        (op, SVal::Int(k), SVal::Sym(e)) if op.is_relational() => decide(state, e, op, k, true),
        _ => SVal::Unknown,
    }
}

/// `e rel k` as 1 or 0 when the range of `e` decides it.
fn decide(state: &ProgramState, e: SymExpr, op: BinOp, k: i64, flipped: bool) -> SVal {
    let Some(mut rel) = Relation::from_binop(op) else {
        return SVal::Unknown;
    };
    if flipped {
        rel = rel.flip();
    }
    match (
        assume(&state.constraints, e, rel, k, true),
        assume(&state.constraints, e, rel, k, false),
    ) {
        (Some(_), None) => SVal::Int(1),
        (None, Some(_)) => SVal::Int(0),
        _ => SVal::Unknown,
    }
}
