//! Path-sensitive symbolic execution over the CFGs of a translation unit.
//!
//! Each top-level function is explored depth-first, building an
//! [`ExplodedGraph`] of (program point, state) pairs. Calls to functions with
//! a body are inlined while the [`AnalysisBudget`] allows it and evaluated
//! conservatively otherwise. Checkers observe the exploration through the
//! [`Checker`] hooks.

mod engine;
mod graph;
mod state;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use graph::{state_json, ExplodedGraph, ExplodedNode, PointKind, ProgramPoint};
pub use state::{FrameId, Gdm, GdmEntry, MemRegion, ProgramState, SVal, SymbolTable};

use crate::dataflow::Liveness;
use crate::frontend::{Ast, Callee, NodeId, NodeKind, SourceLocation};
use crate::report::{normalize_reports, Report};
use crate::unit::TranslationUnit;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalysisBudget {
    /// Inlining stops at this frame depth (top level is depth 0)...
    pub max_call_depth: u32,
    /// ...except for callees with at most this many CFG blocks.
    pub small_fn_blocks: u32,
    /// Callees with at least this many blocks are "large"...
    pub large_cfg_blocks: u32,
    /// ...and are inlined at most this many times per top-level analysis.
    pub max_inline_of_large: u32,
    /// Per path, a block entered more often than this ends the path.
    pub max_block_visits: u32,
    /// Exploded-graph size at which a top-level analysis is abandoned.
    pub max_nodes: u32,
}

impl Default for AnalysisBudget {
    fn default() -> Self {
        Self {
            max_call_depth: 4,
            small_fn_blocks: 3,
            large_cfg_blocks: 14,
            max_inline_of_large: 2,
            max_block_visits: 4,
            max_nodes: 50_000,
        }
    }
}

impl AnalysisBudget {
    pub const KEYS: [&'static str; 6] = [
        "max_call_depth",
        "small_fn_blocks",
        "large_cfg_blocks",
        "max_inline_of_large",
        "max_block_visits",
        "max_nodes",
    ];

    /// Overrides one limit by name. Values must be positive.
    pub fn set(&mut self, key: &str, value: u32) -> Result<(), String> {
        if value == 0 {
            return Err(format!("budget value for '{key}' must be positive"));
        }
        let slot = match key {
            "max_call_depth" => &mut self.max_call_depth,
            "small_fn_blocks" => &mut self.small_fn_blocks,
            "large_cfg_blocks" => &mut self.large_cfg_blocks,
            "max_inline_of_large" => &mut self.max_inline_of_large,
            "max_block_visits" => &mut self.max_block_visits,
            "max_nodes" => &mut self.max_nodes,
            _ => {
                return Err(format!(
                    "unknown budget key '{key}' (expected one of {})",
                    Self::KEYS.join(", ")
                ))
            }
        };
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub budget: AnalysisBudget,
    /// Dead-symbol collection; turning it off only costs memory and
    /// deduplication.
    pub collect_garbage: bool,
    /// Keep each top-level function's exploded graph in the result.
    pub keep_graphs: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            budget: AnalysisBudget::default(),
            collect_garbage: true,
            keep_graphs: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub nodes_created: u64,
    pub functions_analyzed: u64,
    /// Paths cut because a block was entered too often.
    pub block_visit_exhausted: u64,
    /// Top-level analyses abandoned at the node limit.
    pub node_budget_exhausted: u64,
    pub inlined_calls: u64,
    pub conservative_calls: u64,
    pub max_frame_depth: u64,
}

impl Stats {
    pub fn add(&mut self, o: &Stats) {
        self.nodes_created += o.nodes_created;
        self.functions_analyzed += o.functions_analyzed;
        self.block_visit_exhausted += o.block_visit_exhausted;
        self.node_budget_exhausted += o.node_budget_exhausted;
        self.inlined_calls += o.inlined_calls;
        self.conservative_calls += o.conservative_calls;
        self.max_frame_depth = self.max_frame_depth.max(o.max_frame_depth);
    }

    pub fn to_map(&self) -> BTreeMap<String, i64> {
        [
            ("nodes_created", self.nodes_created),
            ("functions_analyzed", self.functions_analyzed),
            ("block_visit_exhausted", self.block_visit_exhausted),
            ("node_budget_exhausted", self.node_budget_exhausted),
            ("inlined_calls", self.inlined_calls),
            ("conservative_calls", self.conservative_calls),
            ("max_frame_depth", self.max_frame_depth),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v as i64))
        .collect()
    }
}

/// What a path note should point at when the report path is built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Track {
    None,
    /// Note the last write to this variable before the report.
    Variable { frame: FrameId, decl: NodeId },
    /// Note the evaluation of this expression.
    Expr { frame: FrameId, node: NodeId, note: String },
}

#[derive(Debug, Clone)]
pub struct PendingReport {
    pub checker: &'static str,
    pub message: String,
    pub loc: SourceLocation,
    pub track: Track,
}

/// Checker view of one transition. A callback may replace `state`, add
/// reports and end the path with [`CheckerContext::sink`].
pub struct CheckerContext<'a> {
    pub unit: &'a TranslationUnit,
    pub symbols: &'a SymbolTable,
    pub frame: FrameId,
    pub state: ProgramState,
    reports: Vec<PendingReport>,
    sink: bool,
}

impl<'a> CheckerContext<'a> {
    pub fn new(unit: &'a TranslationUnit, symbols: &'a SymbolTable, frame: FrameId, state: ProgramState) -> Self {
        Self {
            unit,
            symbols,
            frame,
            state,
            reports: Vec::new(),
            sink: false,
        }
    }

    pub fn ast(&self) -> &'a Ast {
        &self.unit.ast
    }

    /// Value of an already evaluated expression in the current frame.
    pub fn value(&self, node: NodeId) -> SVal {
        self.state.env_value(self.frame, node)
    }

    pub fn report(&mut self, checker: &'static str, message: impl Into<String>, loc: SourceLocation, track: Track) {
        self.reports.push(PendingReport {
            checker,
            message: message.into(),
            loc,
            track,
        });
    }

    /// Tracks the variable a `VarRef` names, in the current frame.
    pub fn track_var(&self, var_ref: NodeId) -> Track {
        match self.ast().kind(var_ref) {
            NodeKind::VarRef(_) => match self.unit.sema.decl_of(var_ref) {
                Some(decl) => Track::Variable {
                    frame: self.frame,
                    decl,
                },
                None => Track::None,
            },
            _ => Track::None,
        }
    }

    pub fn sink(&mut self) {
        self.sink = true;
    }

    pub fn is_sink(&self) -> bool {
        self.sink
    }

    pub fn into_parts(self) -> (ProgramState, Vec<PendingReport>, bool) {
        (self.state, self.reports, self.sink)
    }
}

/// Callbacks are invoked in registration order; all default to no-ops.
pub trait Checker {
    fn id(&self) -> &'static str;
    /// Before an element is evaluated; its operands are in the environment.
    fn pre_stmt(&self, _ctx: &mut CheckerContext<'_>, _node: NodeId) {}
    /// After an element is evaluated.
    fn post_stmt(&self, _ctx: &mut CheckerContext<'_>, _node: NodeId) {}
    fn pre_call(&self, _ctx: &mut CheckerContext<'_>, _call: NodeId) {}
    fn post_call(&self, _ctx: &mut CheckerContext<'_>, _call: NodeId) {}
    /// Before a conditional branch on `cond` is split.
    fn branch_condition(&self, _ctx: &mut CheckerContext<'_>, _cond: NodeId) {}
    /// At the end of the top-level function on each path.
    fn end_of_path(&self, _ctx: &mut CheckerContext<'_>) {}
}

/// Result of analyzing one top-level function.
#[derive(Debug, Clone)]
pub struct FunctionAnalysis {
    pub function: NodeId,
    pub name: String,
    pub stats: Stats,
    pub reports: Vec<Report>,
    /// `sa_dump` lines in exploration order.
    pub dumps: Vec<String>,
    /// Functions inlined during this analysis.
    pub inlined: BTreeSet<NodeId>,
    pub graph: Option<ExplodedGraph>,
    pub symbols: SymbolTable,
}

impl FunctionAnalysis {
    /// Return values on the paths that reached the end of the function.
    pub fn return_values(&self) -> Vec<SVal> {
        let Some(g) = &self.graph else {
            return Vec::new();
        };
        g.nodes
            .iter()
            .filter(|n| n.point.kind == PointKind::EndOfFunction && n.point.frame == FrameId::TOP)
            .map(|n| n.state.env_value(FrameId::TOP, self.function))
            .collect()
    }

    pub fn graph_json(&self, ast: &Ast) -> Option<serde_json::Value> {
        self.graph.as_ref().map(|g| {
            serde_json::json!({
                "function": self.name,
                "graph": g.to_json(ast, &self.symbols),
            })
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProgramAnalysis {
    pub reports: Vec<Report>,
    pub stats: Stats,
    pub functions: Vec<FunctionAnalysis>,
}

impl ProgramAnalysis {
    pub fn dumps(&self) -> Vec<String> {
        self.functions.iter().flat_map(|f| f.dumps.iter().cloned()).collect()
    }
}

/// Order in which functions are tried as top-level entry points: `main`,
/// then functions no other function calls, then the rest; each group in
/// declaration order. Functions without a body are never analyzed.
pub fn top_level_order(unit: &TranslationUnit) -> Vec<NodeId> {
    let (ast, sema) = (&unit.ast, &unit.sema);
    let defined: Vec<NodeId> = ast.functions().filter(|&f| ast.body(f).is_some()).collect();
    let mut called = BTreeSet::new();
    for &f in &defined {
        for n in ast.preorder(f) {
            if let Some(Callee::Function(g)) = sema.callee(n) {
                if g != f {
                    called.insert(g);
                }
            }
        }
    }
    let is_main = |f: NodeId| ast.function_name(f) == "main";
    let mut order: Vec<NodeId> = defined.iter().copied().filter(|&f| is_main(f)).collect();
    order.extend(defined.iter().copied().filter(|&f| !is_main(f) && !called.contains(&f)));
    order.extend(defined.iter().copied().filter(|&f| !is_main(f) && called.contains(&f)));
    order
}

/// Precomputed per-function facts the engine needs.
pub(crate) struct FunctionFacts {
    pub liveness: HashMap<NodeId, Liveness>,
    /// Local variable declarations (not parameters) of each function.
    pub locals: HashMap<NodeId, Vec<NodeId>>,
}

impl FunctionFacts {
    fn compute(unit: &TranslationUnit) -> Self {
        let mut liveness = HashMap::new();
        let mut locals = HashMap::new();
        for cfg in unit.cfgs() {
            liveness.insert(cfg.function, Liveness::compute(&unit.ast, &unit.sema, cfg));
            let decls = unit
                .sema
                .decls_of_function(cfg.function)
                .into_iter()
                .filter(|&d| matches!(unit.ast.kind(d), NodeKind::VarDecl { .. }))
                .collect();
            locals.insert(cfg.function, decls);
        }
        Self { liveness, locals }
    }
}

/// Explores a single function as a top-level entry point.
pub fn explore_function(
    unit: &TranslationUnit,
    function: NodeId,
    checkers: &[Box<dyn Checker>],
    opts: &AnalysisOptions,
) -> FunctionAnalysis {
    let facts = FunctionFacts::compute(unit);
    engine::Engine::new(unit, checkers, opts, &facts).run(function)
}

/// Analyzes every top-level function of the unit, skipping functions that
/// an earlier top-level analysis inlined.
pub fn analyze_program(
    unit: &TranslationUnit,
    checkers: &[Box<dyn Checker>],
    opts: &AnalysisOptions,
) -> ProgramAnalysis {
    let facts = FunctionFacts::compute(unit);
    let mut visited = BTreeSet::new();
    let mut out = ProgramAnalysis::default();
    for f in top_level_order(unit) {
        if visited.contains(&f) {
            continue;
        }
        let fa = engine::Engine::new(unit, checkers, opts, &facts).run(f);
        visited.extend(fa.inlined.iter().copied());
        out.stats.add(&fa.stats);
        out.reports.extend(fa.reports.iter().cloned());
        out.functions.push(fa);
    }
    normalize_reports(&mut out.reports);
    out
}
