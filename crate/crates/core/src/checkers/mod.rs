//! Checker registry and the pipeline that runs every enabled check on a
//! translation unit.

mod core;
mod stream;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use self::core::{ArrayBounds, DivideByZero, UninitRead, ARRAY_BOUNDS, DIV_ZERO, UNINIT_READ};
pub use self::stream::{Stream, STREAM};
use crate::dataflow::{flow_div_zero_check, uninit_check, MergeMode, FLOW_DIV_ZERO, FLOW_UNINIT};
use crate::matcher::{self, CONSTANT_CONDITION, SELF_ASSIGN, TOKEN_DIV_LITERAL_ZERO};
use crate::report::{normalize_reports, Report};
use crate::symexec::{analyze_program, AnalysisOptions, Checker, ProgramAnalysis};
use crate::unit::TranslationUnit;

/// Which method a check is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Token,
    Ast,
    Dataflow,
    PathSensitive,
}

#[derive(Debug, Clone, Copy)]
pub struct CheckerInfo {
    pub id: &'static str,
    pub method: Method,
    pub doc: &'static str,
}

pub const REGISTRY: &[CheckerInfo] = &[
    CheckerInfo {
        id: DIV_ZERO,
        method: Method::PathSensitive,
        doc: "division or modulo by a value that is zero on a feasible path",
    },
    CheckerInfo {
        id: UNINIT_READ,
        method: Method::PathSensitive,
        doc: "read of a variable or array element never written on the path",
    },
    CheckerInfo {
        id: ARRAY_BOUNDS,
        method: Method::PathSensitive,
        doc: "array index outside the declared size",
    },
    CheckerInfo {
        id: STREAM,
        method: Method::PathSensitive,
        doc: "handle from open() closed twice or never closed",
    },
    CheckerInfo {
        id: FLOW_DIV_ZERO,
        method: Method::Dataflow,
        doc: "divisor is a variable marked zero (merge chosen by --flow-mode)",
    },
    CheckerInfo {
        id: FLOW_UNINIT,
        method: Method::Dataflow,
        doc: "variable may be read before any assignment",
    },
    CheckerInfo {
        id: TOKEN_DIV_LITERAL_ZERO,
        method: Method::Token,
        doc: "'/' or '%' directly followed by the literal 0",
    },
    CheckerInfo {
        id: SELF_ASSIGN,
        method: Method::Ast,
        doc: "variable or array element assigned to itself",
    },
    CheckerInfo {
        id: CONSTANT_CONDITION,
        method: Method::Ast,
        doc: "if/while condition is an integer literal",
    },
];

pub fn all_ids() -> BTreeSet<String> {
    REGISTRY.iter().map(|c| c.id.to_string()).collect()
}

/// Everything except the dataflow checks, which are opt-in: they exist to
/// compare merge modes and overlap with the path-sensitive checks.
pub fn default_ids() -> BTreeSet<String> {
    REGISTRY
        .iter()
        .filter(|c| c.method != Method::Dataflow)
        .map(|c| c.id.to_string())
        .collect()
}

pub fn ids_of(method: Method) -> BTreeSet<String> {
    REGISTRY
        .iter()
        .filter(|c| c.method == method)
        .map(|c| c.id.to_string())
        .collect()
}

/// `id  doc` lines, one per checker, in registry order.
pub fn list_checkers() -> String {
    let width = REGISTRY.iter().map(|c| c.id.len()).max().unwrap_or(0);
    REGISTRY
        .iter()
        .map(|c| format!("{:width$}  {}\n", c.id, c.doc))
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown checker '{0}' (see --list-checkers)")]
pub struct UnknownChecker(pub String);

/// Parses a comma-separated id list.
pub fn parse_ids(list: &str) -> Result<BTreeSet<String>, UnknownChecker> {
    let known = all_ids();
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            if known.contains(s) {
                Ok(s.to_string())
            } else {
                Err(UnknownChecker(s.to_string()))
            }
        })
        .collect()
}

/// The path-sensitive checkers among `ids`, in registry order.
pub fn path_checkers(ids: &BTreeSet<String>) -> Vec<Box<dyn Checker>> {
    let mut out: Vec<Box<dyn Checker>> = Vec::new();
    for c in REGISTRY.iter().filter(|c| ids.contains(c.id)) {
        match c.id {
            DIV_ZERO => out.push(Box::new(DivideByZero)),
            UNINIT_READ => out.push(Box::new(UninitRead)),
            ARRAY_BOUNDS => out.push(Box::new(ArrayBounds)),
            STREAM => out.push(Box::new(Stream)),
            _ => {}
        }
    }
    out
}

pub fn default_checkers() -> Vec<Box<dyn Checker>> {
    path_checkers(&all_ids())
}

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub enabled: BTreeSet<String>,
    pub flow_mode: MergeMode,
    pub options: AnalysisOptions,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            enabled: default_ids(),
            flow_mode: MergeMode::May,
            options: AnalysisOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct UnitAnalysis {
    pub reports: Vec<Report>,
    pub stats: BTreeMap<String, i64>,
    pub symbolic: ProgramAnalysis,
}

/// Runs every enabled check on `unit`: token and AST checks on the source
/// as written, dataflow and path-sensitive checks on the desugared CFGs.
pub fn analyze_unit(unit: &TranslationUnit, config: &AnalysisConfig) -> UnitAnalysis {
    let on = |id: &str| config.enabled.contains(id);
    let mut reports = Vec::new();
    if on(TOKEN_DIV_LITERAL_ZERO) {
        reports.extend(matcher::token_div_literal_zero(unit));
    }
    if on(SELF_ASSIGN) {
        reports.extend(matcher::self_assign(unit));
    }
    if on(CONSTANT_CONDITION) {
        reports.extend(matcher::constant_condition(unit));
    }
    for cfg in unit.cfgs() {
        if on(FLOW_DIV_ZERO) {
            reports.extend(flow_div_zero_check(&unit.ast, &unit.sema, cfg, config.flow_mode));
        }
        if on(FLOW_UNINIT) {
            reports.extend(uninit_check(&unit.ast, &unit.sema, cfg));
        }
    }
    let checkers = path_checkers(&config.enabled);
    let symbolic = analyze_program(unit, &checkers, &config.options);
    reports.extend(symbolic.reports.iter().cloned());
    normalize_reports(&mut reports);
    UnitAnalysis {
        reports,
        stats: symbolic.stats.to_map(),
        symbolic,
    }
}

#[cfg(test)]
mod tests;
