//! Diagnostics, runs of diagnostics, suppression and run diffing.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::SourceLocation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    High,
    Medium,
    Low,
    Style,
}

impl Severity {
    /// Fixed severity per checker family.
    pub fn for_checker(checker: &str) -> Self {
        match checker.split('.').next().unwrap_or("") {
            "core" => Severity::High,
            "flow" | "resource" => Severity::Medium,
            "style" => Severity::Style,
            _ => Severity::Low,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::High => "HIGH",
            Severity::Medium => "MEDIUM",
            Severity::Low => "LOW",
            Severity::Style => "STYLE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Event,
    BranchTrue,
    BranchFalse,
    CallEnter,
    CallExit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathEvent {
    pub loc: SourceLocation,
    pub kind: EventKind,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Report {
    pub checker: String,
    pub severity: Severity,
    pub message: String,
    pub loc: SourceLocation,
    pub path: Vec<PathEvent>,
    pub hash: u64,
}

impl Report {
    /// Builds a report whose path ends with an event at `loc` carrying the
    /// message. `path` holds the events leading up to it.
    pub fn new(
        checker: &str,
        message: impl Into<String>,
        loc: SourceLocation,
        mut path: Vec<PathEvent>,
    ) -> Self {
        let message = message.into();
        path.push(PathEvent {
            loc: loc.clone(),
            kind: EventKind::Event,
            note: message.clone(),
        });
        let hash = report_hash(checker, &loc, &message);
        Self {
            checker: checker.to_string(),
            severity: Severity::for_checker(checker),
            message,
            loc,
            path,
            hash,
        }
    }

    fn sort_key(&self) -> (&str, u32, u32, &str, &str, u64) {
        (
            &self.loc.file,
            self.loc.line,
            self.loc.column,
            &self.checker,
            &self.message,
            self.hash,
        )
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes.iter().fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

/// Identity of a defect: checker, file base name, position and message.
/// Paths and run metadata do not contribute.
pub fn report_hash(checker: &str, loc: &SourceLocation, message: &str) -> u64 {
    let base = Path::new(&loc.file)
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| loc.file.clone());
    let key = format!("{checker}:{base}:{}:{}:{message}", loc.line, loc.column);
    fnv1a64(key.as_bytes())
}

/// Sorts reports by position and drops duplicate hashes.
pub fn normalize_reports(reports: &mut Vec<Report>) {
    reports.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut seen = BTreeSet::new();
    reports.retain(|r| seen.insert(r.hash));
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub name: String,
    pub timestamp: String,
    pub tool_version: String,
    pub reports: Vec<Report>,
    pub stats: BTreeMap<String, i64>,
}

impl Run {
    pub fn new(name: impl Into<String>, timestamp: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            timestamp: timestamp.into(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            reports: Vec::new(),
            stats: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuppressionSource {
    File,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Suppression {
    pub source: SuppressionSource,
    /// Checker id or `*`.
    pub checker: String,
    pub file: String,
    /// `None` matches every line.
    pub line: Option<u32>,
}

impl Suppression {
    pub fn matches(&self, report: &Report) -> bool {
        (self.checker == "*" || self.checker == report.checker)
            && path_suffix_match(&report.loc.file, &self.file)
            && self.line.is_none_or(|l| l == report.loc.line)
    }
}

/// `file` equals `pattern` or ends with it on a path component boundary.
fn path_suffix_match(file: &str, pattern: &str) -> bool {
    let file = file.replace('\\', "/");
    let pattern = pattern.replace('\\', "/");
    let pattern = pattern.trim_start_matches("./");
    file == pattern || file.ends_with(&format!("/{pattern}"))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SuppressionError {
    #[error("line {line}: expected '<checker>:<file>:<line|*>', found '{text}'")]
    Malformed { line: usize, text: String },
}

/// Parses a suppression file: one `<checker>:<file>:<line|*>` rule per line,
/// `#` starts a comment.
pub fn parse_suppression_file(text: &str) -> Result<Vec<Suppression>, SuppressionError> {
    let mut rules = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let malformed = || SuppressionError::Malformed {
            line: i + 1,
            text: raw.to_string(),
        };
        let (checker, rest) = line.split_once(':').ok_or_else(malformed)?;
        let (file, line_no) = rest.rsplit_once(':').ok_or_else(malformed)?;
        let line_no = match line_no.trim() {
            "*" => None,
            n => Some(n.parse::<u32>().map_err(|_| malformed())?),
        };
        if checker.trim().is_empty() || file.trim().is_empty() {
            return Err(malformed());
        }
        rules.push(Suppression {
            source: SuppressionSource::File,
            checker: checker.trim().to_string(),
            file: file.trim().to_string(),
            line: line_no,
        });
    }
    Ok(rules)
}

/// Collects `// sa-suppress(<checker>)` annotations; each one suppresses the
/// named checker on its own line.
pub fn annotation_suppressions(file: &str, source: &str) -> Vec<Suppression> {
    const MARK: &str = "sa-suppress(";
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let Some(comment) = line.find("//").map(|p| &line[p + 2..]) else {
            continue;
        };
        let mut rest = comment;
        while let Some(p) = rest.find(MARK) {
            rest = &rest[p + MARK.len()..];
            if let Some(end) = rest.find(')') {
                out.push(Suppression {
                    source: SuppressionSource::Annotation,
                    checker: rest[..end].trim().to_string(),
                    file: file.to_string(),
                    line: Some(i as u32 + 1),
                });
                rest = &rest[end..];
            }
        }
    }
    out
}

/// Removes every report matched by a rule, from `rules` or from annotations
/// found in `sources` (file name to text). The removed count is added to the
/// run's `suppressed` stat.
pub fn apply_suppressions(
    run: &Run,
    rules: &[Suppression],
    sources: &HashMap<String, String>,
) -> (Run, usize) {
    let mut all: Vec<Suppression> = rules.to_vec();
    let mut files: Vec<_> = sources.iter().collect();
    files.sort();
    for (file, text) in files {
        all.extend(annotation_suppressions(file, text));
    }
    let mut out = run.clone();
    out.reports.retain(|r| !all.iter().any(|s| s.matches(r)));
    let removed = run.reports.len() - out.reports.len();
    *out.stats.entry("suppressed".into()).or_insert(0) += removed as i64;
    (out, removed)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunDiff {
    pub new: Vec<Report>,
    pub resolved: Vec<Report>,
    pub common: Vec<Report>,
}

pub fn diff_runs(old: &Run, new: &Run) -> RunDiff {
    let old_hashes: BTreeSet<u64> = old.reports.iter().map(|r| r.hash).collect();
    let new_hashes: BTreeSet<u64> = new.reports.iter().map(|r| r.hash).collect();
    RunDiff {
        new: new
            .reports
            .iter()
            .filter(|r| !old_hashes.contains(&r.hash))
            .cloned()
            .collect(),
        resolved: old
            .reports
            .iter()
            .filter(|r| !new_hashes.contains(&r.hash))
            .cloned()
            .collect(),
        common: new
            .reports
            .iter()
            .filter(|r| old_hashes.contains(&r.hash))
            .cloned()
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

/// Text rendering of a list of reports, ending with the count line.
pub fn render_reports_text(reports: &[Report]) -> String {
    let mut out = String::new();
    for r in reports {
        writeln!(out, "{}: {}: {} [{}]", r.severity, r.loc, r.message, r.checker).unwrap();
        for (i, e) in r.path.iter().enumerate() {
            writeln!(out, "  {}. {}: {}", i + 1, e.loc, e.note).unwrap();
        }
    }
    let n = reports.len();
    writeln!(out, "{n} report{}.", if n == 1 { "" } else { "s" }).unwrap();
    out
}

pub fn render(run: &Run, format: Format) -> String {
    match format {
        Format::Text => render_reports_text(&run.reports),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&RunJson::from(run))
                .expect("run serialization cannot fail");
            s.push('\n');
            s
        }
    }
}

#[derive(Debug, Error)]
pub enum RunParseError {
    #[error("invalid run file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported run file version {0}")]
    Version(u32),
    #[error("invalid report hash '{0}'")]
    Hash(String),
    #[error("invalid event kind '{0}'")]
    EventKind(String),
}

pub fn parse_run(text: &str) -> Result<Run, RunParseError> {
    let json: RunJson = serde_json::from_str(text)?;
    if json.version != 1 {
        return Err(RunParseError::Version(json.version));
    }
    let reports = json
        .reports
        .into_iter()
        .map(|r| {
            let hash =
                u64::from_str_radix(&r.hash, 16).map_err(|_| RunParseError::Hash(r.hash.clone()))?;
            let loc = SourceLocation::new(r.file, r.line, r.col, 0);
            Ok(Report {
                checker: r.checker,
                severity: r.severity,
                message: r.message,
                loc,
                path: r
                    .path
                    .into_iter()
                    .map(|e| PathEvent {
                        loc: SourceLocation::new(e.file, e.line, e.col, 0),
                        kind: e.kind,
                        note: e.note,
                    })
                    .collect(),
                hash,
            })
        })
        .collect::<Result<Vec<_>, RunParseError>>()?;
    Ok(Run {
        name: json.run_name,
        timestamp: json.timestamp,
        tool_version: json.tool_version,
        reports,
        stats: json.stats,
    })
}

// Wire format. Field order here is the on-disk order.

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunJson {
    version: u32,
    run_name: String,
    timestamp: String,
    tool_version: String,
    stats: BTreeMap<String, i64>,
    reports: Vec<ReportJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportJson {
    hash: String,
    checker: String,
    severity: Severity,
    message: String,
    file: String,
    line: u32,
    col: u32,
    path: Vec<EventJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventJson {
    file: String,
    line: u32,
    col: u32,
    kind: EventKind,
    note: String,
}

impl From<&Run> for RunJson {
    fn from(run: &Run) -> Self {
        RunJson {
            version: 1,
            run_name: run.name.clone(),
            timestamp: run.timestamp.clone(),
            tool_version: run.tool_version.clone(),
            stats: run.stats.clone(),
            reports: run
                .reports
                .iter()
                .map(|r| ReportJson {
                    hash: format!("{:016x}", r.hash),
                    checker: r.checker.clone(),
                    severity: r.severity,
                    message: r.message.clone(),
                    file: r.loc.file.clone(),
                    line: r.loc.line,
                    col: r.loc.column,
                    path: r
                        .path
                        .iter()
                        .map(|e| EventJson {
                            file: e.loc.file.clone(),
                            line: e.loc.line,
                            col: e.loc.column,
                            kind: e.kind,
                            note: e.note.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}
