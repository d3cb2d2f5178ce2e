//! `minisa analyze | print | diff`, plus `--list-checkers`.
//!
//! Exit codes: 0 clean, 1 reports (or a non-empty diff), 2 bad invocation,
//! unreadable input or frontend error.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::checkers::{self, AnalysisConfig};
use crate::dataflow::MergeMode;
use crate::frontend::print_ast;
use crate::report::{self, apply_suppressions, diff_runs, parse_run, render, render_reports_text, Format, Run};
use crate::symexec::Stats;
use crate::unit::TranslationUnit;

#[derive(Debug, Parser)]
#[command(name = "minisa", version, about = "Static analysis for MiniC", subcommand_negates_reqs = true)]
struct Cli {
    /// Print the checker ids with a one-line description and exit.
    #[arg(long)]
    list_checkers: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze source files and store the results as a run.
    Analyze(AnalyzeArgs),
    /// Render a stored run.
    Print {
        run: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Compare two stored runs.
    Diff {
        old: PathBuf,
        new: PathBuf,
        /// Only reports that appear in the new run.
        #[arg(long = "new")]
        only_new: bool,
        /// Only reports that disappeared.
        #[arg(long)]
        resolved: bool,
    },
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Source files; `@list` reads one path per line from `list`.
    #[arg(required = true)]
    inputs: Vec<String>,
    /// Comma-separated checker ids (default: all but the flow.* checks).
    #[arg(long)]
    checkers: Option<String>,
    /// Merge mode of the flow.* checks; also enables them unless
    /// --checkers is given.
    #[arg(long, value_enum)]
    flow_mode: Option<FlowMode>,
    /// Budget overrides, `key=value[,key=value...]`.
    #[arg(long)]
    budget: Option<String>,
    /// Suppression rules file.
    #[arg(long)]
    suppress: Option<PathBuf>,
    #[arg(long)]
    dump_cfg: bool,
    #[arg(long)]
    dump_exploded_graph: bool,
    #[arg(long)]
    dump_ast: bool,
    #[arg(long)]
    dump_tokens: bool,
    /// Fixed timestamp for the run (default: now).
    #[arg(long)]
    timestamp: Option<String>,
    #[arg(long, default_value = "minisa")]
    name: String,
    /// Where to write the run JSON.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FlowMode {
    May,
    Must,
}

/// Error carrying the message for the error stream; always exit code 2.
struct Fatal(String);

impl<E: std::fmt::Display> From<E> for Fatal {
    fn from(e: E) -> Self {
        Fatal(e.to_string())
    }
}

/// Runs the tool on `args` (including the program name).
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        _ if cli.list_checkers => stdout
            .write_all(checkers::list_checkers().as_bytes())
            .map(|_| 0)
            .map_err(Fatal::from),
        None => {
            let _ = writeln!(stderr, "minisa: no command given (try --help)");
            return 2;
        }
        Some(Command::Analyze(a)) => analyze(&a, stdout),
        Some(Command::Print { run, format }) => print(&run, format, stdout),
        Some(Command::Diff {
            old,
            new,
            only_new,
            resolved,
        }) => diff(&old, &new, only_new, resolved, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Fatal(msg)) => {
            let _ = writeln!(stderr, "minisa: {msg}");
            2
        }
    }
}

fn read(path: &std::path::Path) -> Result<String, Fatal> {
    fs::read_to_string(path).map_err(|e| Fatal(format!("cannot read {}: {e}", path.display())))
}

fn expand_inputs(inputs: &[String]) -> Result<Vec<String>, Fatal> {
    let mut out = Vec::new();
    for i in inputs {
        match i.strip_prefix('@') {
            Some(list) => {
                let text = read(list.as_ref())?;
                out.extend(
                    text.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(str::to_string),
                );
            }
            None => out.push(i.clone()),
        }
    }
    if out.is_empty() {
        return Err(Fatal("no input files".into()));
    }
    Ok(out)
}

fn config(a: &AnalyzeArgs) -> Result<AnalysisConfig, Fatal> {
    let mut cfg = AnalysisConfig::default();
    match (&a.checkers, a.flow_mode) {
        (Some(ids), _) => cfg.enabled = checkers::parse_ids(ids)?,
        (None, Some(_)) => cfg.enabled.extend(checkers::ids_of(checkers::Method::Dataflow)),
        (None, None) => {}
    }
    cfg.flow_mode = match a.flow_mode {
        Some(FlowMode::Must) => MergeMode::Must,
        _ => MergeMode::May,
    };
    for kv in a.budget.iter().flat_map(|b| b.split(',')).filter(|s| !s.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Fatal(format!("budget override '{kv}' is not key=value")))?;
        let v: u32 = v
            .trim()
            .parse()
            .map_err(|_| Fatal(format!("budget value for '{}' must be a positive integer", k.trim())))?;
        cfg.options.budget.set(k.trim(), v).map_err(Fatal)?;
    }
    cfg.options.keep_graphs = a.dump_exploded_graph;
    Ok(cfg)
}

fn analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32, Fatal> {
    let cfg = config(a)?;
    let rules = match &a.suppress {
        Some(p) => report::parse_suppression_file(&read(p)?)?,
        None => Vec::new(),
    };
    let timestamp = a
        .timestamp
        .clone()
        .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    let mut run = Run::new(a.name.clone(), timestamp);
    let mut stats = Stats::default();
    let mut sources = HashMap::new();
    let mut seen = BTreeSet::new();
    for file in expand_inputs(&a.inputs)? {
        if !seen.insert(file.clone()) {
            continue;
        }
        let source = read(file.as_ref())?;
        let unit = TranslationUnit::from_source(&file, &source).map_err(Fatal::from)?;
        if a.dump_tokens {
            writeln!(out, "{}", serde_json::to_string(&unit.tokens)?)?;
        }
        if a.dump_ast {
            out.write_all(print_ast(&unit.original).as_bytes())?;
        }
        if a.dump_cfg {
            for c in unit.cfgs() {
                let j = json!({"function": unit.ast.function_name(c.function), "cfg": c.to_json(&unit.ast)});
                writeln!(out, "{j}")?;
            }
        }
        let result = checkers::analyze_unit(&unit, &cfg);
        for line in result.symbolic.dumps() {
            writeln!(out, "{line}")?;
        }
        if a.dump_exploded_graph {
            for f in &result.symbolic.functions {
                if let Some(j) = f.graph_json(&unit.ast) {
                    writeln!(out, "{j}")?;
                }
            }
        }
        stats.add(&result.symbolic.stats);
        run.reports.extend(result.reports);
        sources.insert(file, source);
    }
    report::normalize_reports(&mut run.reports);
    run.stats = stats.to_map();
    let (run, _) = apply_suppressions(&run, &rules, &sources);
    if let Some(path) = &a.output {
        fs::write(path, render(&run, Format::Json))
            .map_err(|e| Fatal(format!("cannot write {}: {e}", path.display())))?;
    }
    out.write_all(render(&run, Format::Text).as_bytes())?;
    Ok(if run.reports.is_empty() { 0 } else { 1 })
}

fn load_run(path: &std::path::Path) -> Result<Run, Fatal> {
    parse_run(&read(path)?).map_err(|e| Fatal(format!("{}: {e}", path.display())))
}

fn print(path: &std::path::Path, format: FormatArg, out: &mut dyn Write) -> Result<i32, Fatal> {
    let run = load_run(path)?;
    let format = match format {
        FormatArg::Text => Format::Text,
        FormatArg::Json => Format::Json,
    };
    out.write_all(render(&run, format).as_bytes())?;
    Ok(0)
}

fn diff(
    old: &std::path::Path,
    new: &std::path::Path,
    only_new: bool,
    only_resolved: bool,
    out: &mut dyn Write,
) -> Result<i32, Fatal> {
    let d = diff_runs(&load_run(old)?, &load_run(new)?);
    let both = only_new == only_resolved;
    let mut nonempty = false;
    if only_new || both {
        writeln!(out, "New reports:")?;
        out.write_all(render_reports_text(&d.new).as_bytes())?;
        nonempty |= !d.new.is_empty();
    }
    if only_resolved || both {
        writeln!(out, "Resolved reports:")?;
        out.write_all(render_reports_text(&d.resolved).as_bytes())?;
        nonempty |= !d.resolved.is_empty();
    }
    Ok(nonempty as i32)
}
