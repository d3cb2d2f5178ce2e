mod common;

use std::path::Path;

use common::corpus_path;
use minisa::report::{diff_runs, parse_run, render, Format};

const STAMP: &str = "2024-01-01T00:00:00Z";

fn minisa(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("minisa").chain(args.iter().copied());
    let code = minisa::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn analyze_to(src: &str, out: &Path, extra: &[&str]) -> String {
    let src = corpus_path(src);
    let mut args = vec!["analyze", src.to_str().unwrap(), "--timestamp", STAMP, "-o", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, stdout, stderr) = minisa(&args);
    // 0 = clean, 1 = reports
    let reported = !stdout.ends_with("\n0 reports.\n") && stdout != "0 reports.\n";
    assert_eq!(code, reported as i32, "{stderr}");
    stdout
}

fn load(p: &Path) -> minisa::report::Run {
    parse_run(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn fixing_the_bug_resolves_one_report() {
    let dir = tempfile::tempdir().unwrap();
    let (old, new) = (dir.path().join("old.json"), dir.path().join("new.json"));
    analyze_to("div_zero.mc", &old, &[]);
    analyze_to("div_zero_fixed.mc", &new, &[]);

    let d = diff_runs(&load(&old), &load(&new));
    assert_eq!((d.resolved.len(), d.new.len()), (1, 0));
    assert_eq!(d.resolved[0].checker, "core.DivideByZero");
    assert_eq!(d.resolved[0].loc.line, 12);

    let (code, out, _) = minisa(&["diff", old.to_str().unwrap(), new.to_str().unwrap(), "--new"]);
    assert_eq!((code, out.as_str()), (0, "New reports:\n0 reports.\n"));
    let (code, out, _) = minisa(&["diff", old.to_str().unwrap(), new.to_str().unwrap(), "--resolved"]);
    assert_eq!(code, 1);
    assert!(out.starts_with("Resolved reports:\nHIGH: "), "{out}");
    assert!(out.ends_with("1 report.\n"));
}

#[test]
fn flow_mode_alone_keeps_the_diff_exact() {
    // Must-mode flow checks are silent on both files, so only the
    // path-sensitive report moves.
    let dir = tempfile::tempdir().unwrap();
    let (old, new) = (dir.path().join("old.json"), dir.path().join("new.json"));
    analyze_to("div_zero.mc", &old, &["--flow-mode", "must"]);
    analyze_to("div_zero_fixed.mc", &new, &["--flow-mode", "must"]);
    let d = diff_runs(&load(&old), &load(&new));
    assert_eq!((d.resolved.len(), d.new.len()), (1, 0));
}

#[test]
fn annotation_suppresses_only_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.json");
    analyze_to("suppressed.mc", &run, &[]);
    let r = load(&run);
    let lines: Vec<u32> = r.reports.iter().map(|r| r.loc.line).collect();
    assert_eq!(lines, [8]);
    assert_eq!(r.stats["suppressed"], 1);
}

#[test]
fn suppression_file_removes_the_named_report() {
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.txt");
    std::fs::write(&rules, "# known\ncore.DivideByZero:suppressed.mc:8\n").unwrap();
    let run = dir.path().join("run.json");
    analyze_to("suppressed.mc", &run, &["--suppress", rules.to_str().unwrap()]);
    let r = load(&run);
    assert!(r.reports.is_empty());
    assert_eq!(r.stats["suppressed"], 2);

    // A rule for another line or checker leaves the report alone.
    std::fs::write(&rules, "core.DivideByZero:suppressed.mc:7\ncore.UninitRead:suppressed.mc:*\n").unwrap();
    analyze_to("suppressed.mc", &run, &["--suppress", rules.to_str().unwrap()]);
    assert_eq!(load(&run).reports.len(), 1);
}

#[test]
fn run_json_round_trips_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["div_zero.mc", "streams.mc", "ladder.mc", "loss_of_precision.mc"] {
        let run = dir.path().join("run.json");
        analyze_to(f, &run, &[]);
        let text = std::fs::read_to_string(&run).unwrap();
        assert_eq!(render(&parse_run(&text).unwrap(), Format::Json), text, "{f}");
        let (code, printed, _) = minisa(&["print", run.to_str().unwrap(), "--format", "json"]);
        assert_eq!(code, 0);
        assert_eq!(printed, text, "{f}");
        assert!(text.contains(STAMP));
    }
}

#[test]
fn print_repeats_the_analysis_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run.json");
    let shown = analyze_to("streams.mc", &run, &[]);
    let (code, printed, _) = minisa(&["print", run.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(printed.ends_with("2 reports.\n"), "{printed}");
    assert!(shown.ends_with(&printed), "{shown}\n---\n{printed}");
}

#[test]
fn analysis_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let files: Vec<String> = common::corpus_files().iter().map(|p| p.to_str().unwrap().to_string()).collect();
    for out in [&a, &b] {
        let mut args = vec!["analyze"];
        args.extend(files.iter().map(String::as_str));
        args.extend(["--timestamp", STAMP, "-o", out.to_str().unwrap()]);
        let (code, _, err) = minisa(&args);
        assert_eq!(code, 1, "{err}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mc");
    std::fs::write(&bad, "int f( {").unwrap();
    let (code, out, err) = minisa(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("bad.mc:1:"), "{err}");

    let (code, _, err) = minisa(&["analyze", bad.to_str().unwrap(), "--checkers", "core.Nope"]);
    assert_eq!(code, 2);
    assert!(err.contains("core.Nope"), "{err}");
}

#[test]
fn checker_list_names_every_checker() {
    let (code, out, _) = minisa(&["--list-checkers"]);
    assert_eq!(code, 0);
    for id in minisa::checkers::all_ids() {
        assert!(out.lines().any(|l| l.starts_with(id.as_str())), "{id}");
    }
}
