use super::*;
use crate::symexec::explore_function;

fn unit(src: &str) -> TranslationUnit {
    TranslationUnit::from_source("t.mc", src).unwrap()
}

fn only(id: &str) -> AnalysisConfig {
    AnalysisConfig {
        enabled: [id.to_string()].into(),
        ..Default::default()
    }
}

fn run(id: &str, src: &str) -> Vec<Report> {
    analyze_unit(&unit(src), &only(id)).reports
}

const DIV_ZERO_SRC: &str = "void f(int a) {
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

#[test]
fn div_zero_single_path_report() {
    let r = run(DIV_ZERO, DIV_ZERO_SRC);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].loc.line, 12);
    assert_eq!(r[0].message, "Division by zero");
    let notes: Vec<(u32, &str)> = r[0].path.iter().map(|e| (e.loc.line, e.note.as_str())).collect();
    assert_eq!(
        notes,
        vec![
            (4, "Taking true branch"),
            (5, "'i' is assigned 0"),
            (9, "Taking false branch"),
            (12, "Division by zero"),
        ]
    );
}

#[test]
fn div_zero_examples() {
    let r = run(DIV_ZERO, "int f() { int i=0; return 1/i; }");
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].path.len(), 2);
    assert_eq!(r[0].path[0].note, "'i' initialized to 0");
    assert!(run(DIV_ZERO, "int f(int b) { if (b!=0) return 1/b; return 0; }").is_empty());
    assert_eq!(run(DIV_ZERO, "int f(int b) { return b % 0; }")[0].message, "Modulo by zero");
}

#[test]
fn maybe_zero_divisor_is_assumed_nonzero() {
    let u = unit("int f(int b) { int q; q = 10 / b; sa_dump(b); return q; }");
    let pa = analyze_program(&u, &default_checkers(), &AnalysisOptions::default());
    assert!(pa.reports.is_empty());
    assert_eq!(pa.dumps(), vec!["sa_dump @t.mc:1: $b ; constraints: [IMIN, -1] ∪ [1, IMAX]".to_string()]);
}

#[test]
fn division_report_sinks_the_path() {
    let u = unit("int f() { int i; int k; i = 0; k = 1 / i; k = 2 / i; return k; }");
    let opts = AnalysisOptions {
        keep_graphs: true,
        ..Default::default()
    };
    let fa = explore_function(&u, u.function("f").unwrap(), &default_checkers(), &opts);
    assert_eq!(fa.reports.len(), 1);
    let g = fa.graph.unwrap();
    let sinks: Vec<_> = g.nodes.iter().filter(|n| n.sink).collect();
    assert_eq!(sinks.len(), 1);
    assert!(sinks[0].succs.is_empty());
    assert_eq!(g.leaves().count(), 0);
}

#[test]
fn uninit_read_examples() {
    assert_eq!(run(UNINIT_READ, "void f() { int x; int y = x; }").len(), 1);
    let r = run(UNINIT_READ, "int f() { int x; if (input()) x=1; return x; }");
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].message, "Variable 'x' is uninitialized when used");
    assert!(r[0].path.iter().any(|e| e.note == "Taking false branch"));
    assert!(run(UNINIT_READ, "int f(int a) { int x = a; int b[2]; b[0] = x; b[1] = 1; return b[0] + b[1]; }").is_empty());
    assert_eq!(run(UNINIT_READ, "int f() { int b[2]; b[0] = 1; return b[1]; }").len(), 1);
}

#[test]
fn array_bounds_examples() {
    assert_eq!(run(ARRAY_BOUNDS, "void f() { int a[3]; a[3]=1; }").len(), 1);
    let r = run(ARRAY_BOUNDS, "void f() { int a[3]; int i=input(); if (i>=3) a[i]=1; }");
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].message, "Array index out of bounds for 'a' of size 3");
    assert!(run(ARRAY_BOUNDS, "void f() { int a[3]; int i=input(); a[i]=1; }").is_empty());

    let u = unit("void f() { int a[3]; int i=input(); a[i]=1; sa_dump(i); }");
    let pa = analyze_program(&u, &default_checkers(), &AnalysisOptions::default());
    assert_eq!(pa.dumps(), vec!["sa_dump @t.mc:1: $input#1 ; constraints: [0, 2]".to_string()]);

    assert_eq!(run(ARRAY_BOUNDS, "void g(int &p) { p = 1; } void f() { int a[2]; g(a[2]); }").len(), 1);
    assert_eq!(run(ARRAY_BOUNDS, "int f() { int a[2]; a[0] = 1; return a[-1]; }").len(), 1);
}

#[test]
fn stream_examples() {
    let r = run(STREAM, "void f() { int h=open(); close(h); close(h); }");
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].message, "Stream closed twice");
    let r = run(STREAM, "void f() { int h=open(); if (input()) close(h); return; }");
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].message, "Opened stream is never closed; potential resource leak");
    assert_eq!(r[0].loc.column, 18);
    assert!(run(STREAM, "void f() { int h=open(); close(h); }").is_empty());
    assert!(run(STREAM, "void f() { close(3); close(input()); }").is_empty());
    // Handles flow through inlined calls.
    assert!(run(STREAM, "void c(int h) { close(h); } void f() { int h = open(); c(h); }").is_empty());
}

#[test]
fn no_checkers_leaves_engine_unchanged() {
    let u = unit(DIV_ZERO_SRC);
    let f = u.function("f").unwrap();
    let opts = AnalysisOptions {
        keep_graphs: true,
        ..Default::default()
    };
    let bare = explore_function(&u, f, &[], &opts);
    let silent = explore_function(&u, f, &path_checkers(&[STREAM.to_string()].into()), &opts);
    assert_eq!(bare.graph.unwrap().len(), silent.graph.unwrap().len());
}

#[test]
fn methods_ladder_on_one_input() {
    let u = unit("void f() { int y; y = 1/0; }");
    let r = analyze_unit(&u, &AnalysisConfig::default()).reports;
    let ids: BTreeSet<&str> = r.iter().map(|r| r.checker.as_str()).collect();
    assert!(ids.contains(TOKEN_DIV_LITERAL_ZERO));
    assert!(ids.contains(DIV_ZERO));
}

#[test]
fn registry_ids() {
    assert_eq!(all_ids().len(), 9);
    assert_eq!(parse_ids("core.DivideByZero, style.SelfAssign").unwrap().len(), 2);
    assert_eq!(parse_ids("core.Nope"), Err(UnknownChecker("core.Nope".into())));
    assert_eq!(list_checkers().lines().count(), 9);
    assert_eq!(default_checkers().len(), 4);
}
