// Baseline, fix, diff, suppress: the life of a report across two runs.
//
//   cargo run --example report_workflow

use std::collections::HashMap;
use std::error::Error;

use minisa::checkers::{analyze_unit, AnalysisConfig};
use minisa::report::{apply_suppressions, diff_runs, parse_run, parse_suppression_file, render, Format, Run};
use minisa::unit::TranslationUnit;

const BEFORE: &str = "\
int avg(int total, int n) {
  int d = 0;
  if (n > 0)
    d = n;
  return total / d;
}
int ratio(int a) {
  int z = 0;
  return a % z; // sa-suppress(core.DivideByZero)
}
";

const AFTER: &str = "\
int avg(int total, int n) {
  int d = 1;
  if (n > 0)
    d = n;
  return total / d;
}
int ratio(int a) {
  int z = 0;
  return a % z; // sa-suppress(core.DivideByZero)
}
";

fn run(source: &str) -> Result<Run, Box<dyn Error>> {
    let unit = TranslationUnit::from_source("stats.mc", source)?;
    let result = analyze_unit(&unit, &AnalysisConfig::default());
    let mut run = Run::new("example", "2024-01-01T00:00:00Z");
    run.reports = result.reports;
    run.stats = result.stats;
    let sources = HashMap::from([("stats.mc".to_string(), source.to_string())]);
    Ok(apply_suppressions(&run, &[], &sources).0)
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let before = run(BEFORE)?;
    print!("before:\n{}", render(&before, Format::Text));

    let after = run(AFTER)?;
    let d = diff_runs(&before, &after);
    println!("diff: {} resolved, {} new, {} unchanged", d.resolved.len(), d.new.len(), d.common.len());

    // A file-wide rule for the checker.
    let rules = parse_suppression_file("# legacy code\ncore.DivideByZero:stats.mc:*\n")?;
    let (quiet, removed) = apply_suppressions(&before, &rules, &HashMap::new());
    println!("file rule removed {removed}; {} left", quiet.reports.len());

    // Runs are stored as JSON; reading one back and writing it again gives
    // the same bytes.
    let json = render(&before, Format::Json);
    assert_eq!(render(&parse_run(&json)?, Format::Json), json);
    println!("stored run: {} bytes", json.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
