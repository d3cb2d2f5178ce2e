// One defect, four detection methods: token patterns, AST matching,
// dataflow (may and must), and path-sensitive symbolic execution.
//
//   cargo run --example methods_ladder

use std::error::Error;

use minisa::checkers::{analyze_unit, default_ids, ids_of, AnalysisConfig, Method};
use minisa::dataflow::MergeMode;
use minisa::report::render_reports_text;
use minisa::unit::TranslationUnit;

const SOURCE: &str = "\
void f(int a) {
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
  j = j / 0;
}
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let unit = TranslationUnit::from_source("ladder.mc", SOURCE)?;
    let rungs = [
        ("tokens", ids_of(Method::Token), MergeMode::May),
        ("ast", ids_of(Method::Ast), MergeMode::May),
        ("dataflow, may", ids_of(Method::Dataflow), MergeMode::May),
        ("dataflow, must", ids_of(Method::Dataflow), MergeMode::Must),
        ("symbolic execution", ids_of(Method::PathSensitive), MergeMode::May),
    ];
    for (name, enabled, flow_mode) in rungs {
        let config = AnalysisConfig {
            enabled,
            flow_mode,
            ..Default::default()
        };
        let result = analyze_unit(&unit, &config);
        println!("== {name}");
        print!("{}", render_reports_text(&result.reports));
    }

    // The default set: everything except the flow checks.
    let all = analyze_unit(&unit, &AnalysisConfig { enabled: default_ids(), ..Default::default() });
    println!("== default checkers: {} reports", all.reports.len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
