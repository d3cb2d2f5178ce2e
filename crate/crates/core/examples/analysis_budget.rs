// How the exploration budget bounds loops and recursion, and what the
// stats counters report when a limit is hit.
//
//   cargo run --example analysis_budget

use std::error::Error;

use minisa::symexec::{analyze_program, AnalysisOptions};
use minisa::unit::TranslationUnit;

const SOURCE: &str = "\
int r(int n) {
  if (n == 0)
    return 0;
  return r(n - 1) + 1;
}

int main() {
  return r(10);
}

void spin(int n) {
  int i = 0;
  while (i < n)
    i += 1;
}
";

fn show(label: &str, unit: &TranslationUnit, opts: &AnalysisOptions) {
    let s = analyze_program(unit, &[], opts).stats;
    println!(
        "{label:<22} nodes {:>5}  inlined {}  conservative {}  depth {}  cut paths {}  node limit {}",
        s.nodes_created, s.inlined_calls, s.conservative_calls, s.max_frame_depth, s.block_visit_exhausted, s.node_budget_exhausted
    );
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let unit = TranslationUnit::from_source("budget.mc", SOURCE)?;
    show("defaults", &unit, &AnalysisOptions::default());

    let mut deeper = AnalysisOptions::default();
    deeper.budget.set("max_call_depth", 12)?;
    show("max_call_depth=12", &unit, &deeper);

    let mut visits = AnalysisOptions::default();
    visits.budget.set("max_block_visits", 8)?;
    show("max_block_visits=8", &unit, &visits);

    let mut tiny = AnalysisOptions::default();
    tiny.budget.set("max_nodes", 40)?;
    show("max_nodes=40", &unit, &tiny);

    // Zero is never a valid limit.
    if let Err(e) = tiny.budget.set("max_nodes", 0) {
        println!("rejected: {e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
