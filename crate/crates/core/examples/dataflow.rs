// Worklist dataflow over the CFG: which variables may or must hold zero,
// and which are live, at every block entry.
//
//   cargo run --example dataflow

use std::error::Error;

use minisa::dataflow::{zero_analysis, FlowFact, Liveness, MergeMode};
use minisa::unit::TranslationUnit;

const SOURCE: &str = "\
int f(int a) {
  int i = 0;
  int j = 1;
  if (a)
    i = 2;
  else
    j = 0;
  return i + j;
}
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let unit = TranslationUnit::from_source("df.mc", SOURCE)?;
    let f = unit.function("f").ok_or("no f")?;
    let cfg = unit.cfg(f).ok_or("no cfg")?;
    let names = |s: &FlowFact| s.iter().map(|&d| unit.ast.decl_name(d).to_string()).collect::<Vec<_>>().join(",");

    let may = zero_analysis(&unit.ast, &unit.sema, cfg, MergeMode::May);
    let must = zero_analysis(&unit.ast, &unit.sema, cfg, MergeMode::Must);
    let live = Liveness::compute(&unit.ast, &unit.sema, cfg);
    println!("block  may-zero  must-zero  live-in");
    for &b in cfg.reverse_post_order() {
        let i = b.0 as usize;
        println!("{:>5}  {:<8}  {:<9}  {}", b.0, names(&may[i][0]), names(&must[i][0]), names(live.live_in(b)));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
