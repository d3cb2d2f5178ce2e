// What `sa_dump` shows before and after a call the analyzer cannot see
// into: the range learned from the branch is gone after `f(x)`.
//
//   cargo run --example loss_of_precision

use std::error::Error;

use minisa::symexec::{analyze_program, AnalysisOptions};
use minisa::unit::TranslationUnit;

const SOURCE: &str = "\
void h(int x) { }
void f(int &x);

void g(int x) {
  if (x > 0) {
    sa_dump(x);
    h(x);
    f(x);
    sa_dump(x);
    h(x);
  }
}
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let unit = TranslationUnit::from_source("lop.mc", SOURCE)?;
    let result = analyze_program(&unit, &[], &AnalysisOptions::default());
    for line in result.dumps() {
        println!("{line}");
    }
    let s = result.stats;
    println!("inlined {} call(s), {} conservative", s.inlined_calls, s.conservative_calls);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
