// Source to tokens to AST to CFG, showing what desugaring does to a `for`
// loop and a short-circuit condition.
//
//   cargo run --example frontend_and_cfg

use std::error::Error;

use minisa::frontend::print_ast;
use minisa::unit::TranslationUnit;

const SOURCE: &str = "\
int sum(int n) {
  int s = 0;
  int k;
  for (k = 0; k < n && s < 100; k += 1)
    s += k;
  return s;
}
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let unit = TranslationUnit::from_source("sum.mc", SOURCE)?;
    println!("{} tokens; first line: {}", unit.tokens.len(),
        unit.tokens.iter().take_while(|t| t.loc.line == 1).map(|t| t.text.as_str()).collect::<Vec<_>>().join(" "));
    println!("\n-- as written\n{}", print_ast(&unit.original));
    println!("-- desugared\n{}", print_ast(&unit.ast));

    let f = unit.function("sum").ok_or("no sum")?;
    let cfg = unit.cfg(f).ok_or("no cfg")?;
    println!("-- cfg: {} blocks, entry B{}", cfg.len(), cfg.entry.0);
    for &b in cfg.reverse_post_order() {
        let succ: Vec<String> = cfg.successors(b).iter().map(|s| format!("B{}", s.0)).collect();
        println!("B{}: {} elements -> {}", b.0, cfg.block(b).elements.len(), succ.join(", "));
    }
    // `cfg.to_json(&unit.ast)` gives the full structure, as --dump-cfg prints it.

    // Errors carry a location.
    match TranslationUnit::from_source("bad.mc", "int f() { return y; }") {
        Err(e) => println!("\n{e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
