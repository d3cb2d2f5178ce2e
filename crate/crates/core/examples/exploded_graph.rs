// Builds the exploded graph of a small function and prints the state at
// each end of path, plus the path that leads there.
//
//   cargo run --example exploded_graph

use std::error::Error;

use minisa::symexec::{explore_function, state_json, AnalysisOptions, PointKind};
use minisa::unit::TranslationUnit;

const SOURCE: &str = "\
void g(int b, int &x) {
  if (b)
    x = b+1;
  else
    x = 42;
}
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let unit = TranslationUnit::from_source("g.mc", SOURCE)?;
    let g = unit.function("g").ok_or("no g")?;
    let opts = AnalysisOptions {
        keep_graphs: true,
        ..Default::default()
    };
    let fa = explore_function(&unit, g, &[], &opts);
    let graph = fa.graph.as_ref().ok_or("graph not kept")?;
    println!("{} nodes, {} edges", graph.len(), graph.edges().len());

    for leaf in graph.leaves() {
        let state = state_json(&unit.ast, &fa.symbols, &leaf.state);
        println!("\nleaf {}: store {} constraints {}", leaf.id, state["store"], state["constraints"]);
        let kinds: Vec<String> = graph
            .path_to(leaf.id)
            .into_iter()
            .map(|id| match graph.node(id).point.kind {
                PointKind::BlockEntrance(b) => format!("B{}", b.0),
                PointKind::BranchTaken { which, .. } => format!("{which}"),
                PointKind::EndOfFunction => "end".into(),
                _ => ".".into(),
            })
            .collect();
        println!("  path: {}", kinds.join(" "));
    }

    // Without dead-symbol collection the unused `$x` stays around.
    let raw = explore_function(&unit, g, &[], &AnalysisOptions { collect_garbage: false, ..opts });
    let leaf = raw.graph.as_ref().unwrap().leaves().next().unwrap();
    println!("\nno collection: {}", state_json(&unit.ast, &raw.symbols, &leaf.state)["constraints"]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
