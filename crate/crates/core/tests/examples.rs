//! Every example under examples/ must keep running.

mod methods_ladder {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/methods_ladder.rs"));
}

#[test]
fn methods_ladder_runs() {
    methods_ladder::run_example().expect("methods_ladder example should run");
}

mod exploded_graph {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/exploded_graph.rs"));
}

#[test]
fn exploded_graph_runs() {
    exploded_graph::run_example().expect("exploded_graph example should run");
}

mod loss_of_precision {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/loss_of_precision.rs"));
}

#[test]
fn loss_of_precision_runs() {
    loss_of_precision::run_example().expect("loss_of_precision example should run");
}

mod analysis_budget {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/analysis_budget.rs"));
}

#[test]
fn analysis_budget_runs() {
    analysis_budget::run_example().expect("analysis_budget example should run");
}

mod report_workflow {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/report_workflow.rs"));
}

#[test]
fn report_workflow_runs() {
    report_workflow::run_example().expect("report_workflow example should run");
}

mod range_sets {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/range_sets.rs"));
}

#[test]
fn range_sets_runs() {
    range_sets::run_example().expect("range_sets example should run");
}

mod ast_matching {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/ast_matching.rs"));
}

#[test]
fn ast_matching_runs() {
    ast_matching::run_example().expect("ast_matching example should run");
}

mod dataflow {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/dataflow.rs"));
}

#[test]
fn dataflow_runs() {
    dataflow::run_example().expect("dataflow example should run");
}

mod frontend_and_cfg {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/frontend_and_cfg.rs"));
}

#[test]
fn frontend_and_cfg_runs() {
    frontend_and_cfg::run_example().expect("frontend_and_cfg example should run");
}
