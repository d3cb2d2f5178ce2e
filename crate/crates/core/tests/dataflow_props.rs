mod common;

use common::{brute_live, corpus_files, is_acyclic};
use minisa::dataflow::{
    is_fixpoint, solve_backward, solve_forward, zero_analysis, AssignedTransfer, FlowFact, Liveness,
    LivenessTransfer, MergeMode, ZeroTransfer,
};
use minisa::unit::TranslationUnit;

fn units() -> Vec<TranslationUnit> {
    corpus_files()
        .into_iter()
        .map(|p| TranslationUnit::from_source(p.to_str().unwrap(), &std::fs::read_to_string(&p).unwrap()).unwrap())
        .collect()
}

#[test]
fn solutions_are_fixpoints() {
    let init = FlowFact::new();
    for u in units() {
        for cfg in u.cfgs() {
            let zero = ZeroTransfer { ast: &u.ast, sema: &u.sema };
            let assigned = AssignedTransfer { ast: &u.ast, sema: &u.sema };
            let live = LivenessTransfer { ast: &u.ast, sema: &u.sema };
            for mode in [MergeMode::May, MergeMode::Must] {
                let s = solve_forward(cfg, &zero, mode, &init);
                assert!(is_fixpoint(cfg, &s, &zero, mode, &init), "{}", u.file);
                let s = solve_forward(cfg, &assigned, mode, &init);
                assert!(is_fixpoint(cfg, &s, &assigned, mode, &init), "{}", u.file);
            }
            let s = solve_backward(cfg, &live, MergeMode::May, &init);
            assert!(is_fixpoint(cfg, &s, &live, MergeMode::May, &init), "{}", u.file);
        }
    }
}

#[test]
fn must_is_contained_in_may() {
    let mut points = 0;
    for u in units() {
        for cfg in u.cfgs() {
            let may = zero_analysis(&u.ast, &u.sema, cfg, MergeMode::May);
            let must = zero_analysis(&u.ast, &u.sema, cfg, MergeMode::Must);
            for (b, block) in cfg.blocks.iter().enumerate() {
                if !cfg.is_reachable(block.id) {
                    continue;
                }
                for (m, y) in must[b].iter().zip(&may[b]) {
                    assert!(m.is_subset(y), "{}: block {b}", u.file);
                    points += 1;
                }
            }
        }
    }
    assert!(points > 100);
}

#[test]
fn liveness_matches_path_enumeration() {
    let mut checked = 0;
    for u in units() {
        for cfg in u.cfgs().filter(|c| is_acyclic(c)) {
            let l = Liveness::compute(&u.ast, &u.sema, cfg);
            for block in &cfg.blocks {
                if !cfg.is_reachable(block.id) {
                    continue;
                }
                for i in 0..=block.elements.len() {
                    let expected = brute_live(&u.ast, &u.sema, cfg, block.id, i);
                    assert_eq!(*l.live_at(block.id, i), expected, "{} {} at {i}", u.file, block.id);
                    checked += 1;
                }
            }
            assert_eq!(*l.live_in(cfg.entry), brute_live(&u.ast, &u.sema, cfg, cfg.entry, 0));
        }
    }
    assert!(checked > 200, "{checked}");
}
