// The constraint domain: unions of disjoint integer intervals, and
// `assume` splitting a symbol's range on a branch.
//
//   cargo run --example range_sets

use minisa::constraints::{assume, ConstraintMap, RangeSet, Relation, SymExpr, SymbolId};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let a = RangeSet::from_ranges([(0, 10), (20, 30)]);
    let b = RangeSet::interval(5, 25);
    println!("a = {a}\nb = {b}");
    println!("a ∩ b = {}", a.intersect(&b));
    println!("a ∪ b = {}", a.union(&b));
    println!("¬a    = {}", a.complement());
    println!("a + 7 = {}", a.shift(7));
    println!("x != 0 over 64 bits: {}", RangeSet::satisfying(Relation::Ne, 0, ConstraintMap::new().universe()));

    // `if (x + 1 > 3)` with x ∈ [0, 10]
    let x = SymbolId(0);
    let mut cm = ConstraintMap::new();
    cm.set(x, RangeSet::interval(0, 10));
    let e = SymExpr::Atom(x) + 1;
    for taken in [true, false] {
        match assume(&cm, e, Relation::Gt, 3, taken) {
            Some(s) => println!("branch {taken}: x ∈ {}", s.range(x)),
            None => println!("branch {taken}: infeasible"),
        }
    }
    // Contradiction: x + 1 > 3 is impossible once x ∈ [0, 2].
    cm.set(x, RangeSet::interval(0, 2));
    println!("x ∈ [0, 2], x + 1 > 3 feasible? {}", assume(&cm, e, Relation::Gt, 3, true).is_some());

    // A 5-bit universe wraps around.
    let small = ConstraintMap::in_universe(5).universe();
    println!("in 5 bits: [14, 15] + 2 = {}", RangeSet::interval(14, 15).shift_in(2, small));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
