// Token patterns and AST matcher combinators, plus the built-in style
// checks that use them.
//
//   cargo run --example ast_matching

use std::error::Error;

use minisa::frontend::{print_expr, BinOp, NodeTag};
use minisa::matcher::{
    all_of, any_descendant, binary_op, bind, constant_condition, has_child, int_lit, match_ast, match_tokens,
    self_assign, token_div_literal_zero, var_ref_named, TokenPattern,
};
use minisa::unit::TranslationUnit;

const SOURCE: &str = "\
int f(int x) {
  int y = 42;
  x = x;
  if (1)
    y = x / 0;
  return y + 42 * (x - 42);
}
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let unit = TranslationUnit::from_source("m.mc", SOURCE)?;

    let pat = TokenPattern::exact(&["/", "0"])?;
    for span in match_tokens(&pat, &unit.tokens) {
        println!("tokens `/ 0` at {}", unit.tokens[span.start].loc);
    }

    let ast = &unit.original;
    // Any `e - 42` where the left side is a variable, binding both parts.
    let m = all_of(vec![
        binary_op(BinOp::Sub),
        has_child(0, bind("lhs", var_ref_named(None))),
        has_child(1, bind("rhs", int_lit(Some(42)))),
    ]);
    for hit in match_ast(&m, ast, ast.root()) {
        println!(
            "match `{}` with lhs={} rhs={}",
            print_expr(ast, hit.node),
            print_expr(ast, hit.bindings["lhs"]),
            print_expr(ast, hit.bindings["rhs"])
        );
    }
    let returns = minisa::matcher::kind_is(NodeTag::ReturnStmt);
    let with_42 = all_of(vec![returns, any_descendant(int_lit(Some(42)))]);
    println!("returns mentioning 42: {}", match_ast(&with_42, ast, ast.root()).len());

    for r in [token_div_literal_zero(&unit), self_assign(&unit), constant_condition(&unit)].concat() {
        println!("{}: {} [{}]", r.loc, r.message, r.checker);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
