mod common;

use common::{corpus, Interp, Stop};
use minisa::checkers::default_checkers;
use minisa::symexec::{explore_function, AnalysisOptions, SVal};
use minisa::unit::TranslationUnit;
use proptest::prelude::*;

fn keep() -> AnalysisOptions {
    AnalysisOptions {
        keep_graphs: true,
        ..Default::default()
    }
}

fn symbolic_returns(unit: &TranslationUnit, name: &str) -> Vec<SVal> {
    let f = unit.function(name).unwrap();
    explore_function(unit, f, &[], &keep()).return_values()
}

#[test]
fn corpus_functions_agree() {
    let unit = corpus("equiv.mc");
    let names: Vec<String> = unit
        .ast
        .functions()
        .map(|f| unit.ast.function_name(f).to_string())
        .filter(|n| n.starts_with('e'))
        .collect();
    assert!(names.len() >= 25, "only {} functions", names.len());
    for name in names {
        let expected = Interp::new(&unit).call_named(&name).unwrap().unwrap();
        assert_eq!(symbolic_returns(&unit, &name), vec![SVal::Int(expected)], "{name}");
    }
}

// Random loop-free programs over three locals.

#[derive(Debug, Clone)]
enum E {
    Lit(i64),
    Var(usize),
    Un(&'static str, Box<E>),
    Bin(&'static str, Box<E>, Box<E>),
}

#[derive(Debug, Clone)]
enum S {
    Assign(usize, &'static str, E),
    If(E, Vec<S>, Vec<S>),
}

const VARS: [&str; 3] = ["a", "b", "c"];

fn render_e(e: &E) -> String {
    match e {
        E::Lit(v) if *v < 0 => format!("({v})"),
        E::Lit(v) => v.to_string(),
        E::Var(i) => VARS[*i].into(),
        E::Un(op, x) => format!("{op}({})", render_e(x)),
        E::Bin(op, l, r) => format!("({} {op} {})", render_e(l), render_e(r)),
    }
}

fn render_s(s: &S, out: &mut String) {
    match s {
        S::Assign(v, op, e) => out.push_str(&format!("{} {op} {};\n", VARS[*v], render_e(e))),
        S::If(c, t, f) => {
            out.push_str(&format!("if ({}) {{\n", render_e(c)));
            t.iter().for_each(|s| render_s(s, out));
            out.push_str("} else {\n");
            f.iter().for_each(|s| render_s(s, out));
            out.push_str("}\n");
        }
    }
}

fn expr() -> impl Strategy<Value = E> {
    let leaf = prop_oneof![(-20i64..20).prop_map(E::Lit), (0usize..3).prop_map(E::Var)];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just("-"), Just("!")], inner.clone()).prop_map(|(o, x)| E::Un(o, Box::new(x))),
            (
                prop_oneof![
                    Just("+"),
                    Just("-"),
                    Just("*"),
                    Just("/"),
                    Just("%"),
                    Just("<"),
                    Just("<="),
                    Just("=="),
                    Just("!="),
                    Just("&&"),
                    Just("||")
                ],
                inner.clone(),
                inner
            )
                .prop_map(|(o, l, r)| E::Bin(o, Box::new(l), Box::new(r))),
        ]
    })
}

fn stmt() -> impl Strategy<Value = S> {
    let assign = (0usize..3, prop_oneof![Just("="), Just("+="), Just("*=")], expr())
        .prop_map(|(v, o, e)| S::Assign(v, o, e));
    assign.prop_recursive(2, 12, 3, |inner| {
        (
            expr(),
            prop::collection::vec(inner.clone(), 0..3),
            prop::collection::vec(inner, 0..3),
        )
            .prop_map(|(c, t, f)| S::If(c, t, f))
    })
}

fn program() -> impl Strategy<Value = String> {
    (prop::collection::vec(stmt(), 1..5), expr()).prop_map(|(body, ret)| {
        let mut s = String::from("int t() {\nint a = 3;\nint b = -2;\nint c = 7;\n");
        body.iter().for_each(|st| render_s(st, &mut s));
        s.push_str(&format!("return {};\n}}\n", render_e(&ret)));
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_programs_agree(src in program()) {
        let unit = TranslationUnit::from_source("gen.mc", &src).unwrap();
        match Interp::new(&unit).call_named("t") {
            Ok(v) => prop_assert_eq!(symbolic_returns(&unit, "t"), vec![SVal::Int(v.unwrap())], "{}", src),
            Err(Stop::DivZero) => {
                let f = unit.function("t").unwrap();
                let fa = explore_function(&unit, f, &default_checkers(), &AnalysisOptions::default());
                prop_assert!(fa.reports.iter().any(|r| r.checker == "core.DivideByZero"), "{}", src);
            }
            Err(other) => prop_assert!(false, "interpreter stopped: {:?}\n{}", other, src),
        }
    }
}
