//! Printing and re-parsing is a fixpoint, on the corpus and on random
//! expressions.

mod support;

use proptest::prelude::*;
use support::{exprgen, props};
use vok_core::parser::parse_expr;
use vok_core::printer::{print_expr, Notation};

#[test]
fn corpus_files_are_print_parse_fixpoints() {
    let checked = props::parser_fixpoint().unwrap();
    // 4 machines, 3 contexts, 1 VO file, 1 glue expression
    assert_eq!(checked, 9);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 300, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn random_expressions_reprint_stably(c in props::case()) {
        let text = match &c {
            props::Case::Pred(p) => exprgen::show_p(p),
            props::Case::Set(s) => exprgen::show_s(s),
            props::Case::Rel(r) => exprgen::show_r(r),
        };
        let e = parse_expr(&text).unwrap();
        let printed = print_expr(&e, Notation::Ascii);
        let again = parse_expr(&printed).map_err(|d| TestCaseError::fail(format!("{printed}: {d}")))?;
        prop_assert_eq!(&again, &e, "{}", printed);
        prop_assert_eq!(print_expr(&again, Notation::Ascii), printed);
    }
}
