//! Formula corpus shared by the integration suites.

use glw_core::formula::{parse, Formula};

/// GL theorems and non-theorems of modal depth at most 3, with the expected
/// verdict (`true` for theorems).
pub const CORPUS: &[(&str, bool)] = &[
    ("[]([]p0 -> p0) -> []p0", true),
    ("[](p0 -> p1) -> ([]p0 -> []p1)", true),
    ("[]p0 -> [][]p0", true),
    ("[](p0 -> p0)", true),
    ("[]<>T -> []#", true),
    ("<>T -> <>[]#", true),
    ("<>p0 -> <>(p0 & []~p0)", true),
    ("<><>T -> <>(<>T & [][]#)", true),
    ("[]# -> [][]#", true),
    ("[](p0 & p1) -> ([]p0 & []p1)", true),
    ("([]p0 | []p1) -> [](p0 | p1)", true),
    ("[]([]p0 -> p0) -> [][]([]p0 -> p0)", true),
    ("~[]# -> ~[]<>T", true),
    ("[]p0 -> p0", false),
    ("<>T", false),
    ("<>#", false),
    ("p0 -> []p0", false),
    ("[]p0", false),
    ("<>p0 -> []<>p0", false),
    ("[]p0 | []~p0", false),
    ("[](p0 | p1) -> ([]p0 | []p1)", false),
    ("<><>T", false),
    ("[][]# -> []#", false),
    ("[][][]#", false),
    ("[]([]p0 -> p0) -> p0", false),
    ("<>T -> <><>T", false),
    ("<>p0 & <>p1 -> <>(p0 & p1)", false),
    ("<>[]p0 -> []<>p0", false),
    ("<>(<>T & [][]#)", false),
    ("[](<>p0 -> p0) -> p0", false),
    ("<>p0 -> <>(p0 & <>p0)", false),
    ("[](p0 -> <>p1) -> ~<>p0", false),
];

pub fn corpus() -> Vec<(Formula, bool)> {
    CORPUS.iter().map(|&(s, valid)| (parse(s).expect("corpus formula parses"), valid)).collect()
}
