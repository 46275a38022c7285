mod common;

use glw_core::decide::{brute_force_decide, decide, BruteOutcome, Verdict};
use glw_core::formula::parse;
use glw_core::kripke::model_check;
use glw_core::ordinals::{interval_countermodel_for, interval_model_check, Ordinal};

#[test]
fn corpus_verdicts_match_expectations() {
    for (f, valid) in common::corpus() {
        let verdict = decide(&f).unwrap();
        assert_eq!(verdict.is_valid(), valid, "{}", f.print());
        if let Verdict::Countermodel { model, world } = verdict {
            assert!(!model_check(&model, &f).contains(&world), "{}", f.print());
            let height = model.frame.height().unwrap();
            assert!(height <= f.modal_depth(), "{}: height {height}", f.print());
            assert!(brute_force_decide(&f, 5).unwrap().is_refuted(), "{}", f.print());
        } else {
            assert!(!brute_force_decide(&f, 5).unwrap().is_refuted(), "{}", f.print());
        }
    }
}

#[test]
fn countermodel_height_can_exceed_modal_depth() {
    let f = parse("~(<>p0 & [](p0 -> <>p1) & [](p1 -> <>p2))").unwrap();
    assert_eq!(f.modal_depth(), 2);
    let cm = interval_countermodel_for(&f, 2).unwrap().unwrap();
    assert_eq!(cm.height, 3);
    assert_eq!(cm.space_top, Ordinal::omega_pow(3));
    let holds = interval_model_check(&cm.space_top, &cm.valuation, &f).unwrap();
    assert!(!holds.contains(&cm.refuting_point));
    assert!(matches!(brute_force_decide(&f, 3).unwrap(), BruteOutcome::NoCountermodel { .. }));
}
