//! Modal semantics on ordinal spaces: the interval topology, where `◇` is
//! the derivative, and end-segment filters, where `◇` also looks at the
//! predecessor of a successor.

use std::collections::BTreeMap;

use crate::formula::Formula;
use crate::ordinals::ordinal::Ordinal;
use crate::ordinals::symbolic::{SetError, SymbolicSet};

pub type OrdinalValuation = BTreeMap<u32, SymbolicSet>;

fn eval(
    top: &Ordinal,
    v: &OrdinalValuation,
    f: &Formula,
    dia: &dyn Fn(&SymbolicSet) -> SymbolicSet,
) -> Result<SymbolicSet, SetError> {
    let rec = |g: &Formula| eval(top, v, g, dia);
    Ok(match f {
        Formula::Var(i) => match v.get(i) {
            Some(s) if s.top() != top => return Err(SetError::SpaceMismatch(top.clone(), s.top().clone())),
            Some(s) => s.clone(),
            None => SymbolicSet::empty(top),
        },
        Formula::Bot => SymbolicSet::empty(top),
        Formula::Top => SymbolicSet::full(top),
        Formula::Neg(a) => rec(a)?.complement(),
        Formula::And(a, b) => rec(a)?.intersection(&rec(b)?)?,
        Formula::Or(a, b) => rec(a)?.union(&rec(b)?)?,
        Formula::Imp(a, b) => rec(a)?.complement().union(&rec(b)?)?,
        Formula::Dia(a) => dia(&rec(a)?),
        Formula::Box(a) => dia(&rec(a)?.complement()).complement(),
    })
}

/// `ν(f)` on `[0, top]` with the interval topology: `◇` is `d`.
pub fn interval_model_check(top: &Ordinal, v: &OrdinalValuation, f: &Formula) -> Result<SymbolicSet, SetError> {
    eval(top, v, f, &|x| x.derivative())
}

/// `ν(f)` on `[0, top]` with end-segment filters: `◇φ` holds at a limit
/// when `ν(φ)` is cofinal in it, at `γ+1` when `φ` holds at `γ`, and never at 0.
pub fn end_segment_model_check(top: &Ordinal, v: &OrdinalValuation, f: &Formula) -> Result<SymbolicSet, SetError> {
    eval(top, v, f, &|x| x.derivative().union(&x.successor_image()).expect("same space"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::ordinals::natset::NatSet;

    fn o(s: &str) -> Ordinal {
        s.parse().unwrap()
    }

    #[test]
    fn interval_examples() {
        let top = o("w^2");
        let v = OrdinalValuation::new();
        let isolated = interval_model_check(&top, &v, &parse("[]#").unwrap()).unwrap();
        assert_eq!(isolated, SymbolicSet::rank_window(&top, 0, 0));
        let limits = interval_model_check(&top, &v, &parse("<>T").unwrap()).unwrap();
        assert_eq!(limits, SymbolicSet::rank_window(&top, 1, 2));
        let top_only = interval_model_check(&top, &v, &parse("<><>T").unwrap()).unwrap();
        assert_eq!(top_only, SymbolicSet::singleton(&top, &top));
    }

    #[test]
    fn end_segment_examples() {
        let top = o("w");
        let v = OrdinalValuation::new();
        let dia = end_segment_model_check(&top, &v, &parse("<>T").unwrap()).unwrap();
        assert_eq!(dia, SymbolicSet::interval(&top, &o("1"), &o("w+1")));
        let boxes = end_segment_model_check(&top, &v, &parse("[]#").unwrap()).unwrap();
        assert_eq!(boxes, SymbolicSet::singleton(&top, &o("0")));

        let top = o("w^2");
        let odd = SymbolicSet::coefficient_in(&top, 0, &NatSet::residue(1, 2));
        let v: OrdinalValuation = [(0, odd.clone())].into();
        let at = end_segment_model_check(&top, &v, &parse("<>p0").unwrap()).unwrap();
        assert!(at.contains(&o("w+2")) && !at.contains(&o("w+3")) && at.contains(&o("w")));
    }

    #[test]
    fn lob_under_both_semantics() {
        let top = o("w^3");
        let lob = Formula::lob(Formula::Var(0));
        let sets = [
            SymbolicSet::empty(&top),
            SymbolicSet::coefficient_in(&top, 1, &NatSet::residue(0, 2)),
            SymbolicSet::interval(&top, &o("w+5"), &o("w^2*2")),
            SymbolicSet::rank_window(&top, 1, 1),
        ];
        for s in &sets {
            let v: OrdinalValuation = [(0, s.clone())].into();
            assert_eq!(interval_model_check(&top, &v, &lob).unwrap(), SymbolicSet::full(&top));
        }
        // Successors see only their predecessor, so the end-segment family is
        // not normal and p0 = ∅ refutes the Löb instance from 2 onwards.
        let v: OrdinalValuation = [(0, sets[0].clone())].into();
        let holds = end_segment_model_check(&top, &v, &lob).unwrap();
        assert_eq!(holds, SymbolicSet::interval(&top, &o("0"), &o("2")));
    }

    #[test]
    fn space_mismatch_is_reported() {
        let v: OrdinalValuation = [(0, SymbolicSet::full(&o("w")))].into();
        assert!(interval_model_check(&o("w^2"), &v, &parse("p0").unwrap()).is_err());
    }
}
