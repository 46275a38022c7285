//! Transfer of a Kripke countermodel to a filter countermodel through a
//! bounded morphism from `K_n` and a Γ-labeling.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::decide::{decide, DecideError, Verdict};
use crate::formula::Formula;
use crate::kripke::{build_bounded_morphism, model_check, BoundedMorphism, KnNode, KripkeError, KripkeModel};
use crate::measures::{
    build_gamma_structure, filter_model_check, validate_dagger, DaggerViolation, FilterValuation, GammaLabeling,
    MeasureError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReduceError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("labeling fails {0}")]
    Dagger(DaggerViolation),
    #[error("internal error: truth of {subformula} differs at point {point} of {node}")]
    TransferFailed { subformula: String, node: KnNode, point: usize },
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Kripke(#[from] KripkeError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// `V(p) = ⋃{Γ(s) : f(s) ∈ ν(p)}`, verified block by block against the
/// Kripke model for every subformula before it is returned.
pub fn reduce_countermodel(
    gl: &GammaLabeling,
    bm: &BoundedMorphism,
    km: &KripkeModel,
    f: &Formula,
) -> Result<FilterValuation, ReduceError> {
    let pre = |msg: &str| ReduceError::Precondition(msg.to_string());
    if !km.frame.is_transitive_irreflexive_tree() {
        return Err(pre("Kripke model is not a transitive irreflexive tree"));
    }
    if bm.target != km.frame {
        return Err(pre("morphism target differs from the model frame"));
    }
    let tr = bm.truncation.as_ref().ok_or_else(|| pre("morphism source is not a K_n truncation"))?;
    if tr.n != gl.truncation.n || tr.b != gl.truncation.b {
        return Err(pre("morphism and labeling use different truncations"));
    }
    bm.check().map_err(|v| ReduceError::Precondition(format!("morphism check failed: {v}")))?;
    validate_dagger(gl).map_err(ReduceError::Dagger)?;
    let root = km.frame.root().ok_or_else(|| pre("model has no root"))?;
    if model_check(km, f).contains(&root) {
        return Err(pre("formula holds at the root of the model"));
    }

    let mut valuation = FilterValuation::new();
    for var in f.vars() {
        let mut set = BTreeSet::new();
        for (k, block) in gl.gamma.iter().enumerate() {
            if km.holds_var(var, bm.map[k]) {
                set.extend(block.iter().copied());
            }
        }
        valuation.insert(var, set);
    }

    let mut checks = f.subformulas();
    checks.push(f.clone());
    for psi in &checks {
        let filter_truth = filter_model_check(&gl.structure, &valuation, psi);
        let kripke_truth = model_check(km, psi);
        for (k, block) in gl.gamma.iter().enumerate() {
            let expected = kripke_truth.contains(&bm.map[k]);
            if let Some(&point) = block.iter().find(|p| filter_truth.contains(p) != expected) {
                return Err(ReduceError::TransferFailed {
                    subformula: psi.print(),
                    node: gl.truncation.node(k).clone(),
                    point,
                });
            }
        }
    }
    Ok(valuation)
}

/// Everything produced by [`reduce_pipeline`].
#[derive(Debug, Clone)]
pub struct Reduction {
    pub model: KripkeModel,
    pub morphism: BoundedMorphism,
    pub gamma: GammaLabeling,
    pub valuation: FilterValuation,
    /// Points of the filter structure where the formula fails.
    pub refuting_points: BTreeSet<usize>,
}

/// decide → countermodel → bounded morphism from `K_h` (h the countermodel
/// height) → Γ-structure with `m` points per block → transferred valuation.
/// Returns `None` for theorems.
pub fn reduce_pipeline(f: &Formula, m: u32, guard: usize) -> Result<Option<Reduction>, ReduceError> {
    let (model, world) = match decide(f)? {
        Verdict::Valid => return Ok(None),
        Verdict::Countermodel { model, world } => (model, world),
    };
    debug_assert_eq!(world, 0);
    let height = model.frame.height().unwrap_or(0) as u32;
    let morphism = build_bounded_morphism(height, &model.frame, guard)?;
    let b = morphism.truncation.as_ref().map_or(1, |t| t.b);
    let gamma = build_gamma_structure(height, b, m, guard)?;
    let valuation = reduce_countermodel(&gamma, &morphism, &model, f)?;
    let holds = filter_model_check(&gamma.structure, &valuation, f);
    let refuting_points = (0..gamma.structure.len()).filter(|p| !holds.contains(p)).collect();
    Ok(Some(Reduction { model, morphism, gamma, valuation, refuting_points }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::kripke::KripkeFrame;
    use crate::measures::DEFAULT_GAMMA_GUARD;

    fn refuted_at_eta(s: &str) -> Reduction {
        let f = parse(s).unwrap();
        let r = reduce_pipeline(&f, 1, DEFAULT_GAMMA_GUARD).unwrap().expect("not a theorem");
        assert!(r.refuting_points.contains(&r.gamma.eta().unwrap()), "{s}");
        r
    }

    #[test]
    fn pipeline_examples() {
        // The least countermodel is a single point, so K_0 suffices.
        let r = refuted_at_eta("[]p0 -> p0");
        assert_eq!(r.gamma.truncation.n, 0);
        let r = refuted_at_eta("<>T");
        assert_eq!(r.gamma.structure.len(), 1);
        let r = refuted_at_eta("[]p0");
        let leaf = r.gamma.block(&KnNode(vec![(0, 0)]));
        assert!(leaf.iter().all(|p| !r.valuation[&0].contains(p)));
    }

    #[test]
    fn height_one_countermodel_for_reflexivity() {
        let f = parse("[]p0 -> p0").unwrap();
        let km = KripkeModel {
            frame: KripkeFrame::chain(2),
            valuation: [(0, BTreeSet::from([1]))].into(),
        };
        let bm = build_bounded_morphism(1, &km.frame, 100).unwrap();
        let gl = build_gamma_structure(1, 1, 2, DEFAULT_GAMMA_GUARD).unwrap();
        let v = reduce_countermodel(&gl, &bm, &km, &f).unwrap();
        let eta = gl.eta().unwrap();
        assert!(!filter_model_check(&gl.structure, &v, &f).contains(&eta));
    }

    #[test]
    fn theorems_have_no_reduction() {
        let lob = Formula::lob(Formula::Var(0));
        assert!(reduce_pipeline(&lob, 1, DEFAULT_GAMMA_GUARD).unwrap().is_none());
    }

    #[test]
    fn preconditions_are_checked() {
        let f = parse("[]p0 -> p0").unwrap();
        let km = KripkeModel { frame: KripkeFrame::chain(2), valuation: Default::default() };
        let bm = build_bounded_morphism(1, &km.frame, 100).unwrap();
        let gl = build_gamma_structure(1, 1, 1, DEFAULT_GAMMA_GUARD).unwrap();
        // With p0 empty, []p0 fails at the root, so the implication holds there.
        let holds = reduce_countermodel(&gl, &bm, &km, &f);
        assert!(matches!(holds, Err(ReduceError::Precondition(_))));
        let gl2 = build_gamma_structure(1, 2, 1, DEFAULT_GAMMA_GUARD).unwrap();
        let g = parse("p0").unwrap();
        assert!(matches!(reduce_countermodel(&gl2, &bm, &km, &g), Err(ReduceError::Precondition(_))));
        assert!(reduce_countermodel(&gl, &bm, &km, &g).is_ok());
    }
}
