//! Filter-sequence semantics on a measure structure, the soundness
//! invariant behind the Löb axiom, and the derivative of the induced
//! topology.

use std::collections::BTreeSet;

use crate::formula::Formula;
use crate::measures::{FilterValuation, MeasureError, MeasureStructure};

fn mask(ms: &MeasureStructure, v: &FilterValuation, f: &Formula) -> Vec<bool> {
    let n = ms.len();
    let combine = |a: Vec<bool>, b: Vec<bool>, op: fn(bool, bool) -> bool| -> Vec<bool> {
        a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
    };
    match f {
        Formula::Var(i) => {
            let set = v.get(i);
            (0..n).map(|p| set.is_some_and(|s| s.contains(&p))).collect()
        }
        Formula::Bot => vec![false; n],
        Formula::Top => vec![true; n],
        Formula::Neg(a) => mask(ms, v, a).into_iter().map(|x| !x).collect(),
        Formula::And(a, b) => combine(mask(ms, v, a), mask(ms, v, b), |x, y| x && y),
        Formula::Or(a, b) => combine(mask(ms, v, a), mask(ms, v, b), |x, y| x || y),
        Formula::Imp(a, b) => combine(mask(ms, v, a), mask(ms, v, b), |x, y| !x || y),
        Formula::Box(a) => {
            let inner = mask(ms, v, a);
            (0..n).map(|p| ms.seeds(p).iter().all(|&q| inner[q])).collect()
        }
        Formula::Dia(a) => {
            let inner = mask(ms, v, a);
            (0..n).map(|p| ms.seeds(p).iter().any(|&q| inner[q])).collect()
        }
    }
}

fn to_set(m: Vec<bool>) -> BTreeSet<usize> {
    m.into_iter().enumerate().filter_map(|(p, x)| x.then_some(p)).collect()
}

/// `ν(f)`: `□` is membership in `M_α`, `◇` is positivity at `α`.
pub fn filter_model_check(ms: &MeasureStructure, v: &FilterValuation, f: &Formula) -> BTreeSet<usize> {
    to_set(mask(ms, v, f))
}

/// `ν(f)` computed on the desugared formula, so `◇` is evaluated as `¬□¬`.
pub fn filter_model_check_dual(ms: &MeasureStructure, v: &FilterValuation, f: &Formula) -> BTreeSet<usize> {
    to_set(mask(ms, v, &f.desugar()))
}

/// A pair `(α, β)` where `A ∈ M_α` but the seed `β` of `α` does not have
/// `A ∩ β ∈ M_β`, if one exists.
pub fn soundness_witness(ms: &MeasureStructure, a: &BTreeSet<usize>) -> Option<(usize, usize)> {
    let full_at: Vec<bool> = (0..ms.len()).map(|p| ms.seeds(p).iter().all(|q| a.contains(q))).collect();
    (0..ms.len())
        .filter(|&alpha| full_at[alpha])
        .find_map(|alpha| ms.seeds(alpha).iter().find(|&&beta| !full_at[beta]).map(|&beta| (alpha, beta)))
}

/// For every `α` with `A ∈ M_α`, checks `{β < α : A ∩ β ∈ M_β} ∈ M_α`.
pub fn soundness_invariant(ms: &MeasureStructure, a: &BTreeSet<usize>) -> bool {
    soundness_witness(ms, a).is_none()
}

/// `d(A)`: the points at which `A` is positive.
pub fn tau_m_derivative(ms: &MeasureStructure, a: &BTreeSet<usize>) -> BTreeSet<usize> {
    (0..ms.len())
        .filter(|&p| ms.seeds(p).iter().any(|q| a.contains(q)))
        .collect()
}

/// `ρ(p)` for every point: the last `ξ` with `p ∈ d^ξ(points)`.
pub fn derivative_ranks(ms: &MeasureStructure) -> Vec<usize> {
    let mut rank = vec![0usize; ms.len()];
    let mut current: BTreeSet<usize> = (0..ms.len()).collect();
    let mut level = 0;
    while !current.is_empty() {
        let next = tau_m_derivative(ms, &current);
        for &p in current.difference(&next) {
            rank[p] = level;
        }
        current = next;
        level += 1;
    }
    rank
}

pub fn derivative_rank(ms: &MeasureStructure, p: usize) -> Result<usize, MeasureError> {
    if p >= ms.len() {
        return Err(MeasureError::UnknownPoint(p));
    }
    Ok(derivative_ranks(ms)[p])
}

/// `{p : ζ < ρ(p) ≤ ξ}`.
pub fn icard_sets(ms: &MeasureStructure, zeta: i64, xi: u64) -> Result<BTreeSet<usize>, MeasureError> {
    if zeta < -1 || zeta >= xi as i64 {
        return Err(MeasureError::BadBounds { zeta, xi });
    }
    Ok(derivative_ranks(ms)
        .into_iter()
        .enumerate()
        .filter(|&(_, r)| zeta < r as i64 && r as u64 <= xi)
        .map(|(p, _)| p)
        .collect())
}
