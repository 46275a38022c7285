//! Finite fragments of `Σ = {◇p₀} ∪ {□(p_i→◇p_{i+1}) : i<ω}` and the
//! descending Mitchell chains that their satisfaction forces.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::formula::Formula;
use crate::measures::{filter_model_check, FilterValuation, MeasureStructure};

/// Default cap on `relevant points · (k+1)` for the brute-force engine.
pub const DEFAULT_SIGMA_GUARD: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SigmaError {
    #[error("point {0} does not exist")]
    UnknownPoint(usize),
    #[error("brute-force search needs {bits} bits, guard is {guard}")]
    GuardExceeded { bits: usize, guard: usize },
    #[error("valuation does not satisfy the fragment at point {0}")]
    Precondition(usize),
    #[error("no descending chain of length {0} exists among the measures at the point")]
    ChainFailed(usize),
}

/// `[◇p₀] ++ [□(p_i→◇p_{i+1}) : i < k]`.
pub fn sigma_fragment(k: usize) -> Vec<Formula> {
    let mut out = vec![Formula::dia(Formula::Var(0))];
    for i in 0..k as u32 {
        out.push(Formula::boxed(Formula::imp(Formula::Var(i), Formula::dia(Formula::Var(i + 1)))));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaEngine {
    /// Every valuation of `p₀..p_k` on the points that can matter.
    Brute,
    /// Search for a seed chain `β₀, β₁ ∈ seeds(β₀), …` realized by singleton
    /// valuations. Exact: any satisfying valuation contains such a chain.
    Chain,
    /// `Brute` within the guard, `Chain` beyond it.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SigmaOutcome {
    pub satisfiable: bool,
    pub witness: Option<FilterValuation>,
    pub engine: SigmaEngine,
}

fn satisfies_fragment(ms: &MeasureStructure, p: usize, v: &FilterValuation, k: usize) -> bool {
    sigma_fragment(k)
        .iter()
        .all(|f| filter_model_check(ms, v, f).contains(&p))
}

/// Whether some valuation makes every formula of `sigma_fragment(k)` true at `p`.
pub fn sigma_satisfiable_at(
    ms: &MeasureStructure,
    p: usize,
    k: usize,
    engine: SigmaEngine,
    guard: usize,
) -> Result<SigmaOutcome, SigmaError> {
    if p >= ms.len() {
        return Err(SigmaError::UnknownPoint(p));
    }
    // Truth at p depends only on seeds of p and their seeds.
    let mut relevant: BTreeSet<usize> = ms.seeds(p).iter().copied().collect();
    for &beta in ms.seeds(p) {
        relevant.extend(ms.seeds(beta).iter().copied());
    }
    let relevant: Vec<usize> = relevant.into_iter().collect();
    let bits = relevant.len() * (k + 1);
    let engine = match engine {
        SigmaEngine::Auto if bits <= guard => SigmaEngine::Brute,
        SigmaEngine::Auto => SigmaEngine::Chain,
        e => e,
    };
    let witness = match engine {
        SigmaEngine::Brute => {
            if bits > guard || bits >= 40 {
                return Err(SigmaError::GuardExceeded { bits, guard });
            }
            brute(ms, p, k, &relevant)
        }
        _ => chain(ms, p, k),
    };
    if let Some(w) = &witness {
        assert!(satisfies_fragment(ms, p, w, k), "sigma witness fails its own check");
    }
    Ok(SigmaOutcome { satisfiable: witness.is_some(), witness, engine })
}

fn brute(ms: &MeasureStructure, p: usize, k: usize, relevant: &[usize]) -> Option<FilterValuation> {
    let r = relevant.len();
    let pos = |q: usize| relevant.binary_search(&q).ok();
    let to_mask = |qs: &[usize]| qs.iter().filter_map(|&q| pos(q)).fold(0u64, |m, i| m | 1 << i);
    let p_seeds = to_mask(ms.seeds(p));
    let seed_masks: Vec<u64> = relevant.iter().map(|&q| to_mask(ms.seeds(q))).collect();
    let width_mask = if r == 64 { u64::MAX } else { (1u64 << r) - 1 };
    let total = 1u64 << (r * (k + 1));
    'codes: for code in 0..total {
        let layer = |i: usize| (code >> (i * r)) & width_mask;
        if layer(0) & p_seeds == 0 {
            continue;
        }
        for i in 0..k {
            let mut obligated = layer(i) & p_seeds;
            while obligated != 0 {
                let q = obligated.trailing_zeros() as usize;
                obligated &= obligated - 1;
                if seed_masks[q] & layer(i + 1) == 0 {
                    continue 'codes;
                }
            }
        }
        let mut v = FilterValuation::new();
        for i in 0..=k {
            let set = (0..r).filter(|&q| layer(i) >> q & 1 == 1).map(|q| relevant[q]).collect();
            v.insert(i as u32, set);
        }
        return Some(v);
    }
    None
}

fn chain(ms: &MeasureStructure, p: usize, k: usize) -> Option<FilterValuation> {
    fn extend(ms: &MeasureStructure, p: usize, k: usize, path: &mut Vec<usize>) -> bool {
        let last = *path.last().expect("non-empty");
        if path.len() == k + 1 || ms.seeds(p).binary_search(&last).is_err() {
            return true;
        }
        for &next in ms.seeds(last) {
            path.push(next);
            if extend(ms, p, k, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    for &start in ms.seeds(p) {
        let mut path = vec![start];
        if extend(ms, p, k, &mut path) {
            let mut v = FilterValuation::new();
            for i in 0..=k {
                v.insert(i as u32, path.get(i).into_iter().copied().collect());
            }
            return Some(v);
        }
    }
    None
}

/// Measures `U₀ ⊳ U₁ ⊳ … ⊳ U_k` on `p` with `ν(p_i)` and, for `i < k`,
/// `ν(◇p_{i+1})` in `U_i`. Returns measure ids.
pub fn extract_descending_chain(
    ms: &MeasureStructure,
    p: usize,
    v: &FilterValuation,
    k: usize,
) -> Result<Vec<usize>, SigmaError> {
    if p >= ms.len() {
        return Err(SigmaError::UnknownPoint(p));
    }
    if !satisfies_fragment(ms, p, v, k) {
        return Err(SigmaError::Precondition(p));
    }
    let targets: Vec<BTreeSet<usize>> = (0..=k)
        .map(|i| {
            let here = filter_model_check(ms, v, &Formula::Var(i as u32));
            if i < k {
                let next = filter_model_check(ms, v, &Formula::dia(Formula::Var(i as u32 + 1)));
                here.intersection(&next).copied().collect()
            } else {
                here
            }
        })
        .collect();
    fn extend(ms: &MeasureStructure, p: usize, targets: &[BTreeSet<usize>], path: &mut Vec<usize>) -> bool {
        let i = path.len();
        if i == targets.len() {
            return true;
        }
        for &u in ms.measures_at(p) {
            if !targets[i].contains(&ms.measure(u).seed) {
                continue;
            }
            if let Some(&prev) = path.last() {
                if !ms.mitchell_below(u, prev) {
                    continue;
                }
            }
            path.push(u);
            if extend(ms, p, targets, path) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::with_capacity(k + 1);
    if !extend(ms, p, &targets, &mut path) {
        return Err(SigmaError::ChainFailed(k + 1));
    }
    let ranks: Vec<usize> = path.iter().map(|&u| ms.measure_rank(u)).collect();
    if ranks.windows(2).any(|w| w[1] >= w[0]) {
        return Err(SigmaError::ChainFailed(k + 1));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{build_gamma_structure, DEFAULT_GAMMA_GUARD};

    #[test]
    fn fragments() {
        assert_eq!(sigma_fragment(0).len(), 1);
        assert_eq!(sigma_fragment(1)[1].print(), "[]((p0 -> <>(p1)))");
        let two = sigma_fragment(2);
        assert_eq!(two.len(), 3);
        assert_eq!(two.iter().flat_map(|f| f.vars()).max(), Some(2));
    }

    #[test]
    fn depth_one_examples() {
        let g = build_gamma_structure(1, 2, 1, DEFAULT_GAMMA_GUARD).unwrap();
        let eta = g.eta().unwrap();
        let zero = sigma_satisfiable_at(&g.structure, eta, 0, SigmaEngine::Brute, 24).unwrap();
        assert!(zero.satisfiable);
        let chain = extract_descending_chain(&g.structure, eta, zero.witness.as_ref().unwrap(), 0).unwrap();
        assert_eq!(chain.len(), 1);
        assert!(!sigma_satisfiable_at(&g.structure, eta, 1, SigmaEngine::Brute, 24).unwrap().satisfiable);
        assert!(!sigma_satisfiable_at(&g.structure, 0, 0, SigmaEngine::Brute, 24).unwrap().satisfiable);
    }

    #[test]
    fn depth_two_chain() {
        let g = build_gamma_structure(2, 2, 1, DEFAULT_GAMMA_GUARD).unwrap();
        let eta = g.eta().unwrap();
        let out = sigma_satisfiable_at(&g.structure, eta, 1, SigmaEngine::Auto, 24).unwrap();
        let chain = extract_descending_chain(&g.structure, eta, out.witness.as_ref().unwrap(), 1).unwrap();
        let ranks: Vec<usize> = chain.iter().map(|&u| g.structure.measure_rank(u)).collect();
        assert_eq!(ranks, vec![1, 0]);
        assert!(matches!(
            extract_descending_chain(&g.structure, eta, &FilterValuation::new(), 1),
            Err(SigmaError::Precondition(_))
        ));
    }

    #[test]
    fn engines_agree() {
        for n in 1..=2 {
            let g = build_gamma_structure(n, 2, 1, DEFAULT_GAMMA_GUARD).unwrap();
            for p in 0..g.structure.len() {
                for k in 0..=2 {
                    let brute = sigma_satisfiable_at(&g.structure, p, k, SigmaEngine::Brute, 24);
                    let chain = sigma_satisfiable_at(&g.structure, p, k, SigmaEngine::Chain, 24).unwrap();
                    if let Ok(b) = brute {
                        assert_eq!(b.satisfiable, chain.satisfiable, "n={n} p={p} k={k}");
                    }
                }
            }
        }
    }

    #[test]
    fn guard_is_enforced_for_brute_force() {
        let g = build_gamma_structure(3, 2, 1, DEFAULT_GAMMA_GUARD).unwrap();
        let eta = g.eta().unwrap();
        assert!(matches!(
            sigma_satisfiable_at(&g.structure, eta, 1, SigmaEngine::Brute, 24),
            Err(SigmaError::GuardExceeded { .. })
        ));
    }
}
