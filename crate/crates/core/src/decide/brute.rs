//! Exhaustive countermodel search over small trees. Every valuation of a
//! frame is evaluated at once: a truth value is a bit vector indexed by
//! valuation code.

use std::collections::{BTreeMap, BTreeSet};

use crate::decide::DecideError;
use crate::formula::Formula;
use crate::kripke::{enumerate_trees, KripkeError, KripkeFrame, KripkeModel};

/// Largest `worlds * vars` the brute-force search will attempt per frame.
pub const DEFAULT_BRUTE_GUARD: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BruteOutcome {
    Refuted { model: KripkeModel, world: usize },
    /// No tree with at most `max_nodes` worlds refutes the formula. The
    /// answer settles validity when `conclusive` holds.
    NoCountermodel { max_nodes: usize, conclusive: bool },
}

impl BruteOutcome {
    pub fn is_refuted(&self) -> bool {
        matches!(self, BruteOutcome::Refuted { .. })
    }
}

/// Search every tree of [`enumerate_trees`] with at most `max_nodes` worlds.
pub fn brute_force_decide(f: &Formula, max_nodes: usize) -> Result<BruteOutcome, DecideError> {
    let frames = enumerate_trees(max_nodes)?;
    brute_force_on(f, &frames, max_nodes, DEFAULT_BRUTE_GUARD)
}

/// As [`brute_force_decide`], over a caller-supplied frame list.
pub fn brute_force_on(
    f: &Formula,
    frames: &[KripkeFrame],
    max_nodes: usize,
    guard_bits: usize,
) -> Result<BruteOutcome, DecideError> {
    let subs = f.subformulas();
    let vars: Vec<u32> = f.vars().into_iter().collect();
    for frame in frames {
        if let Some((world, code)) = refute_in_frame(&subs, &vars, frame, guard_bits)? {
            let n = frame.len();
            let valuation: BTreeMap<u32, BTreeSet<usize>> = vars
                .iter()
                .enumerate()
                .map(|(k, &v)| (v, (0..n).filter(|w| code >> (k * n + w) & 1 == 1).collect()))
                .collect();
            let model = KripkeModel { frame: frame.clone(), valuation };
            return Ok(BruteOutcome::Refuted { model, world });
        }
    }
    let conclusive = subs.len() < 128 && (max_nodes as u128) >= (1u128 << subs.len());
    Ok(BruteOutcome::NoCountermodel { max_nodes, conclusive })
}

/// First `(world, valuation code)` falsifying `subs[0]`, if any.
fn refute_in_frame(
    subs: &[Formula],
    vars: &[u32],
    frame: &KripkeFrame,
    guard_bits: usize,
) -> Result<Option<(usize, u64)>, KripkeError> {
    let n = frame.len();
    let bits = n * vars.len();
    if bits > guard_bits || bits >= 40 {
        return Err(KripkeError::GuardExceeded { bits, guard: guard_bits });
    }
    let lanes = 1usize << bits;
    let words = lanes.div_ceil(64);
    let last_mask = if lanes % 64 == 0 { u64::MAX } else { (1u64 << (lanes % 64)) - 1 };
    let full = {
        let mut v = vec![u64::MAX; words];
        v[words - 1] = last_mask;
        v
    };
    let pattern = |pos: usize| -> Vec<u64> {
        let mut v = vec![0u64; words];
        for code in 0..lanes {
            if code >> pos & 1 == 1 {
                v[code / 64] |= 1 << (code % 64);
            }
        }
        v
    };
    let index: std::collections::HashMap<&Formula, usize> =
        subs.iter().enumerate().map(|(k, g)| (g, k)).collect();
    // truth[k][w] is the lane vector of subformula k at world w.
    let mut truth: Vec<Vec<Vec<u64>>> = vec![Vec::new(); subs.len()];
    let mut order: Vec<usize> = (0..subs.len()).collect();
    order.sort_by_key(|&k| subs[k].size());
    for k in order {
        let row: Vec<Vec<u64>> = match &subs[k] {
            Formula::Var(i) => {
                let pos = vars.iter().position(|v| v == i).expect("variable of f");
                (0..n).map(|w| pattern(pos * n + w)).collect()
            }
            Formula::Bot => vec![vec![0; words]; n],
            Formula::Neg(a) => {
                let ia = index[a.as_ref()];
                (0..n)
                    .map(|w| truth[ia][w].iter().zip(&full).map(|(x, m)| !x & m).collect())
                    .collect()
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                let (ia, ib) = (index[a.as_ref()], index[b.as_ref()]);
                (0..n)
                    .map(|w| {
                        let (x, y) = (&truth[ia][w], &truth[ib][w]);
                        (0..words)
                            .map(|q| match &subs[k] {
                                Formula::And(..) => x[q] & y[q],
                                Formula::Or(..) => x[q] | y[q],
                                _ => (!x[q] | y[q]) & full[q],
                            })
                            .collect()
                    })
                    .collect()
            }
            Formula::Box(a) => {
                let ia = index[a.as_ref()];
                (0..n)
                    .map(|w| {
                        let mut acc = full.clone();
                        for &v in frame.successors(w) {
                            for q in 0..words {
                                acc[q] &= truth[ia][v][q];
                            }
                        }
                        acc
                    })
                    .collect()
            }
            Formula::Top | Formula::Dia(_) => unreachable!("closure is desugared"),
        };
        truth[k] = row;
    }
    for w in 0..n {
        for q in 0..words {
            let falsified = !truth[0][w][q] & full[q];
            if falsified != 0 {
                let code = (q * 64) as u64 + falsified.trailing_zeros() as u64;
                return Ok(Some((w, code)));
            }
        }
    }
    Ok(None)
}
