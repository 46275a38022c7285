//! Interval-topology countermodels: a finite GL countermodel tree of height
//! `h` is the image of `[0, ω^h]` under a map that preserves the derivative,
//! so pulling its valuation back refutes the same formula at `ω^h`.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::decide::{decide, DecideError, Verdict};
use crate::formula::Formula;
use crate::kripke::{model_check, KripkeModel};
use crate::ordinals::natset::NatSet;
use crate::ordinals::ordinal::Ordinal;
use crate::ordinals::semantics::{interval_model_check, OrdinalValuation};
use crate::ordinals::symbolic::{and, coord, or, translate, zeros_below, Node, SetError, SymbolicSet, NO};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CountermodelError {
    #[error("Kripke model is not a rooted transitive irreflexive tree")]
    NotATree,
    #[error("tree of height {height} does not fit in [0, w^{degree}]")]
    SpaceTooSmall { height: u32, degree: u32 },
    #[error("formula holds at the root of the model")]
    NotRefuted,
    #[error("internal error: truth of {subformula} differs on the preimage of world {world}")]
    TransferFailed { subformula: String, world: usize },
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Set(#[from] SetError),
}

/// A valuation on `[0, ω^degree]` refuting a formula at `ω^height`.
#[derive(Debug, Clone)]
pub struct IntervalCountermodel {
    pub model: KripkeModel,
    pub height: u32,
    pub space_top: Ordinal,
    pub refuting_point: Ordinal,
    /// Preimage of every world; together they partition `[0, ω^height]`.
    pub preimages: Vec<SymbolicSet>,
    pub valuation: OrdinalValuation,
}

struct Tree {
    heights: Vec<u32>,
    children: Vec<Vec<usize>>,
}

fn add(out: &mut BTreeMap<usize, Node>, v: usize, x: Node) {
    let entry = out.entry(v).or_insert(NO);
    *entry = or(entry, &x);
}

/// Preimages, relative to `[0, ω^h]`, of the worlds in the subtree of `w`
/// (`h` the height of `w`). `w` gets `{ω^h}`. The stripes
/// `(ω^(h-1)·c, ω^(h-1)·(c+1)]` each end at a point of a child of height
/// `h-1`, chosen cyclically; each stripe first hosts one copy of every lower
/// child's pattern, in order of non-increasing height, then the pattern of
/// the closing child.
fn pattern(tree: &Tree, w: usize) -> BTreeMap<usize, Node> {
    let h = tree.heights[w];
    let mut out = BTreeMap::new();
    out.insert(w, and(&coord(h, &NatSet::singleton(1)), &zeros_below(h)));
    if h == 0 {
        return out;
    }
    let below_top = coord(h, &NatSet::singleton(0));
    let (tops, mut lower): (Vec<usize>, Vec<usize>) =
        tree.children[w].iter().partition(|&&u| tree.heights[u] == h - 1);
    lower.sort_by_key(|&u| (Reverse(tree.heights[u]), u));
    let mut delta = Ordinal::zero();
    for u in lower {
        for (v, x) in pattern(tree, u) {
            add(&mut out, v, and(&translate(&delta, &x, h - 2), &below_top));
        }
        delta = delta.add(&Ordinal::omega_pow(tree.heights[u])).expect("small ordinal");
    }
    let count = tops.len() as u64;
    for (k, &x) in tops.iter().enumerate() {
        let stripes = NatSet::residue(k as u64, count);
        for (v, y) in pattern(tree, x) {
            let placed = if v == x {
                and(&coord(h - 1, &stripes.shift_up(1)), &zeros_below(h - 1))
            } else {
                and(&coord(h - 1, &stripes), &translate(&delta, &y, h - 2))
            };
            add(&mut out, v, and(&placed, &below_top));
        }
    }
    out
}

/// Preimages of every world of a rooted tree under the map from
/// `[0, ω^h] ⊆ [0, ω^degree]`; 0 goes to the first leaf.
pub fn interval_preimages(model: &KripkeModel, degree: u32) -> Result<(u32, Vec<SymbolicSet>), CountermodelError> {
    let frame = &model.frame;
    if !frame.is_transitive_irreflexive_tree() {
        return Err(CountermodelError::NotATree);
    }
    let root = frame.root().ok_or(CountermodelError::NotATree)?;
    let heights: Vec<u32> = frame
        .world_heights()
        .ok_or(CountermodelError::NotATree)?
        .into_iter()
        .map(|h| h as u32)
        .collect();
    let h = heights[root];
    if h > degree {
        return Err(CountermodelError::SpaceTooSmall { height: h, degree });
    }
    let children = (0..frame.len())
        .map(|w| {
            let succ = frame.successors(w);
            succ.iter()
                .copied()
                .filter(|&v| !succ.iter().any(|&u| frame.relates(u, v)))
                .collect()
        })
        .collect();
    let tree = Tree { heights, children };
    let top = Ordinal::omega_pow(degree);
    let cone = SymbolicSet::interval(&top, &Ordinal::zero(), &Ordinal::omega_pow(h).succ());
    let mut nodes = pattern(&tree, root);
    let leaf = (0..frame.len()).find(|&w| tree.heights[w] == 0).expect("finite trees have leaves");
    add(&mut nodes, leaf, zeros_below(degree + 1));
    let preimages = (0..frame.len())
        .map(|w| {
            let x = nodes.get(&w).cloned().unwrap_or(NO);
            SymbolicSet::from_node(&top, x).intersection(&cone).expect("same space")
        })
        .collect();
    Ok((h, preimages))
}

/// Pulls the valuation of `model` back to `[0, ω^degree]` and checks, for
/// `f` and each subformula, that its truth set on `[0, ω^h]` is the union
/// of the preimages of the worlds where it holds.
pub fn interval_countermodel(
    model: &KripkeModel,
    f: &Formula,
    degree: u32,
) -> Result<IntervalCountermodel, CountermodelError> {
    let (height, preimages) = interval_preimages(model, degree)?;
    let root = model.frame.root().ok_or(CountermodelError::NotATree)?;
    if model_check(model, f).contains(&root) {
        return Err(CountermodelError::NotRefuted);
    }
    let top = Ordinal::omega_pow(degree);
    let union_of = |worlds: &mut dyn Iterator<Item = usize>| -> SymbolicSet {
        worlds.fold(SymbolicSet::empty(&top), |acc, w| acc.union(&preimages[w]).expect("same space"))
    };
    let cone = union_of(&mut (0..model.frame.len()));
    let mut valuation = OrdinalValuation::new();
    for var in f.vars() {
        let set = union_of(&mut (0..model.frame.len()).filter(|&w| model.holds_var(var, w)));
        valuation.insert(var, set);
    }
    let mut checks = f.subformulas();
    checks.push(f.clone());
    for psi in &checks {
        let truth = interval_model_check(&top, &valuation, psi)?.intersection(&cone)?;
        let kripke = model_check(model, psi);
        for (w, pre) in preimages.iter().enumerate() {
            let inside = pre.is_subset(&truth)?;
            let outside = pre.intersection(&truth)?.is_empty();
            if !(if kripke.contains(&w) { inside } else { outside }) {
                return Err(CountermodelError::TransferFailed { subformula: psi.print(), world: w });
            }
        }
    }
    let refuting_point = Ordinal::omega_pow(height);
    let holds = interval_model_check(&top, &valuation, f)?;
    if holds.contains(&refuting_point) {
        return Err(CountermodelError::TransferFailed { subformula: f.print(), world: root });
    }
    Ok(IntervalCountermodel {
        model: model.clone(),
        height,
        space_top: top,
        refuting_point,
        preimages,
        valuation,
    })
}

/// decide, then pull the countermodel back to `[0, ω^max(min_degree, h)]`.
/// Returns `None` for theorems.
pub fn interval_countermodel_for(
    f: &Formula,
    min_degree: u32,
) -> Result<Option<IntervalCountermodel>, CountermodelError> {
    match decide(f)? {
        Verdict::Valid => Ok(None),
        Verdict::Countermodel { model, .. } => {
            let h = model.frame.height().unwrap_or(0) as u32;
            interval_countermodel(&model, f, min_degree.max(h)).map(Some)
        }
    }
}
