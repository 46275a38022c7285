//! Γ-labelings of `K_n` by blocks of `[0, ω^n]` with end-segment filters,
//! checked symbolically.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::kripke::{kn_truncate, KnNode, DEFAULT_KN_GUARD};
use crate::ordinals::natset::NatSet;
use crate::ordinals::ordinal::Ordinal;
use crate::ordinals::symbolic::{and, coord, not, or, zeros_below, Node, SymbolicSet, NO};

pub type GammaEnd = BTreeMap<KnNode, SymbolicSet>;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum GammaEndViolation {
    #[error("candidate is malformed: {reason}")]
    Malformed { reason: String },
    #[error("(†)1: the root block is empty")]
    EmptyRoot,
    #[error("(†)2: {point} lies in the blocks of {s} and {t}")]
    Overlap { s: KnNode, t: KnNode, point: Ordinal },
    #[error("(†)3: the block of {t} is not positive at {point} in the block of {s}")]
    NotPositive { s: KnNode, t: KnNode, point: Ordinal },
    #[error("(†)4: the blocks below {s} miss every final segment of {point}")]
    NotFull { s: KnNode, point: Ordinal },
}

impl GammaEndViolation {
    /// 1–4 for the lemma conditions, 0 for malformed input.
    pub fn condition(&self) -> u8 {
        match self {
            GammaEndViolation::Malformed { .. } => 0,
            GammaEndViolation::EmptyRoot => 1,
            GammaEndViolation::Overlap { .. } => 2,
            GammaEndViolation::NotPositive { .. } => 3,
            GammaEndViolation::NotFull { .. } => 4,
        }
    }
}

fn positive(x: &SymbolicSet) -> SymbolicSet {
    x.derivative().union(&x.successor_image()).expect("same space")
}

fn full_near(x: &SymbolicSet) -> SymbolicSet {
    positive(&x.complement()).complement()
}

/// Checks the four labeling conditions for the end-segment filters on the
/// nodes of `kn_truncate(n, b)`, `b` read off the candidate's labels.
/// Missing nodes count as empty blocks.
pub fn gamma_end_validate(n: u32, candidate: &GammaEnd) -> Result<(), GammaEndViolation> {
    let malformed = |reason: String| GammaEndViolation::Malformed { reason };
    let b = candidate.keys().flat_map(|s| s.0.iter().map(|l| l.1 + 1)).max().unwrap_or(1);
    let tr = kn_truncate(n, b, DEFAULT_KN_GUARD).map_err(|e| malformed(e.to_string()))?;
    let top = match candidate.values().next() {
        Some(x) => x.top().clone(),
        None => Ordinal::omega_pow(n),
    };
    if let Some(x) = candidate.values().find(|x| *x.top() != top) {
        return Err(malformed(format!("blocks live in [0, {top}] and [0, {}]", x.top())));
    }
    if let Some(s) = candidate.keys().find(|s| tr.index_of(s).is_none()) {
        return Err(malformed(format!("{s} is not a node of K_{n} with branching {b}")));
    }
    let blocks: Vec<SymbolicSet> = tr
        .nodes()
        .iter()
        .map(|s| candidate.get(s).cloned().unwrap_or_else(|| SymbolicSet::empty(&top)))
        .collect();

    if blocks[tr.index_of(&KnNode::root()).expect("root")].is_empty() {
        return Err(GammaEndViolation::EmptyRoot);
    }
    for (i, x) in blocks.iter().enumerate() {
        for (j, y) in blocks.iter().enumerate().skip(i + 1) {
            if let Some(point) = x.intersection(y).expect("same space").min_element() {
                return Err(GammaEndViolation::Overlap {
                    s: tr.node(i).clone(),
                    t: tr.node(j).clone(),
                    point,
                });
            }
        }
    }
    for (i, x) in blocks.iter().enumerate() {
        let s = tr.node(i);
        let below: Vec<usize> = (0..tr.len()).filter(|&j| s.strictly_below(tr.node(j))).collect();
        for &j in &below {
            if let Some(point) = x.difference(&positive(&blocks[j])).expect("same space").min_element() {
                return Err(GammaEndViolation::NotPositive { s: s.clone(), t: tr.node(j).clone(), point });
            }
        }
        if below.is_empty() {
            continue;
        }
        let union = below
            .iter()
            .fold(SymbolicSet::empty(&top), |acc, &j| acc.union(&blocks[j]).expect("same space"));
        if let Some(point) = x.difference(&full_near(&union)).expect("same space").min_element() {
            return Err(GammaEndViolation::NotFull { s: s.clone(), point });
        }
    }
    Ok(())
}

struct Builder {
    b: u32,
    blocks: BTreeMap<KnNode, Node>,
}

impl Builder {
    fn add(&mut self, s: KnNode, x: Node) {
        let entry = self.blocks.entry(s).or_insert(NO);
        *entry = or(entry, &x);
    }

    /// Distributes the approach region `upper ∧ (coordinates below h not all 0)`
    /// of a node `s` of height `h` among the descendants of `s`. `upper`
    /// only constrains coordinates `≥ h`.
    fn assign(&mut self, s: &KnNode, h: u32, upper: &Node) {
        if h == 0 {
            return;
        }
        let classes = u64::from(h * self.b);
        let below_top = zeros_below(h - 1);
        for i in 0..h {
            for j in 0..self.b {
                let t = s.child(i, j);
                let residue = NatSet::residue(u64::from(i * self.b + j), classes);
                let stripe = and(upper, &coord(h - 1, &residue));
                let closing = and(&and(upper, &coord(h - 1, &residue.shift_up(1))), &below_top);
                if i == h - 1 {
                    self.add(t.clone(), closing);
                    self.assign(&t, h - 1, &stripe);
                } else {
                    let at_rank = and(&and(&stripe, &coord(i, &NatSet::at_least(1))), &zeros_below(i));
                    self.add(t.clone(), at_rank);
                    self.assign(&t, i, &stripe);
                    let higher = and(&and(&stripe, &zeros_below(i + 1)), &not(&below_top));
                    self.add(s.child(0, 0), higher);
                    self.add(s.child(0, 0), closing);
                }
            }
        }
    }
}

/// A labeling of `kn_truncate(n, b)` by subsets of `[0, ω^n]`. The root gets
/// `{ω^n}`. Below a node of height `h`, values of the coefficient of
/// `ω^(h-1)` are striped by residue mod `h·b`; the stripe of a child of
/// height `h-1` closes at a point of its block and recurses inside, and a
/// lower child of height `i` gets the rank-`i` points of its stripes, with
/// each approach region handled recursively. Points of other ranks go to
/// the leaf child `(0,0)`.
pub fn gamma_end_candidate(n: u32, b: u32) -> GammaEnd {
    assert!(b >= 1, "branching must be positive");
    let top = Ordinal::omega_pow(n);
    let mut builder = Builder { b, blocks: BTreeMap::new() };
    let root = KnNode::root();
    builder.add(root.clone(), and(&coord(n, &NatSet::singleton(1)), &zeros_below(n)));
    builder.assign(&root, n, &coord(n, &NatSet::singleton(0)));
    builder
        .blocks
        .into_iter()
        .map(|(s, x)| (s, SymbolicSet::from_node(&top, x)))
        .collect()
}
