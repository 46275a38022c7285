//! The Γ-labeling of a `K_n` truncation by blocks of points, its surrogate
//! measure structure, and the checker for conditions (†)₁–(†)₄.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::kripke::{kn_truncate, KnNode, KnTruncation};
use crate::measures::{MeasureError, MeasureStructure, StructureDoc};

/// Cap on points plus measures for [`build_gamma_structure`].
pub const DEFAULT_GAMMA_GUARD: usize = 2_000_000;

/// A truncation, a block of points per node, and the structure on the points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaLabeling {
    pub truncation: KnTruncation,
    /// `gamma[k]` is the sorted block of node `truncation.node(k)`.
    pub gamma: Vec<Vec<usize>>,
    pub structure: MeasureStructure,
}

impl GammaLabeling {
    pub fn block(&self, s: &KnNode) -> &[usize] {
        self.truncation.index_of(s).map_or(&[], |k| &self.gamma[k])
    }

    /// The top point `η`: the greatest point of the root block.
    pub fn eta(&self) -> Option<usize> {
        self.gamma[0].last().copied()
    }

    /// For each point, the indices of the nodes whose blocks contain it.
    pub fn nodes_of_points(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.structure.len()];
        for (k, block) in self.gamma.iter().enumerate() {
            for &p in block {
                if p < out.len() {
                    out[p].push(k);
                }
            }
        }
        out
    }

    pub fn gamma_doc(&self) -> BTreeMap<String, Vec<usize>> {
        self.truncation
            .nodes()
            .iter()
            .zip(&self.gamma)
            .map(|(s, block)| (s.to_string(), block.clone()))
            .collect()
    }

    pub fn to_doc(&self) -> StructureDoc {
        self.structure
            .to_doc(Some(self.gamma_doc()), Some((self.truncation.n, self.truncation.b)))
    }

    pub fn from_doc(doc: &StructureDoc, guard: usize) -> Result<Self, MeasureError> {
        let structure = MeasureStructure::from_doc(doc)?;
        let (Some(n), Some(b), Some(gamma_doc)) = (doc.n, doc.b, doc.gamma.as_ref()) else {
            return Err(MeasureError::Malformed("a labeling needs n, b and gamma".into()));
        };
        let truncation = kn_truncate(n, b, guard).map_err(|e| MeasureError::Malformed(e.to_string()))?;
        let mut gamma = vec![Vec::new(); truncation.len()];
        for (key, points) in gamma_doc {
            let s: KnNode = key.parse().map_err(|_| MeasureError::Malformed(format!("node {key:?}")))?;
            let k = truncation
                .index_of(&s)
                .ok_or_else(|| MeasureError::Malformed(format!("node {key} is not in K_{n} with branch {b}")))?;
            if let Some(&p) = points.iter().find(|&&p| p >= structure.len()) {
                return Err(MeasureError::UnknownPoint(p));
            }
            let mut block = points.clone();
            block.sort_unstable();
            gamma[k] = block;
        }
        Ok(GammaLabeling { truncation, gamma, structure })
    }
}

/// Strict descendants of every node, in truncation order.
fn descendants(tr: &KnTruncation) -> Vec<Vec<usize>> {
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); tr.len()];
    for k in 1..tr.len() {
        let parent = tr.node(k).parent().expect("non-root");
        children[tr.index_of(&parent).expect("prefix-closed")].push(k);
    }
    let mut desc: Vec<Vec<usize>> = vec![Vec::new(); tr.len()];
    // Deeper nodes come later in truncation order.
    for k in (0..tr.len()).rev() {
        let mut all = Vec::new();
        for &c in &children[k] {
            all.push(c);
            all.extend_from_slice(&desc[c]);
        }
        all.sort_unstable();
        desc[k] = all;
    }
    desc
}

/// Builds the labeling on `kn_truncate(n, b)` with `m` points per non-root
/// node and a top point `η` for the root.
///
/// Points of deeper nodes lie below points of shallower ones; within a
/// depth the order is lexicographic by node, then by clone index. Every
/// point of `Γ(s)` carries one measure per strict extension `t` of `s`,
/// seeded at the least point of `Γ(t)`, and `U_u ⊲ U_t` whenever `u`
/// strictly extends `t`.
pub fn build_gamma_structure(n: u32, b: u32, m: u32, guard: usize) -> Result<GammaLabeling, MeasureError> {
    if b == 0 || m == 0 {
        return Err(MeasureError::Malformed("branch bound and block size must be at least 1".into()));
    }
    let nodes = crate::kripke::kn_size(n, b);
    let points = 1 + (nodes - 1) * m as u128;
    if points > guard as u128 {
        return Err(MeasureError::GuardExceeded { points, measures: 0, guard });
    }
    let truncation = kn_truncate(n, b, guard).map_err(|e| MeasureError::Malformed(e.to_string()))?;
    let desc = descendants(&truncation);
    let measures_total: u128 = (0..truncation.len())
        .map(|k| desc[k].len() as u128 * if k == 0 { 1 } else { m as u128 })
        .sum();
    if points + measures_total > guard as u128 {
        return Err(MeasureError::GuardExceeded { points, measures: measures_total, guard });
    }

    let mut order: Vec<usize> = (1..truncation.len()).collect();
    order.sort_by(|&x, &y| {
        let (sx, sy) = (truncation.node(x), truncation.node(y));
        sy.len().cmp(&sx.len()).then_with(|| sx.cmp(sy))
    });
    let mut gamma = vec![Vec::new(); truncation.len()];
    let mut next = 0usize;
    for &k in &order {
        gamma[k] = (next..next + m as usize).collect();
        next += m as usize;
    }
    gamma[0] = vec![next];
    let len = next + 1;

    let mut measures = Vec::new();
    let mut mitchell = Vec::new();
    for k in 0..truncation.len() {
        for &alpha in &gamma[k] {
            let base = measures.len();
            let mut slot = BTreeMap::new();
            for (offset, &t) in desc[k].iter().enumerate() {
                slot.insert(t, base + offset);
                measures.push((alpha, gamma[t][0], Some(truncation.node(t).clone())));
            }
            for &t in &desc[k] {
                for &u in &desc[t] {
                    mitchell.push((slot[&u], slot[&t]));
                }
            }
        }
    }
    let structure = MeasureStructure::new(len, measures, mitchell)?;
    Ok(GammaLabeling { truncation, gamma, structure })
}

/// A failed instance of one of the four conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DaggerViolation {
    /// (†)₁: the root block is empty.
    EmptyRoot,
    /// (†)₂: two blocks share a point.
    Overlap { s: KnNode, t: KnNode, point: usize },
    /// (†)₃: `Γ(t)` below `point ∈ Γ(s)` is not positive there.
    NotPositive { s: KnNode, t: KnNode, point: usize },
    /// (†)₄: a seed of `point ∈ Γ(s)` lies outside every descendant block.
    Escapes { s: KnNode, point: usize, seed: usize },
}

impl DaggerViolation {
    pub fn condition(&self) -> u8 {
        match self {
            DaggerViolation::EmptyRoot => 1,
            DaggerViolation::Overlap { .. } => 2,
            DaggerViolation::NotPositive { .. } => 3,
            DaggerViolation::Escapes { .. } => 4,
        }
    }
}

impl fmt::Display for DaggerViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DaggerViolation::EmptyRoot => write!(f, "(†)1: root block is empty"),
            DaggerViolation::Overlap { s, t, point } => write!(f, "(†)2: point {point} lies in both {s} and {t}"),
            DaggerViolation::NotPositive { s, t, point } => {
                write!(f, "(†)3: block of {t} is not positive at point {point} of {s}")
            }
            DaggerViolation::Escapes { s, point, seed } => {
                write!(f, "(†)4: seed {seed} of point {point} in {s} is outside the blocks above {s}")
            }
        }
    }
}

/// Every violation, grouped by condition in the order (†)₁ … (†)₄.
pub fn dagger_violations(gl: &GammaLabeling) -> Vec<DaggerViolation> {
    let tr = &gl.truncation;
    let ms = &gl.structure;
    let mut out = Vec::new();
    if gl.gamma.first().map_or(true, Vec::is_empty) {
        out.push(DaggerViolation::EmptyRoot);
    }
    let mut first_owner: Vec<Option<usize>> = vec![None; ms.len()];
    for (k, block) in gl.gamma.iter().enumerate() {
        for &p in block {
            match first_owner[p] {
                Some(j) if j != k => out.push(DaggerViolation::Overlap {
                    s: tr.node(j).clone(),
                    t: tr.node(k).clone(),
                    point: p,
                }),
                _ => first_owner[p] = Some(k),
            }
        }
    }
    let desc = descendants(tr);
    let nodes_of = gl.nodes_of_points();
    let mut hit = vec![false; tr.len()];
    for (k, block) in gl.gamma.iter().enumerate() {
        for &alpha in block {
            hit.iter_mut().for_each(|x| *x = false);
            for &seed in ms.seeds(alpha) {
                for &j in &nodes_of[seed] {
                    hit[j] = true;
                }
            }
            for &t in &desc[k] {
                if !hit[t] {
                    out.push(DaggerViolation::NotPositive {
                        s: tr.node(k).clone(),
                        t: tr.node(t).clone(),
                        point: alpha,
                    });
                }
            }
        }
    }
    for (k, block) in gl.gamma.iter().enumerate() {
        if desc[k].is_empty() {
            continue;
        }
        for &alpha in block {
            for &seed in ms.seeds(alpha) {
                let inside = nodes_of[seed].iter().any(|j| desc[k].binary_search(j).is_ok());
                if !inside {
                    out.push(DaggerViolation::Escapes { s: tr.node(k).clone(), point: alpha, seed });
                }
            }
        }
    }
    out
}

/// The first failing condition, if any.
pub fn validate_dagger(gl: &GammaLabeling) -> Result<(), DaggerViolation> {
    match dagger_violations(gl).into_iter().next() {
        Some(v) => Err(v),
        None => Ok(()),
    }
}

/// A single edit to a labeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mutation {
    /// Move the seed of a labeled measure to a point outside its block.
    RedirectSeed { measure: usize, to: usize },
    DropMeasure { measure: usize },
    /// Add a measure whose seed lies outside every descendant block.
    StrayMeasure { owner: usize, seed: usize },
    /// Put a point into a second block.
    DuplicatePoint { point: usize, into: KnNode },
    EmptyRoot,
}

impl Mutation {
    pub fn apply(&self, gl: &GammaLabeling) -> Result<GammaLabeling, MeasureError> {
        let ms = &gl.structure;
        let mut triples = ms.measure_triples();
        let mut mitchell: Vec<(usize, usize)> = ms.mitchell().iter().copied().collect();
        let mut gamma = gl.gamma.clone();
        match self {
            Mutation::RedirectSeed { measure, to } => {
                triples[*measure].1 = *to;
            }
            Mutation::DropMeasure { measure } => {
                triples.remove(*measure);
                let shift = |x: usize| if x > *measure { x - 1 } else { x };
                mitchell = mitchell
                    .into_iter()
                    .filter(|&(a, b)| a != *measure && b != *measure)
                    .map(|(a, b)| (shift(a), shift(b)))
                    .collect();
            }
            Mutation::StrayMeasure { owner, seed } => {
                triples.push((*owner, *seed, None));
            }
            Mutation::DuplicatePoint { point, into } => {
                let k = gl
                    .truncation
                    .index_of(into)
                    .ok_or_else(|| MeasureError::Malformed(format!("node {into} not in truncation")))?;
                gamma[k].push(*point);
                gamma[k].sort_unstable();
            }
            Mutation::EmptyRoot => gamma[0].clear(),
        }
        Ok(GammaLabeling {
            truncation: gl.truncation.clone(),
            gamma,
            structure: ms.with_measures(triples, mitchell)?,
        })
    }
}

fn pick_mutation(gl: &GammaLabeling, kind: usize, rng: &mut ChaCha8Rng) -> Option<Mutation> {
    let ms = &gl.structure;
    let tr = &gl.truncation;
    let nodes_of = gl.nodes_of_points();
    match kind {
        0 => {
            let labeled: Vec<usize> = (0..ms.measures().len()).filter(|&u| ms.measure(u).label.is_some()).collect();
            let &u = labeled.choose(rng)?;
            let m = ms.measure(u);
            let t = tr.index_of(m.label.as_ref()?)?;
            let targets: Vec<usize> = (0..m.owner).filter(|p| !gl.gamma[t].contains(p)).collect();
            let &to = targets.choose(rng)?;
            Some(Mutation::RedirectSeed { measure: u, to })
        }
        1 => {
            if ms.measures().is_empty() {
                return None;
            }
            Some(Mutation::DropMeasure { measure: rng.gen_range(0..ms.measures().len()) })
        }
        2 => {
            let desc = descendants(tr);
            let mut options = Vec::new();
            for (k, block) in gl.gamma.iter().enumerate() {
                if desc[k].is_empty() {
                    continue;
                }
                for &alpha in block {
                    for seed in 0..alpha {
                        if !nodes_of[seed].iter().any(|j| desc[k].binary_search(j).is_ok()) {
                            options.push((alpha, seed));
                        }
                    }
                }
            }
            let &(owner, seed) = options.choose(rng)?;
            Some(Mutation::StrayMeasure { owner, seed })
        }
        3 => {
            if tr.len() < 2 {
                return None;
            }
            let point = rng.gen_range(0..ms.len());
            let here = nodes_of[point].first().copied()?;
            let others: Vec<usize> = (0..tr.len()).filter(|&k| k != here).collect();
            let &k = others.choose(rng)?;
            Some(Mutation::DuplicatePoint { point, into: tr.node(k).clone() })
        }
        _ => Some(Mutation::EmptyRoot),
    }
}

/// `count` reproducible single-edit mutants of labelings with
/// `1 ≤ n ≤ 3`, `b, m ≤ 3`, cycling through the mutation kinds.
pub fn seeded_mutants(count: usize, seed: u64) -> Result<Vec<(Mutation, GammaLabeling)>, MeasureError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut kind = 0usize;
    while out.len() < count {
        let n = rng.gen_range(1..=3);
        let b = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=3);
        let gl = build_gamma_structure(n, b, m, DEFAULT_GAMMA_GUARD)?;
        if let Some(mutation) = pick_mutation(&gl, kind % 5, &mut rng) {
            let mutant = mutation.apply(&gl)?;
            out.push((mutation, mutant));
            kind += 1;
        }
    }
    Ok(out)
}
