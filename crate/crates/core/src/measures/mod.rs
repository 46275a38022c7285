//! Finite surrogate measure structures.
//!
//! Points are `0..len`, ordered by id. Every measure sits on an owner point
//! and is principal, generated by a single seed point strictly below the
//! owner: a set belongs to it iff it contains the seed. The intersection
//! filter `M_α` therefore contains exactly the supersets of the seed set of
//! `α`, and a set is positive at `α` iff it meets that seed set. A point
//! without measures carries the improper filter.

mod gamma;
mod reduce;
mod semantics;
mod sigma;

pub use gamma::{
    build_gamma_structure, dagger_violations, seeded_mutants, validate_dagger, DaggerViolation, GammaLabeling, Mutation,
    DEFAULT_GAMMA_GUARD,
};
pub use reduce::{reduce_countermodel, reduce_pipeline, ReduceError, Reduction};
pub use semantics::{
    derivative_rank, derivative_ranks, filter_model_check, filter_model_check_dual, icard_sets,
    soundness_invariant, soundness_witness, tau_m_derivative,
};
pub use sigma::{
    extract_descending_chain, sigma_fragment, sigma_satisfiable_at, SigmaEngine, SigmaError, SigmaOutcome,
    DEFAULT_SIGMA_GUARD,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kripke::KnNode;

/// Assignment of point sets to variables.
pub type FilterValuation = BTreeMap<u32, BTreeSet<usize>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("point {0} does not exist")]
    UnknownPoint(usize),
    #[error("measure {0} does not exist")]
    UnknownMeasure(usize),
    #[error("measure {id} has seed {seed} not below its owner {owner}")]
    SeedNotBelow { id: usize, owner: usize, seed: usize },
    #[error("mitchell pair ({0}, {1}) relates measures on different points")]
    CrossOwner(usize, usize),
    #[error("mitchell order is not well-founded: measure {0} lies on a cycle")]
    IllFounded(usize),
    #[error("measure ids must be 0..{0} without gaps")]
    MeasureIds(usize),
    #[error("points must be listed as 0..{0} in increasing order")]
    PointList(usize),
    #[error("structure would have {points} points and {measures} measures, guard is {guard}")]
    GuardExceeded { points: u128, measures: u128, guard: usize },
    #[error("bad bounds: need -1 <= zeta < xi, got zeta={zeta}, xi={xi}")]
    BadBounds { zeta: i64, xi: u64 },
    #[error("malformed structure: {0}")]
    Malformed(String),
}

/// A strict order given by generating pairs; ranks are computed by
/// well-founded recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WellFoundedOrder {
    pub elements: usize,
    /// `(lesser, greater)` pairs.
    pub less: BTreeSet<(usize, usize)>,
}

impl WellFoundedOrder {
    /// `rank(x) = sup{rank(y)+1 : y < x}`; errors on a cycle.
    pub fn ranks(&self) -> Result<Vec<usize>, usize> {
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.elements];
        for &(a, b) in &self.less {
            if a == b {
                return Err(a);
            }
            below[b].push(a);
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.elements];
        let mut rank = vec![0usize; self.elements];
        for start in 0..self.elements {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some(&mut (x, ref mut next)) = stack.last_mut() {
                if *next < below[x].len() {
                    let y = below[x][*next];
                    *next += 1;
                    match state[y] {
                        0 => {
                            state[y] = 1;
                            stack.push((y, 0));
                        }
                        1 => return Err(y),
                        _ => {}
                    }
                } else {
                    rank[x] = below[x].iter().map(|&y| rank[y] + 1).max().unwrap_or(0);
                    state[x] = 2;
                    stack.pop();
                }
            }
        }
        Ok(rank)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Measure {
    pub id: usize,
    pub owner: usize,
    pub seed: usize,
    pub label: Option<KnNode>,
}

/// Points `0..len` with principal measures and a declared Mitchell order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureStructure {
    len: usize,
    measures: Vec<Measure>,
    by_owner: Vec<Vec<usize>>,
    seeds: Vec<Vec<usize>>,
    mitchell: BTreeSet<(usize, usize)>,
    lesser: Vec<Vec<usize>>,
    measure_rank: Vec<usize>,
    point_rank: Vec<usize>,
}

impl MeasureStructure {
    /// Validates seeds, ownership of Mitchell pairs, and well-foundedness.
    /// Measure ids are reassigned to positions in `measures`.
    pub fn new(
        len: usize,
        measures: Vec<(usize, usize, Option<KnNode>)>,
        mitchell: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, MeasureError> {
        let mut by_owner = vec![Vec::new(); len];
        let mut seeds = vec![Vec::new(); len];
        let mut out = Vec::with_capacity(measures.len());
        for (id, (owner, seed, label)) in measures.into_iter().enumerate() {
            if owner >= len {
                return Err(MeasureError::UnknownPoint(owner));
            }
            if seed >= owner {
                return Err(MeasureError::SeedNotBelow { id, owner, seed });
            }
            by_owner[owner].push(id);
            seeds[owner].push(seed);
            out.push(Measure { id, owner, seed, label });
        }
        for s in &mut seeds {
            s.sort_unstable();
            s.dedup();
        }
        let mitchell: BTreeSet<(usize, usize)> = mitchell.into_iter().collect();
        for &(a, b) in &mitchell {
            if a >= out.len() {
                return Err(MeasureError::UnknownMeasure(a));
            }
            if b >= out.len() {
                return Err(MeasureError::UnknownMeasure(b));
            }
            if out[a].owner != out[b].owner {
                return Err(MeasureError::CrossOwner(a, b));
            }
        }
        let order = WellFoundedOrder { elements: out.len(), less: mitchell.clone() };
        let measure_rank = order.ranks().map_err(MeasureError::IllFounded)?;
        let point_rank = by_owner
            .iter()
            .map(|ms| ms.iter().map(|&u| measure_rank[u] + 1).max().unwrap_or(0))
            .collect();
        let mut lesser = vec![Vec::new(); out.len()];
        for &(a, b) in &mitchell {
            lesser[b].push(a);
        }
        Ok(MeasureStructure { len, measures: out, by_owner, seeds, mitchell, lesser, measure_rank, point_rank })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn measures(&self) -> &[Measure] {
        &self.measures
    }

    pub fn measure(&self, id: usize) -> &Measure {
        &self.measures[id]
    }

    pub fn measures_at(&self, p: usize) -> &[usize] {
        &self.by_owner[p]
    }

    /// Sorted, deduplicated seeds of the measures at `p`.
    pub fn seeds(&self, p: usize) -> &[usize] {
        &self.seeds[p]
    }

    pub fn mitchell(&self) -> &BTreeSet<(usize, usize)> {
        &self.mitchell
    }

    /// `o(U)`: rank of a measure in the Mitchell order.
    pub fn measure_rank(&self, id: usize) -> usize {
        self.measure_rank[id]
    }

    /// `o(p) = sup{o(U)+1 : U on p}`, and 0 on measure-free points.
    pub fn mitchell_rank(&self, p: usize) -> Result<usize, MeasureError> {
        self.point_rank.get(p).copied().ok_or(MeasureError::UnknownPoint(p))
    }

    /// Whether `a ⊲ b` in the transitive closure of the declared order.
    pub fn mitchell_below(&self, a: usize, b: usize) -> bool {
        let mut stack = vec![b];
        let mut seen = BTreeSet::new();
        while let Some(x) = stack.pop() {
            for &lo in &self.lesser[x] {
                if lo == a {
                    return true;
                }
                if seen.insert(lo) {
                    stack.push(lo);
                }
            }
        }
        false
    }

    /// A copy with the measure list and Mitchell pairs replaced.
    pub fn with_measures(
        &self,
        measures: Vec<(usize, usize, Option<KnNode>)>,
        mitchell: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, MeasureError> {
        MeasureStructure::new(self.len, measures, mitchell)
    }

    pub fn measure_triples(&self) -> Vec<(usize, usize, Option<KnNode>)> {
        self.measures.iter().map(|m| (m.owner, m.seed, m.label.clone())).collect()
    }

    pub fn to_doc(&self, gamma: Option<BTreeMap<String, Vec<usize>>>, shape: Option<(u32, u32)>) -> StructureDoc {
        let mut measures = BTreeMap::new();
        for p in 0..self.len {
            let list: Vec<MeasureDoc> = self.by_owner[p]
                .iter()
                .map(|&u| MeasureDoc {
                    id: u,
                    seed: self.measures[u].seed,
                    label: self.measures[u].label.as_ref().map(ToString::to_string),
                })
                .collect();
            if !list.is_empty() {
                measures.insert(p.to_string(), list);
            }
        }
        StructureDoc {
            points: (0..self.len).collect(),
            measures,
            mitchell: self.mitchell.iter().map(|&(a, b)| [a, b]).collect(),
            gamma,
            n: shape.map(|s| s.0),
            b: shape.map(|s| s.1),
        }
    }

    pub fn from_doc(doc: &StructureDoc) -> Result<Self, MeasureError> {
        let len = doc.points.len();
        if doc.points.iter().enumerate().any(|(k, &p)| k != p) {
            return Err(MeasureError::PointList(len));
        }
        let mut entries: Vec<(usize, usize, usize, Option<KnNode>)> = Vec::new();
        for (owner, list) in &doc.measures {
            let owner: usize = owner
                .parse()
                .map_err(|_| MeasureError::Malformed(format!("point key {owner:?}")))?;
            for m in list {
                let label = match &m.label {
                    Some(s) => Some(s.parse().map_err(|_| MeasureError::Malformed(format!("label {s:?}")))?),
                    None => None,
                };
                entries.push((m.id, owner, m.seed, label));
            }
        }
        entries.sort_by_key(|e| e.0);
        if entries.iter().enumerate().any(|(k, e)| e.0 != k) {
            return Err(MeasureError::MeasureIds(entries.len()));
        }
        MeasureStructure::new(
            len,
            entries.into_iter().map(|(_, o, s, l)| (o, s, l)).collect(),
            doc.mitchell.iter().map(|p| (p[0], p[1])),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub id: usize,
    pub seed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// On-disk shape of a measure structure, optionally with a Γ-labeling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureDoc {
    pub points: Vec<usize>,
    pub measures: BTreeMap<String, Vec<MeasureDoc>>,
    pub mitchell: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<BTreeMap<String, Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_follow_declared_order() {
        // Point 3 has three measures with 0 ⊲ 1 ⊲ 2.
        let ms = MeasureStructure::new(4, vec![(3, 0, None), (3, 1, None), (3, 2, None)], [(0, 1), (1, 2)]).unwrap();
        assert_eq!(ms.mitchell_rank(3), Ok(3));
        assert_eq!(ms.mitchell_rank(0), Ok(0));
        assert!(ms.mitchell_below(0, 2));
        assert!(!ms.mitchell_below(2, 0));
        assert_eq!(ms.seeds(3), &[0, 1, 2]);
    }

    #[test]
    fn rejects_bad_structures() {
        assert!(matches!(
            MeasureStructure::new(2, vec![(0, 1, None)], []),
            Err(MeasureError::SeedNotBelow { .. })
        ));
        assert!(matches!(
            MeasureStructure::new(3, vec![(1, 0, None), (2, 0, None)], [(0, 1)]),
            Err(MeasureError::CrossOwner(0, 1))
        ));
        assert!(matches!(
            MeasureStructure::new(3, vec![(2, 0, None), (2, 1, None)], [(0, 1), (1, 0)]),
            Err(MeasureError::IllFounded(_))
        ));
    }

    #[test]
    fn well_founded_ranks() {
        let order = WellFoundedOrder { elements: 4, less: [(0, 1), (1, 3), (2, 3)].into() };
        assert_eq!(order.ranks(), Ok(vec![0, 1, 0, 2]));
    }

    #[test]
    fn doc_round_trip() {
        let ms = MeasureStructure::new(3, vec![(2, 0, Some(KnNode(vec![(0, 0)]))), (2, 1, None)], [(0, 1)]).unwrap();
        let doc = ms.to_doc(None, None);
        let json = serde_json::to_string(&doc).unwrap();
        let back: StructureDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(MeasureStructure::from_doc(&back).unwrap(), ms);
    }
}
