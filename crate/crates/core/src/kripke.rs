//! Finite Kripke frames and models, the truncated `K_n` trees, and bounded
//! morphisms between them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;

/// Default cap on the number of nodes a `K_n` truncation may have.
pub const DEFAULT_KN_GUARD: usize = 200_000;
/// Default cap on `worlds * vars` for brute-force frame validity.
pub const DEFAULT_VALIDITY_BITS: usize = 20;
/// `enumerate_trees` refuses to go beyond this many worlds.
pub const MAX_ENUMERATED_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KripkeError {
    #[error("relation mentions world {0} outside the frame")]
    UnknownWorld(usize),
    #[error("world ids must be exactly 0..{0}")]
    NotDense(usize),
    #[error("search space of {bits} bits exceeds the guard of {guard}")]
    GuardExceeded { bits: usize, guard: usize },
    #[error("K_{n} truncation with branch bound {b} would have {nodes} nodes, guard is {guard}")]
    TruncationTooLarge { n: u32, b: u32, nodes: u128, guard: usize },
    #[error("branch bound must be at least 1")]
    ZeroBranch,
    #[error("enumerate_trees supports at most {MAX_ENUMERATED_NODES} worlds, got {0}")]
    LimitExceeded(usize),
    #[error("target frame is not a transitive irreflexive tree")]
    NotATree,
    #[error("target has height {height} but K_{n} only maps onto trees of height exactly {n}")]
    HeightMismatch { n: u32, height: usize },
    #[error("malformed node label {0:?}")]
    BadNode(String),
    #[error("map is not total: source has {source_worlds} worlds, map has {map_len} entries")]
    PartialMap { source_worlds: usize, map_len: usize },
}

/// A finite frame over worlds `0..len`, stored as sorted successor lists.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct KripkeFrame {
    succ: Vec<Vec<usize>>,
}

impl KripkeFrame {
    pub fn new(worlds: usize, relation: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, KripkeError> {
        let mut succ = vec![Vec::new(); worlds];
        for (a, b) in relation {
            if a >= worlds {
                return Err(KripkeError::UnknownWorld(a));
            }
            if b >= worlds {
                return Err(KripkeError::UnknownWorld(b));
            }
            succ[a].push(b);
        }
        for s in &mut succ {
            s.sort_unstable();
            s.dedup();
        }
        Ok(KripkeFrame { succ })
    }

    pub fn single_point() -> Self {
        KripkeFrame { succ: vec![Vec::new()] }
    }

    /// The transitive chain `0 R 1 R … R len-1`.
    pub fn chain(len: usize) -> Self {
        let succ = (0..len).map(|a| (a + 1..len).collect()).collect();
        KripkeFrame { succ }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn successors(&self, w: usize) -> &[usize] {
        &self.succ[w]
    }

    pub fn relates(&self, a: usize, b: usize) -> bool {
        self.succ[a].binary_search(&b).is_ok()
    }

    pub fn relation(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(a, s)| s.iter().map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn is_transitive(&self) -> bool {
        self.relation()
            .all(|(a, b)| self.succ[b].iter().all(|&c| self.relates(a, c)))
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.len()).all(|w| !self.relates(w, w))
    }

    fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Worlds ordered so every edge goes forward, if the relation is acyclic.
    fn topological_order(&self) -> Option<Vec<usize>> {
        let mut indeg = vec![0usize; self.len()];
        for (_, b) in self.relation() {
            indeg[b] += 1;
        }
        let mut stack: Vec<usize> = (0..self.len()).rev().filter(|&w| indeg[w] == 0).collect();
        let mut order = Vec::with_capacity(self.len());
        while let Some(w) = stack.pop() {
            order.push(w);
            for &v in self.succ[w].iter().rev() {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    stack.push(v);
                }
            }
        }
        (order.len() == self.len()).then_some(order)
    }

    /// Immediate predecessors under the transitive reduction, for acyclic frames.
    fn reduction_parents(&self) -> Option<Vec<Vec<usize>>> {
        let order = self.topological_order()?;
        let mut reach: Vec<Vec<bool>> = vec![vec![false; self.len()]; self.len()];
        for &w in order.iter().rev() {
            for &v in &self.succ[w] {
                let below = reach[v].clone();
                let row = &mut reach[w];
                row[v] = true;
                for (x, r) in below.into_iter().enumerate() {
                    row[x] |= r;
                }
            }
        }
        let mut parents = vec![Vec::new(); self.len()];
        for (a, b) in self.relation() {
            let mediated = self.succ[a].iter().any(|&c| c != b && reach[c][b]);
            if !mediated {
                parents[b].push(a);
            }
        }
        Some(parents)
    }

    /// Unique root, and every other world has exactly one immediate
    /// predecessor under the transitive reduction.
    pub fn is_tree(&self) -> bool {
        if self.is_empty() || !self.is_acyclic() {
            return false;
        }
        let Some(parents) = self.reduction_parents() else {
            return false;
        };
        let roots = parents.iter().filter(|p| p.is_empty()).count();
        roots == 1 && parents.iter().all(|p| p.len() <= 1)
    }

    pub fn is_transitive_irreflexive_tree(&self) -> bool {
        self.is_transitive() && self.is_irreflexive() && self.is_tree()
    }

    /// The unique world without predecessors, when there is exactly one.
    pub fn root(&self) -> Option<usize> {
        let mut has_pred = vec![false; self.len()];
        for (_, b) in self.relation() {
            has_pred[b] = true;
        }
        let mut roots = (0..self.len()).filter(|&w| !has_pred[w]);
        let r = roots.next()?;
        roots.next().is_none().then_some(r)
    }

    /// Length of the longest `R`-path starting at each world, for acyclic frames.
    pub fn world_heights(&self) -> Option<Vec<usize>> {
        let order = self.topological_order()?;
        let mut h = vec![0usize; self.len()];
        for &w in order.iter().rev() {
            h[w] = self.succ[w].iter().map(|&v| h[v] + 1).max().unwrap_or(0);
        }
        Some(h)
    }

    /// Length of the longest `R`-path in the frame.
    pub fn height(&self) -> Option<usize> {
        self.world_heights().map(|h| h.into_iter().max().unwrap_or(0))
    }

    /// Relabel worlds: world `w` becomes `perm[w]`.
    pub fn relabel(&self, perm: &[usize]) -> KripkeFrame {
        let mut succ = vec![Vec::new(); self.len()];
        for (a, b) in self.relation() {
            succ[perm[a]].push(perm[b]);
        }
        for s in &mut succ {
            s.sort_unstable();
        }
        KripkeFrame { succ }
    }
}

/// A frame plus a valuation of propositional variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    pub frame: KripkeFrame,
    pub valuation: BTreeMap<u32, BTreeSet<usize>>,
}

impl KripkeModel {
    pub fn new(frame: KripkeFrame, valuation: BTreeMap<u32, BTreeSet<usize>>) -> Result<Self, KripkeError> {
        for set in valuation.values() {
            if let Some(&w) = set.iter().find(|&&w| w >= frame.len()) {
                return Err(KripkeError::UnknownWorld(w));
            }
        }
        Ok(KripkeModel { frame, valuation })
    }

    pub fn holds_var(&self, var: u32, w: usize) -> bool {
        self.valuation.get(&var).is_some_and(|s| s.contains(&w))
    }

    pub fn to_doc(&self) -> ModelDoc {
        ModelDoc {
            worlds: (0..self.frame.len()).collect(),
            relation: self.frame.relation().map(|(a, b)| [a, b]).collect(),
            valuation: self
                .valuation
                .iter()
                .map(|(k, v)| (k.to_string(), v.iter().copied().collect()))
                .collect(),
        }
    }

    pub fn from_doc(doc: &ModelDoc) -> Result<Self, KripkeError> {
        let mut sorted = doc.worlds.clone();
        sorted.sort_unstable();
        if sorted.iter().enumerate().any(|(i, &w)| i != w) {
            return Err(KripkeError::NotDense(doc.worlds.len()));
        }
        let frame = KripkeFrame::new(doc.worlds.len(), doc.relation.iter().map(|p| (p[0], p[1])))?;
        let mut valuation = BTreeMap::new();
        for (k, ws) in &doc.valuation {
            let var = k
                .trim_start_matches('p')
                .parse::<u32>()
                .map_err(|_| KripkeError::BadNode(k.clone()))?;
            valuation.insert(var, ws.iter().copied().collect());
        }
        KripkeModel::new(frame, valuation)
    }
}

/// On-disk shape of a frame or model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub worlds: Vec<usize>,
    pub relation: Vec<[usize; 2]>,
    #[serde(default)]
    pub valuation: BTreeMap<String, Vec<usize>>,
}

/// Truth sets of `f` as a per-world boolean vector.
pub fn eval_mask(m: &KripkeModel, f: &Formula) -> Vec<bool> {
    let n = m.frame.len();
    match f {
        Formula::Var(i) => (0..n).map(|w| m.holds_var(*i, w)).collect(),
        Formula::Bot => vec![false; n],
        Formula::Top => vec![true; n],
        Formula::Neg(a) => eval_mask(m, a).into_iter().map(|x| !x).collect(),
        Formula::And(a, b) => zip_with(eval_mask(m, a), eval_mask(m, b), |x, y| x && y),
        Formula::Or(a, b) => zip_with(eval_mask(m, a), eval_mask(m, b), |x, y| x || y),
        Formula::Imp(a, b) => zip_with(eval_mask(m, a), eval_mask(m, b), |x, y| !x || y),
        Formula::Box(a) => {
            let inner = eval_mask(m, a);
            (0..n)
                .map(|w| m.frame.successors(w).iter().all(|&v| inner[v]))
                .collect()
        }
        Formula::Dia(a) => {
            let inner = eval_mask(m, a);
            (0..n)
                .map(|w| m.frame.successors(w).iter().any(|&v| inner[v]))
                .collect()
        }
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}

/// `ν(f)`: the worlds of `m` where `f` holds.
pub fn model_check(m: &KripkeModel, f: &Formula) -> BTreeSet<usize> {
    eval_mask(m, f)
        .into_iter()
        .enumerate()
        .filter_map(|(w, x)| x.then_some(w))
        .collect()
}

/// Pointwise recursive evaluation, independent of [`model_check`].
pub fn satisfies(m: &KripkeModel, w: usize, f: &Formula) -> bool {
    match f {
        Formula::Var(i) => m.holds_var(*i, w),
        Formula::Bot => false,
        Formula::Top => true,
        Formula::Neg(a) => !satisfies(m, w, a),
        Formula::And(a, b) => satisfies(m, w, a) && satisfies(m, w, b),
        Formula::Or(a, b) => satisfies(m, w, a) || satisfies(m, w, b),
        Formula::Imp(a, b) => !satisfies(m, w, a) || satisfies(m, w, b),
        Formula::Box(a) => m.frame.successors(w).iter().all(|&v| satisfies(m, v, a)),
        Formula::Dia(a) => m.frame.successors(w).iter().any(|&v| satisfies(m, v, a)),
    }
}

/// True iff `f` holds everywhere under every valuation of its variables.
pub fn frame_validity(frame: &KripkeFrame, f: &Formula, guard_bits: usize) -> Result<bool, KripkeError> {
    let vars: Vec<u32> = f.vars().into_iter().collect();
    let n = frame.len();
    let bits = n * vars.len();
    if bits > guard_bits || bits >= 64 {
        return Err(KripkeError::GuardExceeded { bits, guard: guard_bits });
    }
    for code in 0u64..(1u64 << bits) {
        let valuation = vars
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let set = (0..n).filter(|w| code >> (k * n + w) & 1 == 1).collect();
                (v, set)
            })
            .collect();
        let m = KripkeModel { frame: frame.clone(), valuation };
        if eval_mask(&m, f).iter().any(|x| !x) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every transitive irreflexive tree with at most `max_nodes` worlds, up to
/// isomorphism, ordered by size. Worlds are numbered in preorder from the root.
pub fn enumerate_trees(max_nodes: usize) -> Result<Vec<KripkeFrame>, KripkeError> {
    if max_nodes > MAX_ENUMERATED_NODES {
        return Err(KripkeError::LimitExceeded(max_nodes));
    }
    // shapes[id] = child ids (non-increasing); ids are grouped by size.
    let mut shapes: Vec<Vec<usize>> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for size in 1..=max_nodes {
        let mut found = Vec::new();
        let mut current = Vec::new();
        child_multisets(&sizes, size - 1, usize::MAX, &mut current, &mut found);
        for children in found {
            shapes.push(children);
            sizes.push(size);
        }
    }
    Ok((0..shapes.len()).map(|id| shape_to_frame(&shapes, id)).collect())
}

fn child_multisets(
    sizes: &[usize],
    remaining: usize,
    max_id: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    let upper = max_id.min(sizes.len().saturating_sub(1));
    if sizes.is_empty() {
        return;
    }
    for id in (0..=upper).rev() {
        if sizes[id] <= remaining {
            current.push(id);
            child_multisets(sizes, remaining - sizes[id], id, current, out);
            current.pop();
        }
    }
}

fn shape_to_frame(shapes: &[Vec<usize>], id: usize) -> KripkeFrame {
    let mut parent: Vec<Option<usize>> = Vec::new();
    fn walk(shapes: &[Vec<usize>], id: usize, par: Option<usize>, parent: &mut Vec<Option<usize>>) {
        let me = parent.len();
        parent.push(par);
        for &c in &shapes[id] {
            walk(shapes, c, Some(me), parent);
        }
    }
    walk(shapes, id, None, &mut parent);
    let mut relation = Vec::new();
    for w in 0..parent.len() {
        let mut a = parent[w];
        while let Some(p) = a {
            relation.push((p, w));
            a = parent[p];
        }
    }
    KripkeFrame::new(parent.len(), relation).expect("preorder ids are in range")
}

/// A node of `K_n`: a label sequence `⟨(i₁,j₁),…,(i_k,j_k)⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct KnNode(pub Vec<(u32, u32)>);

impl KnNode {
    pub fn root() -> Self {
        KnNode(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Height inside `K_n`: the last `i`, or `n` at the root.
    pub fn height(&self, n: u32) -> u32 {
        self.0.last().map_or(n, |&(i, _)| i)
    }

    pub fn child(&self, i: u32, j: u32) -> KnNode {
        let mut labels = self.0.clone();
        labels.push((i, j));
        KnNode(labels)
    }

    pub fn parent(&self) -> Option<KnNode> {
        (!self.0.is_empty()).then(|| KnNode(self.0[..self.0.len() - 1].to_vec()))
    }

    /// `self ⊲ other`: `other` strictly end-extends `self`.
    pub fn strictly_below(&self, other: &KnNode) -> bool {
        other.0.len() > self.0.len() && other.0.starts_with(&self.0)
    }

    pub fn is_admissible(&self, n: u32) -> bool {
        let mut bound = n;
        for &(i, _) in &self.0 {
            if i >= bound {
                return false;
            }
            bound = i;
        }
        true
    }
}

impl fmt::Display for KnNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (k, (i, j)) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "({i},{j})")?;
        }
        write!(f, ">")
    }
}

impl FromStr for KnNode {
    type Err = KripkeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || KripkeError::BadNode(s.to_string());
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = compact
            .strip_prefix('<')
            .and_then(|r| r.strip_suffix('>'))
            .ok_or_else(bad)?;
        if inner.is_empty() {
            return Ok(KnNode::root());
        }
        let inner = inner
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let mut labels = Vec::new();
        for pair in inner.split("),(") {
            let (i, j) = pair.split_once(',').ok_or_else(bad)?;
            labels.push((i.parse().map_err(|_| bad())?, j.parse().map_err(|_| bad())?));
        }
        Ok(KnNode(labels))
    }
}

impl Serialize for KnNode {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for KnNode {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `K_n` cut down to branch bound `b`: every admissible node with all `j < b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnTruncation {
    pub n: u32,
    pub b: u32,
    nodes: Vec<KnNode>,
    index: HashMap<KnNode, usize>,
}

/// Number of nodes of `kn_truncate(n, b)`, namely `(1+b)^n`.
pub fn kn_size(n: u32, b: u32) -> u128 {
    (1u128 + b as u128).saturating_pow(n)
}

pub fn kn_truncate(n: u32, b: u32, guard: usize) -> Result<KnTruncation, KripkeError> {
    if b == 0 {
        return Err(KripkeError::ZeroBranch);
    }
    let nodes = kn_size(n, b);
    if nodes > guard as u128 {
        return Err(KripkeError::TruncationTooLarge { n, b, nodes, guard });
    }
    let mut out = vec![KnNode::root()];
    let mut frontier = vec![KnNode::root()];
    while let Some(s) = frontier.pop() {
        for i in 0..s.height(n) {
            for j in 0..b {
                let t = s.child(i, j);
                frontier.push(t.clone());
                out.push(t);
            }
        }
    }
    out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    let index = out.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect();
    Ok(KnTruncation { n, b, nodes: out, index })
}

impl KnTruncation {
    pub fn nodes(&self) -> &[KnNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, s: &KnNode) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn node(&self, k: usize) -> &KnNode {
        &self.nodes[k]
    }

    /// Immediate successors `s⌢(i,j)` present in the truncation.
    pub fn children(&self, s: &KnNode) -> Vec<KnNode> {
        let mut out = Vec::new();
        for i in 0..s.height(self.n) {
            for j in 0..self.b {
                out.push(s.child(i, j));
            }
        }
        out
    }

    /// Worlds are node indices; the relation is strict end-extension.
    pub fn as_frame(&self) -> KripkeFrame {
        let mut relation = Vec::new();
        for (k, t) in self.nodes.iter().enumerate() {
            for cut in 0..t.len() {
                let prefix = KnNode(t.0[..cut].to_vec());
                relation.push((self.index[&prefix], k));
            }
        }
        KripkeFrame::new(self.nodes.len(), relation).expect("node indices are in range")
    }
}

/// A world map between two frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedMorphism {
    pub source: KripkeFrame,
    pub target: KripkeFrame,
    pub map: Vec<usize>,
    /// The truncation the source frame was built from, when there is one.
    pub truncation: Option<KnTruncation>,
}

/// First failing condition of [`BoundedMorphism::check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum MorphismViolation {
    /// `s R t` in the source but `f(s) R f(t)` fails in the target.
    Forth { s: usize, t: usize },
    /// `f(s) R w` in the target but no source successor of `s` maps to `w`.
    Back { s: usize, w: usize },
    NotSurjective { w: usize },
    OutOfRange { s: usize },
}

impl fmt::Display for MorphismViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MorphismViolation::Forth { s, t } => write!(f, "forth fails for source pair ({s}, {t})"),
            MorphismViolation::Back { s, w } => write!(f, "back fails at source world {s} for target world {w}"),
            MorphismViolation::NotSurjective { w } => write!(f, "target world {w} is not in the image"),
            MorphismViolation::OutOfRange { s } => write!(f, "source world {s} maps outside the target"),
        }
    }
}

impl BoundedMorphism {
    pub fn new(source: KripkeFrame, target: KripkeFrame, map: Vec<usize>) -> Result<Self, KripkeError> {
        if map.len() != source.len() {
            return Err(KripkeError::PartialMap { source_worlds: source.len(), map_len: map.len() });
        }
        Ok(BoundedMorphism { source, target, map, truncation: None })
    }

    pub fn identity(frame: &KripkeFrame) -> Self {
        BoundedMorphism {
            source: frame.clone(),
            target: frame.clone(),
            map: (0..frame.len()).collect(),
            truncation: None,
        }
    }

    /// Checks forth, then back, then surjectivity.
    pub fn check(&self) -> Result<(), MorphismViolation> {
        if let Some(s) = self.map.iter().position(|&w| w >= self.target.len()) {
            return Err(MorphismViolation::OutOfRange { s });
        }
        for (s, t) in self.source.relation() {
            if !self.target.relates(self.map[s], self.map[t]) {
                return Err(MorphismViolation::Forth { s, t });
            }
        }
        let mut seen = vec![false; self.target.len()];
        for s in 0..self.source.len() {
            seen.iter_mut().for_each(|x| *x = false);
            for &t in self.source.successors(s) {
                seen[self.map[t]] = true;
            }
            if let Some(&w) = self.target.successors(self.map[s]).iter().find(|&&w| !seen[w]) {
                return Err(MorphismViolation::Back { s, w });
            }
        }
        let mut hit = vec![false; self.target.len()];
        for &w in &self.map {
            hit[w] = true;
        }
        match hit.iter().position(|&x| !x) {
            Some(w) => Err(MorphismViolation::NotSurjective { w }),
            None => Ok(()),
        }
    }
}

/// Smallest branch bound that lets `K_n` cover `target`: the largest number
/// of successors of one world sharing one height.
pub fn required_branch(target: &KripkeFrame) -> u32 {
    let heights = target.world_heights().unwrap_or_default();
    let mut best = 1;
    for w in 0..target.len() {
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for &v in target.successors(w) {
            *counts.entry(heights[v]).or_default() += 1;
        }
        best = best.max(counts.values().copied().max().unwrap_or(1));
    }
    best
}

/// Maps a truncation of `K_n` onto `target`. The root goes to the root, and
/// the child `s⌢(i,j)` of a node mapped to `w` goes to the `j`-th (cyclically)
/// successor of `w` whose height is exactly `i`.
pub fn build_bounded_morphism(n: u32, target: &KripkeFrame, guard: usize) -> Result<BoundedMorphism, KripkeError> {
    if !target.is_transitive_irreflexive_tree() {
        return Err(KripkeError::NotATree);
    }
    let heights = target.world_heights().ok_or(KripkeError::NotATree)?;
    let root = target.root().ok_or(KripkeError::NotATree)?;
    if heights[root] != n as usize {
        return Err(KripkeError::HeightMismatch { n, height: heights[root] });
    }
    let b = required_branch(target);
    let truncation = kn_truncate(n, b, guard)?;
    let mut map = vec![0usize; truncation.len()];
    map[0] = root;
    for k in 1..truncation.len() {
        let s = truncation.node(k);
        let (i, j) = *s.0.last().expect("non-root");
        let parent = truncation.index_of(&s.parent().expect("non-root")).expect("prefix-closed");
        let w = map[parent];
        let options: Vec<usize> = target
            .successors(w)
            .iter()
            .copied()
            .filter(|&v| heights[v] == i as usize)
            .collect();
        map[k] = options[j as usize % options.len()];
    }
    Ok(BoundedMorphism {
        source: truncation.as_frame(),
        target: target.clone(),
        map,
        truncation: Some(truncation),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn model(frame: KripkeFrame, val: &[(u32, &[usize])]) -> KripkeModel {
        let valuation = val.iter().map(|(k, ws)| (*k, ws.iter().copied().collect())).collect();
        KripkeModel::new(frame, valuation).unwrap()
    }

    #[test]
    fn model_check_examples() {
        let point = model(KripkeFrame::single_point(), &[]);
        assert_eq!(model_check(&point, &parse("[]#").unwrap()), BTreeSet::from([0]));
        let chain = model(KripkeFrame::chain(2), &[]);
        assert_eq!(model_check(&chain, &parse("<>[]#").unwrap()), BTreeSet::from([0]));
    }

    #[test]
    fn frame_flags() {
        let chain = KripkeFrame::chain(3);
        assert!(chain.is_transitive_irreflexive_tree());
        assert_eq!(chain.height(), Some(2));
        let loopy = KripkeFrame::new(1, [(0, 0)]).unwrap();
        assert!(!loopy.is_irreflexive());
        assert!(!loopy.is_tree());
        let non_trans = KripkeFrame::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(!non_trans.is_transitive());
        assert!(non_trans.is_tree());
        let diamond = KripkeFrame::new(4, [(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)]).unwrap();
        assert!(!diamond.is_tree());
        let forest = KripkeFrame::new(2, []).unwrap();
        assert!(!forest.is_tree());
    }

    #[test]
    fn enumerate_tree_counts() {
        let counts: Vec<usize> = (1..=8).map(|k| enumerate_trees(k).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 2, 4, 8, 17, 37, 85, 200]);
        let three = enumerate_trees(3).unwrap();
        assert!(three.iter().all(|f| f.is_transitive_irreflexive_tree()));
        assert!(enumerate_trees(9).is_err());
    }

    #[test]
    fn validity_examples() {
        let lob = Formula::lob(Formula::Var(0));
        assert!(frame_validity(&KripkeFrame::single_point(), &parse("[]#").unwrap(), 20).unwrap());
        let reflexive = KripkeFrame::new(1, [(0, 0)]).unwrap();
        assert!(!frame_validity(&reflexive, &lob, 20).unwrap());
        assert!(frame_validity(&KripkeFrame::chain(2), &parse("[]p0 -> [][]p0").unwrap(), 20).unwrap());
        let big = KripkeFrame::chain(11);
        assert!(matches!(
            frame_validity(&big, &parse("p0 & p1").unwrap(), 20),
            Err(KripkeError::GuardExceeded { .. })
        ));
    }

    #[test]
    fn truncation_examples() {
        assert_eq!(kn_truncate(1, 3, 100).unwrap().len(), 4);
        assert_eq!(kn_truncate(0, 5, 100).unwrap().len(), 1);
        let t = kn_truncate(2, 2, 100).unwrap();
        assert_eq!(t.len(), 9);
        let f = t.as_frame();
        assert!(f.is_transitive_irreflexive_tree());
        assert_eq!(f.height(), Some(2));
        assert_eq!(kn_truncate(1, 1, 10).unwrap().as_frame(), KripkeFrame::chain(2));
        assert!(kn_truncate(10, 9, 1000).is_err());
    }

    #[test]
    fn node_strings_round_trip() {
        let s = KnNode(vec![(1, 0), (0, 1)]);
        assert_eq!(s.to_string(), "<(1,0),(0,1)>");
        assert_eq!("<(1,0),(0,1)>".parse::<KnNode>().unwrap(), s);
        assert_eq!("<>".parse::<KnNode>().unwrap(), KnNode::root());
        assert!("<(1,0)".parse::<KnNode>().is_err());
    }

    #[test]
    fn morphism_examples() {
        let chain = KripkeFrame::chain(2);
        assert_eq!(BoundedMorphism::identity(&chain).check(), Ok(()));
        let constant = BoundedMorphism::new(chain.clone(), KripkeFrame::single_point(), vec![0, 0]).unwrap();
        assert_eq!(constant.check(), Err(MorphismViolation::Forth { s: 0, t: 1 }));
        let bm = build_bounded_morphism(1, &chain, 100).unwrap();
        assert_eq!(bm.check(), Ok(()));
        let cherry = KripkeFrame::new(3, [(0, 1), (0, 2)]).unwrap();
        let bm = build_bounded_morphism(1, &cherry, 100).unwrap();
        assert!(bm.truncation.as_ref().unwrap().b >= 2);
        assert_eq!(bm.check(), Ok(()));
        let bm = build_bounded_morphism(0, &KripkeFrame::single_point(), 100).unwrap();
        assert_eq!(bm.check(), Ok(()));
    }

    #[test]
    fn morphism_height_must_match() {
        assert_eq!(
            build_bounded_morphism(2, &KripkeFrame::chain(2), 100),
            Err(KripkeError::HeightMismatch { n: 2, height: 1 })
        );
        assert_eq!(
            build_bounded_morphism(1, &KripkeFrame::single_point(), 100),
            Err(KripkeError::HeightMismatch { n: 1, height: 0 })
        );
        let bm = build_bounded_morphism(2, &KripkeFrame::chain(3), 100).unwrap();
        assert_eq!(bm.source.len(), 4);
        assert_eq!(bm.check(), Ok(()));
    }

    #[test]
    fn doc_round_trip() {
        let m = model(KripkeFrame::chain(3), &[(0, &[1, 2]), (4, &[0])]);
        let json = serde_json::to_string(&m.to_doc()).unwrap();
        let back: ModelDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(KripkeModel::from_doc(&back).unwrap(), m);
    }
}
