//! Subsets of `[0, top]` for `top < ω^ω`, closed under the Boolean
//! operations, successor image and derivative.
//!
//! An ordinal `α ≤ top` is read as its coefficient vector
//! `(c_D, …, c_0)`, `D = deg(top)`. A set is a reduced decision diagram:
//! a branch at level `l` partitions the values of `c_l` into eventually
//! periodic [`NatSet`]s, each leading to a node over lower levels. Levels
//! that do not occur on a path are unconstrained. Diagrams are kept
//! canonical, so set equality is structural equality.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ordinals::natset::NatSet;
use crate::ordinals::ordinal::{Ordinal, OrdinalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SetError {
    #[error("sets live in different spaces: [0, {0}] and [0, {1}]")]
    SpaceMismatch(Ordinal, Ordinal),
    #[error("{0} lies outside the space [0, {1}]")]
    OutOfSpace(Ordinal, Ordinal),
    #[error("malformed set document: {0}")]
    Malformed(String),
    #[error(transparent)]
    Ordinal(#[from] OrdinalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) enum Node {
    Leaf(bool),
    /// Parts partition ℕ, have pairwise distinct children below `level`,
    /// and are sorted by least element.
    Branch(u32, Vec<(NatSet, Node)>),
}

pub(crate) const NO: Node = Node::Leaf(false);
pub(crate) const YES: Node = Node::Leaf(true);

impl Node {
    fn level(&self) -> Option<u32> {
        match self {
            Node::Leaf(_) => None,
            Node::Branch(l, _) => Some(*l),
        }
    }

    fn parts_at(&self, level: u32) -> Vec<(NatSet, Node)> {
        match self {
            Node::Branch(l, parts) if *l == level => parts.clone(),
            _ => vec![(NatSet::all(), self.clone())],
        }
    }

    fn is_empty(&self) -> bool {
        *self == NO
    }

    /// The node governing lower levels once `c_level = value`.
    pub(crate) fn slice(&self, level: u32, value: u64) -> Node {
        match self {
            Node::Branch(l, parts) if *l == level => {
                parts.iter().find(|p| p.0.contains(value)).expect("parts cover ℕ").1.clone()
            }
            _ => self.clone(),
        }
    }

    fn for_each_natset(&self, f: &mut impl FnMut(&NatSet)) {
        if let Node::Branch(_, parts) = self {
            for (s, c) in parts {
                f(s);
                c.for_each_natset(f);
            }
        }
    }
}

pub(crate) fn branch(level: u32, parts: Vec<(NatSet, Node)>) -> Node {
    let mut merged: Vec<(NatSet, Node)> = Vec::new();
    for (s, c) in parts {
        if s.is_empty() {
            continue;
        }
        match merged.iter_mut().find(|m| m.1 == c) {
            Some(m) => m.0 = m.0.union(&s),
            None => merged.push((s, c)),
        }
    }
    if merged.len() == 1 {
        return merged.pop().expect("one part").1;
    }
    assert!(!merged.is_empty(), "branch without parts");
    merged.sort_by_key(|p| p.0.least());
    Node::Branch(level, merged)
}

fn apply2(a: &Node, b: &Node, op: fn(bool, bool) -> bool) -> Node {
    if let (Node::Leaf(x), Node::Leaf(y)) = (a, b) {
        return Node::Leaf(op(*x, *y));
    }
    let level = a.level().max(b.level()).expect("one side branches");
    let pa = a.parts_at(level);
    let pb = b.parts_at(level);
    let mut out = Vec::with_capacity(pa.len() * pb.len());
    for (sa, ca) in &pa {
        for (sb, cb) in &pb {
            let s = sa.intersection(sb);
            if !s.is_empty() {
                out.push((s, apply2(ca, cb, op)));
            }
        }
    }
    branch(level, out)
}

pub(crate) fn and(a: &Node, b: &Node) -> Node {
    if a.is_empty() || b.is_empty() {
        return NO;
    }
    apply2(a, b, |x, y| x && y)
}

pub(crate) fn or(a: &Node, b: &Node) -> Node {
    if a.is_empty() {
        return b.clone();
    }
    if b.is_empty() {
        return a.clone();
    }
    apply2(a, b, |x, y| x || y)
}

pub(crate) fn not(a: &Node) -> Node {
    match a {
        Node::Leaf(x) => Node::Leaf(!x),
        Node::Branch(l, parts) => Node::Branch(*l, parts.iter().map(|(s, c)| (s.clone(), not(c))).collect()),
    }
}

/// `c_level ∈ s`.
pub(crate) fn coord(level: u32, s: &NatSet) -> Node {
    branch(level, vec![(s.clone(), YES), (s.complement(), NO)])
}

/// Every coordinate below `k` is zero.
pub(crate) fn zeros_below(k: u32) -> Node {
    let mut node = YES;
    for l in 0..k {
        node = branch(l, vec![(NatSet::singleton(0), node), (NatSet::at_least(1), NO)]);
    }
    node
}

/// `{α : α < x}` over levels `0..=deg`.
fn lt_node(x: &Ordinal, deg: u32) -> Node {
    if x.degree() > deg {
        return YES;
    }
    let mut node = NO;
    for l in 0..=deg {
        let c = x.coeff(l);
        node = branch(
            l,
            vec![(NatSet::range(0, c), YES), (NatSet::singleton(c), node), (NatSet::at_least(c + 1), NO)],
        );
    }
    node
}

/// `{α : lastexp(α) ≥ r}` over levels `0..=deg`.
fn rank_at_least(r: u32, deg: u32) -> Node {
    if r == 0 {
        return YES;
    }
    and(&not(&zeros_below(deg + 1)), &zeros_below(r.min(deg + 1)))
}

fn deriv(node: &Node, i: u32) -> Node {
    if i == 0 || node.is_empty() {
        return NO;
    }
    let mut inner = Vec::new();
    let mut unbounded = NatSet::empty();
    for (s, c) in node.parts_at(i) {
        if is_unbounded(&c, i - 1) {
            unbounded = unbounded.union(&s);
        }
        inner.push((s, deriv(&c, i - 1)));
    }
    let ends = unbounded.shift_up(1);
    let closing = branch(i, vec![(ends.clone(), zeros_below(i)), (ends.complement(), NO)]);
    or(&branch(i, inner), &closing)
}

/// Whether the vectors of `node` over levels `j..=0` are unbounded in `ω^(j+1)`,
/// i.e. take infinitely many values at level `j`.
fn is_unbounded(node: &Node, j: u32) -> bool {
    match node {
        Node::Leaf(b) => *b,
        Node::Branch(l, _) if *l < j => true,
        Node::Branch(_, parts) => parts
            .iter()
            .filter(|p| !p.1.is_empty())
            .fold(NatSet::empty(), |acc, p| acc.union(&p.0))
            .is_infinite(),
    }
}

fn succ_node(node: &Node) -> Node {
    match node {
        Node::Leaf(false) => NO,
        Node::Leaf(true) => coord(0, &NatSet::at_least(1)),
        Node::Branch(0, parts) => {
            let yes = parts
                .iter()
                .filter(|p| p.1 == YES)
                .fold(NatSet::empty(), |acc, p| acc.union(&p.0))
                .shift_up(1);
            coord(0, &yes)
        }
        Node::Branch(l, parts) => branch(*l, parts.iter().map(|(s, c)| (s.clone(), succ_node(c))).collect()),
    }
}

/// `{Δ + ε : ε ∈ p, ε > 0}` over levels `0..=top_level`, for `Δ < ω^(top_level+1)`.
pub(crate) fn translate(delta: &Ordinal, p: &Node, top_level: u32) -> Node {
    let mut p = p.clone();
    while let Some(l) = p.level().filter(|&l| l > top_level) {
        p = p.slice(l, 0);
    }
    let mut out = NO;
    for k in 0..=top_level {
        let mut n = p.clone();
        for l in (k + 1..=top_level).rev() {
            n = n.slice(l, 0);
        }
        let d = delta.coeff(k);
        let mut covered = NatSet::empty();
        let mut parts = Vec::new();
        for (s, c) in n.parts_at(k) {
            let moved = s.intersection(&NatSet::at_least(1)).shift_up(d);
            covered = covered.union(&moved);
            parts.push((moved, c));
        }
        parts.push((covered.complement(), NO));
        let mut comp = branch(k, parts);
        for l in k + 1..=top_level {
            let dl = NatSet::singleton(delta.coeff(l));
            comp = branch(l, vec![(dl.complement(), NO), (dl, comp)]);
        }
        out = or(&out, &comp);
    }
    out
}

/// A subset of the space `[0, top]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolicSet {
    top: Ordinal,
    root: Node,
}

impl SymbolicSet {
    pub(crate) fn from_node(top: &Ordinal, node: Node) -> Self {
        let space = lt_node(&top.succ(), top.degree());
        SymbolicSet { top: top.clone(), root: and(&node, &space) }
    }

    #[cfg(test)]
    pub(crate) fn node(&self) -> &Node {
        &self.root
    }

    pub fn empty(top: &Ordinal) -> Self {
        SymbolicSet { top: top.clone(), root: NO }
    }

    /// The whole space `[0, top]`.
    pub fn full(top: &Ordinal) -> Self {
        SymbolicSet::from_node(top, YES)
    }

    pub fn singleton(top: &Ordinal, alpha: &Ordinal) -> Self {
        SymbolicSet::interval(top, alpha, &alpha.succ())
    }

    /// `[lo, hi)` within the space.
    pub fn interval(top: &Ordinal, lo: &Ordinal, hi: &Ordinal) -> Self {
        let deg = top.degree();
        SymbolicSet::from_node(top, and(&lt_node(hi, deg), &not(&lt_node(lo, deg))))
    }

    /// `{α : lo ≤ lastexp(α) ≤ hi}` within the space.
    pub fn rank_window(top: &Ordinal, lo: u32, hi: u32) -> Self {
        let deg = top.degree();
        let node = and(&rank_at_least(lo, deg), &not(&rank_at_least(hi.saturating_add(1), deg)));
        SymbolicSet::from_node(top, node)
    }

    /// `{α : the coefficient of ω^level lies in s}` within the space.
    pub fn coefficient_in(top: &Ordinal, level: u32, s: &NatSet) -> Self {
        if level > top.degree() {
            let node = if s.contains(0) { YES } else { NO };
            return SymbolicSet::from_node(top, node);
        }
        SymbolicSet::from_node(top, coord(level, s))
    }

    pub fn top(&self) -> &Ordinal {
        &self.top
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_empty()
    }

    fn same_space(&self, other: &SymbolicSet) -> Result<(), SetError> {
        if self.top != other.top {
            return Err(SetError::SpaceMismatch(self.top.clone(), other.top.clone()));
        }
        Ok(())
    }

    pub fn union(&self, other: &SymbolicSet) -> Result<SymbolicSet, SetError> {
        self.same_space(other)?;
        Ok(SymbolicSet { top: self.top.clone(), root: or(&self.root, &other.root) })
    }

    pub fn intersection(&self, other: &SymbolicSet) -> Result<SymbolicSet, SetError> {
        self.same_space(other)?;
        Ok(SymbolicSet { top: self.top.clone(), root: and(&self.root, &other.root) })
    }

    pub fn difference(&self, other: &SymbolicSet) -> Result<SymbolicSet, SetError> {
        self.same_space(other)?;
        Ok(SymbolicSet { top: self.top.clone(), root: and(&self.root, &not(&other.root)) })
    }

    /// Complement within the space.
    pub fn complement(&self) -> SymbolicSet {
        SymbolicSet::from_node(&self.top, not(&self.root))
    }

    pub fn is_subset(&self, other: &SymbolicSet) -> Result<bool, SetError> {
        Ok(self.difference(other)?.is_empty())
    }

    pub fn contains(&self, alpha: &Ordinal) -> bool {
        if *alpha > self.top {
            return false;
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(b) => return *b,
                Node::Branch(l, parts) => {
                    let v = alpha.coeff(*l);
                    node = &parts.iter().find(|p| p.0.contains(v)).expect("parts cover ℕ").1;
                }
            }
        }
    }

    pub fn min_element(&self) -> Option<Ordinal> {
        let mut coeffs = vec![0u64; self.top.degree() as usize + 1];
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(false) => return None,
                Node::Leaf(true) => return Some(Ordinal::from_coeffs(&coeffs)),
                Node::Branch(l, parts) => {
                    let (v, child) = parts
                        .iter()
                        .filter(|p| !p.1.is_empty())
                        .map(|p| (p.0.least().expect("non-empty part"), &p.1))
                        .min_by_key(|x| x.0)
                        .expect("non-empty branch");
                    coeffs[*l as usize] = v;
                    node = child;
                }
            }
        }
    }

    /// Least element `≥ beta`.
    pub fn min_at_least(&self, beta: &Ordinal) -> Option<Ordinal> {
        let tail = SymbolicSet::from_node(&self.top, not(&lt_node(beta, self.top.degree())));
        self.intersection(&tail).expect("same space").min_element()
    }

    /// The `k` least elements.
    pub fn first_elements(&self, k: usize) -> Vec<Ordinal> {
        let mut out: Vec<Ordinal> = Vec::new();
        let mut from = Ordinal::zero();
        while out.len() < k {
            let Some(next) = self.min_at_least(&from) else { break };
            from = next.succ();
            out.push(next);
        }
        out
    }

    /// `{α + 1 : α ∈ X}` within the space.
    pub fn successor_image(&self) -> SymbolicSet {
        SymbolicSet::from_node(&self.top, succ_node(&self.root))
    }

    /// `d(X)`: the limits `α` of the space with `X ∩ α` cofinal in `α`.
    pub fn derivative(&self) -> SymbolicSet {
        SymbolicSet::from_node(&self.top, deriv(&self.root, self.top.degree()))
    }

    /// Pointwise cofinality test, independent of [`SymbolicSet::derivative`]:
    /// for `α = α⁻ + ω^r` it asks whether `X` meets the blocks
    /// `[α⁻ + ω^(r-1)·y, α⁻ + ω^(r-1)·(y+1))` for some `y` past every
    /// threshold of the diagram.
    pub fn cofinal_in(&self, alpha: &Ordinal) -> bool {
        if *alpha > self.top || !alpha.is_limit() {
            return false;
        }
        let r = alpha.last_exponent();
        let mut threshold = 0usize;
        let mut period = 1usize;
        self.root.for_each_natset(&mut |s| {
            threshold = threshold.max(s.prefix_len());
            period = period / gcd(period, s.period()) * s.period();
        });
        let mut coeffs = alpha.coeffs(self.top.degree());
        coeffs[r as usize] -= 1;
        let block = |y: u64| {
            let mut lo = coeffs.clone();
            lo[r as usize - 1] = y;
            let mut hi = coeffs.clone();
            hi[r as usize - 1] = y + 1;
            SymbolicSet::interval(&self.top, &Ordinal::from_coeffs(&lo), &Ordinal::from_coeffs(&hi))
        };
        (threshold..threshold + period).any(|y| !self.intersection(&block(y as u64)).expect("same space").is_empty())
    }

    /// Number of branch nodes in the diagram.
    pub fn diagram_size(&self) -> usize {
        fn count(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Branch(_, parts) => 1 + parts.iter().map(|p| count(&p.1)).sum::<usize>(),
            }
        }
        count(&self.root)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl fmt::Display for SymbolicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", serde_json::to_string(&self.to_doc()).expect("serializable"))
    }
}

/// One part of a branch in a [`SetDoc`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartDoc {
    pub set: NatSet,
    pub node: NodeDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeDoc {
    Leaf(bool),
    Branch { level: u32, parts: Vec<PartDoc> },
}

/// Serialized diagram of a [`SymbolicSet`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetDoc {
    pub space_top: Ordinal,
    pub tree: NodeDoc,
}

fn node_to_doc(n: &Node) -> NodeDoc {
    match n {
        Node::Leaf(b) => NodeDoc::Leaf(*b),
        Node::Branch(l, parts) => NodeDoc::Branch {
            level: *l,
            parts: parts.iter().map(|(s, c)| PartDoc { set: s.clone(), node: node_to_doc(c) }).collect(),
        },
    }
}

fn node_from_doc(d: &NodeDoc, below: Option<u32>) -> Result<Node, SetError> {
    match d {
        NodeDoc::Leaf(b) => Ok(Node::Leaf(*b)),
        NodeDoc::Branch { level, parts } => {
            if below.is_some_and(|b| *level >= b) {
                return Err(SetError::Malformed(format!("level {level} does not decrease")));
            }
            let mut seen = NatSet::empty();
            let mut out = Vec::new();
            for p in parts {
                if !seen.intersection(&p.set).is_empty() {
                    return Err(SetError::Malformed(format!("overlapping parts at level {level}")));
                }
                seen = seen.union(&p.set);
                out.push((p.set.clone(), node_from_doc(&p.node, Some(*level))?));
            }
            if !seen.is_all() {
                return Err(SetError::Malformed(format!("parts at level {level} do not cover ℕ")));
            }
            Ok(branch(*level, out))
        }
    }
}

impl SymbolicSet {
    pub fn to_doc(&self) -> SetDoc {
        SetDoc { space_top: self.top.clone(), tree: node_to_doc(&self.root) }
    }

    pub fn from_doc(doc: &SetDoc) -> Result<SymbolicSet, SetError> {
        let root = node_from_doc(&doc.tree, Some(doc.space_top.degree() + 1))?;
        Ok(SymbolicSet::from_node(&doc.space_top, root))
    }
}
