//! GL decision procedure.
//!
//! [`decide`] runs a signed tableau over the closure of the input formula.
//! A failed `□A` spawns a child carrying `A` false, `□A` true, and both `χ` and
//! `□χ` for every `□χ` true at the parent. Searches are run with increasing
//! height budgets, so a returned countermodel has the least possible height.

mod brute;
mod proof;

pub use brute::{brute_force_decide, brute_force_on, BruteOutcome, DEFAULT_BRUTE_GUARD};
pub use proof::{check_proof, Justification, Proof, ProofError, ProofLine, ProofLineDoc};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::formula::Formula;
use crate::kripke::{model_check, KripkeFrame, KripkeModel};

/// Default bound on the closure size handled by the tableau.
pub const DEFAULT_CLOSURE_GUARD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("closure has {size} subformulas, guard is {guard}")]
    GuardExceeded { size: usize, guard: usize },
    #[error("countermodel rejected by the model checker")]
    Unverified,
    #[error(transparent)]
    Kripke(#[from] crate::kripke::KripkeError),
}

/// Result of deciding a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// A finite transitive irreflexive tree refuting the formula at `world`.
    Countermodel { model: KripkeModel, world: usize },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn to_json(&self) -> Value {
        match self {
            Verdict::Valid => json!({ "verdict": "valid" }),
            Verdict::Countermodel { model, world } => json!({
                "verdict": "countermodel",
                "model": model.to_doc(),
                "world": world,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Node {
    Var(u32),
    Bot,
    Neg(usize),
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
    Box(usize),
}

/// The desugared closure of a formula, indexed in subformula order.
#[derive(Debug, Clone)]
pub(crate) struct Closure {
    nodes: Vec<Node>,
}

impl Closure {
    pub(crate) fn new(f: &Formula, guard: usize) -> Result<Self, DecideError> {
        let formulas = f.subformulas();
        let guard = guard.min(64);
        if formulas.len() > guard {
            return Err(DecideError::GuardExceeded { size: formulas.len(), guard });
        }
        let index: HashMap<&Formula, usize> = formulas.iter().enumerate().map(|(k, g)| (g, k)).collect();
        let nodes = formulas
            .iter()
            .map(|g| match g {
                Formula::Var(i) => Node::Var(*i),
                Formula::Bot => Node::Bot,
                Formula::Neg(a) => Node::Neg(index[a.as_ref()]),
                Formula::And(a, b) => Node::And(index[a.as_ref()], index[b.as_ref()]),
                Formula::Or(a, b) => Node::Or(index[a.as_ref()], index[b.as_ref()]),
                Formula::Imp(a, b) => Node::Imp(index[a.as_ref()], index[b.as_ref()]),
                Formula::Box(a) => Node::Box(index[a.as_ref()]),
                Formula::Top | Formula::Dia(_) => unreachable!("closure is desugared"),
            })
            .collect();
        Ok(Closure { nodes })
    }

    fn boxes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.iter().enumerate().filter_map(|(k, n)| match n {
            Node::Box(a) => Some((k, *a)),
            _ => None,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Debug)]
struct TreeNode {
    true_vars: BTreeSet<u32>,
    children: Vec<Rc<TreeNode>>,
}

struct Tableau<'a> {
    cl: &'a Closure,
    memo: HashMap<(u64, u64, usize), Option<Rc<TreeNode>>>,
}

const fn bit(k: usize) -> u64 {
    1u64 << k
}

impl Tableau<'_> {
    /// A tree model of height at most `budget` where every `t`-formula is
    /// true and every `f`-formula false at the root.
    fn sat(&mut self, t: u64, f: u64, budget: usize) -> Option<Rc<TreeNode>> {
        if let Some(hit) = self.memo.get(&(t, f, budget)) {
            return hit.clone();
        }
        let out = self.saturate(t, f, budget);
        self.memo.insert((t, f, budget), out.clone());
        out
    }

    fn saturate(&mut self, t: u64, f: u64, budget: usize) -> Option<Rc<TreeNode>> {
        self.expand(t, f, 0, 0, budget)
    }

    /// Applies the Boolean rules in closure order; `done_t`/`done_f` record
    /// signed formulas already expanded on this branch.
    fn expand(
        &mut self,
        mut t: u64,
        mut f: u64,
        mut done_t: u64,
        mut done_f: u64,
        budget: usize,
    ) -> Option<Rc<TreeNode>> {
        loop {
            if t & f != 0 {
                return None;
            }
            let pending = (t & !done_t) | (f & !done_f);
            let next = (0..self.cl.len()).find(|&k| {
                pending & bit(k) != 0 && !matches!(self.cl.nodes[k], Node::Var(_) | Node::Box(_))
            });
            let Some(k) = next else {
                return self.modal_step(t, f, budget);
            };
            let signed_true = t & bit(k) != 0 && done_t & bit(k) == 0;
            let (a, b, positive) = match self.cl.nodes[k] {
                Node::Bot if signed_true => return None,
                Node::Neg(a) => (a, a, signed_true),
                Node::And(a, b) | Node::Or(a, b) | Node::Imp(a, b) => (a, b, signed_true),
                _ => (0, 0, signed_true),
            };
            if positive {
                done_t |= bit(k);
            } else {
                done_f |= bit(k);
            }
            let options: [(u64, u64); 2] = match (self.cl.nodes[k], positive) {
                (Node::Bot, _) => {
                    continue;
                }
                (Node::Neg(_), true) => {
                    f |= bit(a);
                    continue;
                }
                (Node::Neg(_), false) => {
                    t |= bit(a);
                    continue;
                }
                (Node::And(..), true) => {
                    t |= bit(a) | bit(b);
                    continue;
                }
                (Node::Or(..), false) => {
                    f |= bit(a) | bit(b);
                    continue;
                }
                (Node::Imp(..), false) => {
                    t |= bit(a);
                    f |= bit(b);
                    continue;
                }
                (Node::And(..), false) => [(0, bit(a)), (0, bit(b))],
                (Node::Or(..), true) => [(bit(a), 0), (bit(b), 0)],
                (Node::Imp(..), true) => [(0, bit(a)), (bit(b), 0)],
                (Node::Var(_) | Node::Box(_), _) => unreachable!("filtered above"),
            };
            return options
                .into_iter()
                .find_map(|(dt, df)| self.expand(t | dt, f | df, done_t, done_f, budget));
        }
    }

    fn modal_step(&mut self, t: u64, f: u64, budget: usize) -> Option<Rc<TreeNode>> {
        let boxes: Vec<(usize, usize)> = self.cl.boxes().collect();
        let mut carried = 0u64;
        for &(k, a) in &boxes {
            if t & bit(k) != 0 {
                carried |= bit(k) | bit(a);
            }
        }
        let mut children = Vec::new();
        for &(k, a) in &boxes {
            if f & bit(k) == 0 {
                continue;
            }
            if budget == 0 {
                return None;
            }
            children.push(self.sat(carried | bit(k), bit(a), budget - 1)?);
        }
        let true_vars = (0..self.cl.len())
            .filter(|&k| t & bit(k) != 0)
            .filter_map(|k| match self.cl.nodes[k] {
                Node::Var(i) => Some(i),
                _ => None,
            })
            .collect();
        Some(Rc::new(TreeNode { true_vars, children }))
    }
}

fn tree_to_model(root: &TreeNode) -> KripkeModel {
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut valuation: BTreeMap<u32, BTreeSet<usize>> = BTreeMap::new();
    fn walk(
        node: &TreeNode,
        par: Option<usize>,
        parent: &mut Vec<Option<usize>>,
        valuation: &mut BTreeMap<u32, BTreeSet<usize>>,
    ) {
        let me = parent.len();
        parent.push(par);
        for &v in &node.true_vars {
            valuation.entry(v).or_default().insert(me);
        }
        for c in &node.children {
            walk(c, Some(me), parent, valuation);
        }
    }
    walk(root, None, &mut parent, &mut valuation);
    let mut relation = Vec::new();
    for w in 0..parent.len() {
        let mut a = parent[w];
        while let Some(p) = a {
            relation.push((p, w));
            a = parent[p];
        }
    }
    let frame = KripkeFrame::new(parent.len(), relation).expect("preorder ids are in range");
    KripkeModel { frame, valuation }
}

/// Decide GL-provability of `f` with the default closure guard.
pub fn decide(f: &Formula) -> Result<Verdict, DecideError> {
    decide_with_guard(f, DEFAULT_CLOSURE_GUARD)
}

pub fn decide_with_guard(f: &Formula, guard: usize) -> Result<Verdict, DecideError> {
    let cl = Closure::new(f, guard)?;
    let max_height = cl.boxes().count();
    let mut tab = Tableau { cl: &cl, memo: HashMap::new() };
    for budget in 0..=max_height {
        if let Some(tree) = tab.sat(0, bit(0), budget) {
            let model = tree_to_model(&tree);
            if model_check(&model, f).contains(&0) || !model.frame.is_transitive_irreflexive_tree() {
                return Err(DecideError::Unverified);
            }
            return Ok(Verdict::Countermodel { model, world: 0 });
        }
    }
    Ok(Verdict::Valid)
}

/// Summary used by the CLI and the FFI layer.
#[derive(Debug, Clone, Serialize)]
pub struct DecideSummary {
    pub formula: String,
    pub verdict: &'static str,
    pub worlds: Option<usize>,
    pub height: Option<usize>,
}

impl From<(&Formula, &Verdict)> for DecideSummary {
    fn from((f, v): (&Formula, &Verdict)) -> Self {
        match v {
            Verdict::Valid => DecideSummary { formula: f.print(), verdict: "valid", worlds: None, height: None },
            Verdict::Countermodel { model, .. } => DecideSummary {
                formula: f.print(),
                verdict: "countermodel",
                worlds: Some(model.frame.len()),
                height: model.frame.height(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn verdict(s: &str) -> Verdict {
        decide(&parse(s).unwrap()).unwrap()
    }

    #[test]
    fn axioms_are_valid() {
        assert!(verdict("[]([]p0 -> p0) -> []p0").is_valid());
        assert!(verdict("[](p0 -> p1) -> ([]p0 -> []p1)").is_valid());
        assert!(verdict("[]p0 -> [][]p0").is_valid());
        assert!(verdict("p0 -> p0").is_valid());
        assert!(verdict("~[]# -> ~[]~[]#").is_valid());
    }

    #[test]
    fn refutable_formulas_get_countermodels() {
        match verdict("<>T") {
            Verdict::Countermodel { model, world } => {
                assert_eq!(model.frame.len(), 1);
                assert_eq!(world, 0);
            }
            Verdict::Valid => panic!("<>T is not a theorem"),
        }
        for s in ["[]p0 -> p0", "p0 -> []p0", "[]p0", "<>p0 -> []<>p0", "~[]#"] {
            let f = parse(s).unwrap();
            match decide(&f).unwrap() {
                Verdict::Countermodel { model, world } => {
                    assert!(!model_check(&model, &f).contains(&world), "{s}");
                    assert!(model.frame.is_transitive_irreflexive_tree());
                }
                Verdict::Valid => panic!("{s} is not a theorem"),
            }
        }
    }

    #[test]
    fn countermodel_height_is_minimal() {
        // Refuting ◇p ∧ □(p→◇q) ∧ □(q→◇r) → ⊥ needs a chain of three successors.
        let f = parse("~(<>p0 & [](p0 -> <>p1) & [](p1 -> <>p2))").unwrap();
        assert_eq!(f.modal_depth(), 2);
        match decide(&f).unwrap() {
            Verdict::Countermodel { model, .. } => assert_eq!(model.frame.height(), Some(3)),
            Verdict::Valid => panic!("satisfiable negation"),
        }
        let g = parse("~<><>T").unwrap();
        match decide(&g).unwrap() {
            Verdict::Countermodel { model, .. } => assert_eq!(model.frame.height(), Some(2)),
            Verdict::Valid => panic!("not a theorem"),
        }
    }

    #[test]
    fn closure_guard() {
        let big = (0..70).fold(Formula::Bot, |acc, i| Formula::imp(Formula::Var(i), acc));
        assert!(matches!(decide(&big), Err(DecideError::GuardExceeded { .. })));
    }

    #[test]
    fn verdict_json_shape() {
        assert_eq!(Verdict::Valid.to_json(), json!({"verdict": "valid"}));
        let v = verdict("<>T").to_json();
        assert_eq!(v["verdict"], "countermodel");
        assert_eq!(v["model"]["worlds"], json!([0]));
        assert_eq!(v["world"], 0);
    }
}
