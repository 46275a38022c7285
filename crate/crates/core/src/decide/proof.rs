//! Hilbert-style GL proofs: tautologies, the K and Löb schemas, modus
//! ponens and necessitation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::formula::{parse, Formula, ParseError};

/// Most atoms a tautology check will enumerate.
pub const TAUT_ATOM_GUARD: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Justification {
    Taut,
    AxK(Formula, Formula),
    AxLob(Formula),
    /// `Mp(i, j)`: line `j` is `line_i → current`.
    Mp(usize, usize),
    Nec(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofLine {
    pub formula: Formula,
    pub justification: Justification,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Proof {
    pub lines: Vec<ProofLine>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("line {line}: reference to line {index}, which is not an earlier line")]
    BadIndex { line: usize, index: usize },
    #[error("line {line}: formula does not match the claimed rule or schema")]
    SchemaMismatch { line: usize },
    #[error("line {line}: not a propositional tautology")]
    NotTautology { line: usize },
    #[error("line {line}: {atoms} atoms exceed the tautology guard of {TAUT_ATOM_GUARD}")]
    GuardExceeded { line: usize, atoms: usize },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
    #[error("empty proof")]
    Empty,
}

impl ProofError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ProofError::BadIndex { line, .. }
            | ProofError::SchemaMismatch { line }
            | ProofError::NotTautology { line }
            | ProofError::GuardExceeded { line, .. }
            | ProofError::Malformed { line, .. }
            | ProofError::Parse { line, .. } => Some(*line),
            ProofError::Empty => None,
        }
    }
}

/// Check every line. Lines are numbered from 0.
pub fn check_proof(p: &Proof) -> Result<(), ProofError> {
    if p.lines.is_empty() {
        return Err(ProofError::Empty);
    }
    let desugared: Vec<Formula> = p.lines.iter().map(|l| l.formula.desugar()).collect();
    for (line, l) in p.lines.iter().enumerate() {
        let here = &desugared[line];
        let earlier = |index: usize| {
            if index < line {
                Ok(&desugared[index])
            } else {
                Err(ProofError::BadIndex { line, index })
            }
        };
        let ok = match &l.justification {
            Justification::Taut => {
                check_tautology(here, line)?;
                true
            }
            Justification::AxK(phi, psi) => *here == Formula::k_axiom(phi.clone(), psi.clone()).desugar(),
            Justification::AxLob(phi) => *here == Formula::lob(phi.clone()).desugar(),
            Justification::Mp(i, j) => {
                let a = earlier(*i)?;
                let imp = earlier(*j)?;
                *imp == Formula::imp(a.clone(), here.clone())
            }
            Justification::Nec(i) => *here == Formula::boxed(earlier(*i)?.clone()),
        };
        if !ok {
            return Err(ProofError::SchemaMismatch { line });
        }
    }
    Ok(())
}

fn collect_atoms(f: &Formula, out: &mut BTreeSet<Formula>) {
    match f {
        Formula::Var(_) | Formula::Box(_) => {
            out.insert(f.clone());
        }
        Formula::Bot | Formula::Top => {}
        Formula::Neg(a) => collect_atoms(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        Formula::Dia(_) => unreachable!("desugared"),
    }
}

fn eval_prop(f: &Formula, atoms: &[Formula], code: u32) -> bool {
    match f {
        Formula::Var(_) | Formula::Box(_) => {
            let k = atoms.iter().position(|a| a == f).expect("collected atom");
            code >> k & 1 == 1
        }
        Formula::Bot => false,
        Formula::Top => true,
        Formula::Neg(a) => !eval_prop(a, atoms, code),
        Formula::And(a, b) => eval_prop(a, atoms, code) && eval_prop(b, atoms, code),
        Formula::Or(a, b) => eval_prop(a, atoms, code) || eval_prop(b, atoms, code),
        Formula::Imp(a, b) => !eval_prop(a, atoms, code) || eval_prop(b, atoms, code),
        Formula::Dia(_) => unreachable!("desugared"),
    }
}

/// Truth-table check treating variables and maximal boxed subformulas as atoms.
fn check_tautology(f: &Formula, line: usize) -> Result<(), ProofError> {
    let mut atoms = BTreeSet::new();
    collect_atoms(f, &mut atoms);
    let atoms: Vec<Formula> = atoms.into_iter().collect();
    if atoms.len() > TAUT_ATOM_GUARD {
        return Err(ProofError::GuardExceeded { line, atoms: atoms.len() });
    }
    if (0..1u32 << atoms.len()).all(|code| eval_prop(f, &atoms, code)) {
        Ok(())
    } else {
        Err(ProofError::NotTautology { line })
    }
}

/// One proof line as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofLineDoc {
    pub formula: String,
    pub rule: String,
    #[serde(default)]
    pub args: Vec<Value>,
}

impl Proof {
    pub fn from_docs(docs: &[ProofLineDoc]) -> Result<Proof, ProofError> {
        let mut lines = Vec::with_capacity(docs.len());
        for (line, d) in docs.iter().enumerate() {
            let formula = parse(&d.formula).map_err(|source| ProofError::Parse { line, source })?;
            let malformed = |message: &str| ProofError::Malformed { line, message: message.to_string() };
            let formula_arg = |k: usize| -> Result<Formula, ProofError> {
                let s = d.args.get(k).and_then(Value::as_str).ok_or_else(|| malformed("expected a formula argument"))?;
                parse(s).map_err(|source| ProofError::Parse { line, source })
            };
            let index_arg = |k: usize| -> Result<usize, ProofError> {
                d.args
                    .get(k)
                    .and_then(Value::as_u64)
                    .map(|x| x as usize)
                    .ok_or_else(|| malformed("expected a line index argument"))
            };
            let want = |n: usize| -> Result<(), ProofError> {
                if d.args.len() == n {
                    Ok(())
                } else {
                    Err(malformed(&format!("rule {} takes {n} arguments", d.rule)))
                }
            };
            let justification = match d.rule.as_str() {
                "taut" => {
                    want(0)?;
                    Justification::Taut
                }
                "K" => {
                    want(2)?;
                    Justification::AxK(formula_arg(0)?, formula_arg(1)?)
                }
                "lob" => {
                    want(1)?;
                    Justification::AxLob(formula_arg(0)?)
                }
                "mp" => {
                    want(2)?;
                    Justification::Mp(index_arg(0)?, index_arg(1)?)
                }
                "nec" => {
                    want(1)?;
                    Justification::Nec(index_arg(0)?)
                }
                other => return Err(malformed(&format!("unknown rule {other:?}"))),
            };
            lines.push(ProofLine { formula, justification });
        }
        Ok(Proof { lines })
    }

    pub fn to_docs(&self) -> Vec<ProofLineDoc> {
        self.lines
            .iter()
            .map(|l| {
                let (rule, args): (&str, Vec<Value>) = match &l.justification {
                    Justification::Taut => ("taut", vec![]),
                    Justification::AxK(a, b) => ("K", vec![a.print().into(), b.print().into()]),
                    Justification::AxLob(a) => ("lob", vec![a.print().into()]),
                    Justification::Mp(i, j) => ("mp", vec![(*i).into(), (*j).into()]),
                    Justification::Nec(i) => ("nec", vec![(*i).into()]),
                };
                ProofLineDoc { formula: l.formula.print(), rule: rule.to_string(), args }
            })
            .collect()
    }
}
