//! Modal formula syntax: parsing, canonical printing, desugaring and a few
//! structural measures used to bound the searches elsewhere in the crate.
//!
//! Concrete syntax (ASCII, whitespace ignored between tokens):
//!
//! ```text
//! formula := imp
//! imp     := or ("->" imp)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | "[]" unary | "<>" unary | atom
//! atom    := "#" | "T" | "p" digits | "(" formula ")"
//! ```

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

/// A modal formula. `Top` and `Dia` are kept as primitives so output stays
/// readable; [`Formula::desugar`] removes them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Var(u32),
    Bot,
    Top,
    Neg(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Box(Box<Formula>),
    Dia(Box<Formula>),
}

impl Formula {
    pub fn var(i: u32) -> Self {
        Formula::Var(i)
    }

    pub fn neg(f: Formula) -> Self {
        Formula::Neg(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    pub fn boxed(f: Formula) -> Self {
        Formula::Box(Box::new(f))
    }

    pub fn dia(f: Formula) -> Self {
        Formula::Dia(Box::new(f))
    }

    /// Right-nested conjunction; `Top` for an empty list.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Self {
        let mut items: Vec<Formula> = items.into_iter().collect();
        let Some(mut acc) = items.pop() else {
            return Formula::Top;
        };
        while let Some(f) = items.pop() {
            acc = Formula::and(f, acc);
        }
        acc
    }

    /// `◇…◇⊤` with `n` diamonds.
    pub fn dia_power(n: usize) -> Self {
        (0..n).fold(Formula::Top, |acc, _| Formula::dia(acc))
    }

    /// `□…□⊥` with `n` boxes.
    pub fn box_power_bot(n: usize) -> Self {
        (0..n).fold(Formula::Bot, |acc, _| Formula::boxed(acc))
    }

    /// The Löb instance `□(□φ→φ)→□φ`.
    pub fn lob(phi: Formula) -> Self {
        Formula::imp(
            Formula::boxed(Formula::imp(Formula::boxed(phi.clone()), phi.clone())),
            Formula::boxed(phi),
        )
    }

    /// The K instance `□(φ→ψ)→(□φ→□ψ)`.
    pub fn k_axiom(phi: Formula, psi: Formula) -> Self {
        Formula::imp(
            Formula::boxed(Formula::imp(phi.clone(), psi.clone())),
            Formula::imp(Formula::boxed(phi), Formula::boxed(psi)),
        )
    }

    /// Replace `⊤` by `¬⊥` and `◇φ` by `¬□¬φ`.
    pub fn desugar(&self) -> Formula {
        match self {
            Formula::Var(i) => Formula::Var(*i),
            Formula::Bot => Formula::Bot,
            Formula::Top => Formula::neg(Formula::Bot),
            Formula::Neg(a) => Formula::neg(a.desugar()),
            Formula::And(a, b) => Formula::and(a.desugar(), b.desugar()),
            Formula::Or(a, b) => Formula::or(a.desugar(), b.desugar()),
            Formula::Imp(a, b) => Formula::imp(a.desugar(), b.desugar()),
            Formula::Box(a) => Formula::boxed(a.desugar()),
            Formula::Dia(a) => Formula::neg(Formula::boxed(Formula::neg(a.desugar()))),
        }
    }

    pub fn is_desugared(&self) -> bool {
        match self {
            Formula::Top | Formula::Dia(_) => false,
            Formula::Var(_) | Formula::Bot => true,
            Formula::Neg(a) | Formula::Box(a) => a.is_desugared(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.is_desugared() && b.is_desugared()
            }
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => 0,
            Formula::Neg(a) => a.modal_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            Formula::Box(a) | Formula::Dia(a) => 1 + a.modal_depth(),
        }
    }

    /// Number of nodes in the syntax tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => 1,
            Formula::Neg(a) | Formula::Box(a) | Formula::Dia(a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Number of connectives (non-leaf nodes).
    pub fn connectives(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => 0,
            Formula::Neg(a) | Formula::Box(a) | Formula::Dia(a) => 1 + a.connectives(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                1 + a.connectives() + b.connectives()
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<u32>) {
        match self {
            Formula::Var(i) => {
                out.insert(*i);
            }
            Formula::Bot | Formula::Top => {}
            Formula::Neg(a) | Formula::Box(a) | Formula::Dia(a) => a.collect_vars(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Distinct subtrees of the desugared formula in preorder of first
    /// occurrence; the desugared formula itself comes first.
    pub fn subformulas(&self) -> Vec<Formula> {
        let d = self.desugar();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        d.preorder_unique(&mut seen, &mut out);
        out
    }

    fn preorder_unique(&self, seen: &mut HashSet<Formula>, out: &mut Vec<Formula>) {
        if !seen.insert(self.clone()) {
            return;
        }
        out.push(self.clone());
        match self {
            Formula::Var(_) | Formula::Bot | Formula::Top => {}
            Formula::Neg(a) | Formula::Box(a) | Formula::Dia(a) => a.preorder_unique(seen, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.preorder_unique(seen, out);
                b.preorder_unique(seen, out);
            }
        }
    }

    /// Fully parenthesized canonical text; inverse of [`parse`].
    pub fn print(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(i) => write!(f, "p{i}"),
            Formula::Bot => write!(f, "#"),
            Formula::Top => write!(f, "T"),
            Formula::Neg(a) => write!(f, "~({a})"),
            Formula::Box(a) => write!(f, "[]({a})"),
            Formula::Dia(a) => write!(f, "<>({a})"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Imp(a, b) => write!(f, "({a} -> {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {position}: expected one of {}", expected.join(", "))]
pub struct ParseError {
    pub position: usize,
    pub expected: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Token {
    Var(u32),
    Bot,
    Top,
    Not,
    Box,
    Dia,
    And,
    Or,
    Imp,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |position: usize| ParseError {
        position,
        expected: [
            "\"#\"", "\"T\"", "\"p\" digits", "\"~\"", "\"[]\"", "\"<>\"", "\"&\"", "\"|\"",
            "\"->\"", "\"(\"", "\")\"",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'#' => Token::Bot,
            b'T' => Token::Top,
            b'~' => Token::Not,
            b'&' => Token::And,
            b'|' => Token::Or,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'[' if bytes.get(i + 1) == Some(&b']') => {
                i += 1;
                Token::Box
            }
            b'<' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Token::Dia
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 1;
                Token::Imp
            }
            b'p' => {
                let mut j = i + 1;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(ParseError {
                        position: j,
                        expected: vec!["digits".into()],
                    });
                }
                let index = text[i + 1..j].parse::<u32>().map_err(|_| ParseError {
                    position: i + 1,
                    expected: vec!["variable index fitting in 32 bits".into()],
                })?;
                i = j - 1;
                Token::Var(index)
            }
            _ => return Err(err(start)),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).map(|t| t.1)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek() == Some(Token::Imp) {
            self.pos += 1;
            let rhs = self.imp()?;
            return Ok(Formula::imp(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.and()?;
        while self.peek() == Some(Token::Or) {
            self.pos += 1;
            let rhs = self.and()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.peek() == Some(Token::And) {
            self.pos += 1;
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Formula::neg(self.unary()?))
            }
            Some(Token::Box) => {
                self.pos += 1;
                Ok(Formula::boxed(self.unary()?))
            }
            Some(Token::Dia) => {
                self.pos += 1;
                Ok(Formula::dia(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        const ATOM: &[&str] = &["\"#\"", "\"T\"", "\"p\" digits", "\"(\"", "\"~\"", "\"[]\"", "\"<>\""];
        let f = match self.peek() {
            Some(Token::Bot) => Formula::Bot,
            Some(Token::Top) => Formula::Top,
            Some(Token::Var(i)) => Formula::Var(i),
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.imp()?;
                if self.peek() != Some(Token::RParen) {
                    return self.fail(&["\")\"", "\"->\"", "\"|\"", "\"&\""]);
                }
                inner
            }
            _ => return self.fail(ATOM),
        };
        self.pos += 1;
        Ok(f)
    }
}

/// Parse a formula in the concrete syntax described at module level.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let f = p.imp()?;
    if p.pos != p.tokens.len() {
        return p.fail(&["end of input", "\"->\"", "\"|\"", "\"&\""]);
    }
    Ok(f)
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

/// Which connectives a random formula may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectives {
    /// `¬`, `→`, `□` only.
    Minimal,
    /// Every connective including `⊤`, `⊥`, `∧`, `∨`, `◇`.
    Full,
}

/// Random formula with exactly `connectives` connectives over `p0..p{vars-1}`.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    connectives: usize,
    vars: u32,
    kind: Connectives,
) -> Formula {
    if connectives == 0 {
        return match kind {
            Connectives::Full if rng.gen_ratio(1, 6) => {
                if rng.gen_bool(0.5) {
                    Formula::Bot
                } else {
                    Formula::Top
                }
            }
            _ => Formula::Var(rng.gen_range(0..vars.max(1))),
        };
    }
    let (unary, binary): (&[u8], &[u8]) = match kind {
        Connectives::Minimal => (&[0, 1], &[2]),
        Connectives::Full => (&[0, 1, 3], &[2, 4, 5]),
    };
    let total = unary.len() + binary.len();
    let pick = rng.gen_range(0..total);
    if pick < unary.len() {
        let inner = random_formula(rng, connectives - 1, vars, kind);
        match unary[pick] {
            0 => Formula::neg(inner),
            1 => Formula::boxed(inner),
            _ => Formula::dia(inner),
        }
    } else {
        let left_size = rng.gen_range(0..connectives);
        let a = random_formula(rng, left_size, vars, kind);
        let b = random_formula(rng, connectives - 1 - left_size, vars, kind);
        match binary[pick - unary.len()] {
            2 => Formula::imp(a, b),
            4 => Formula::and(a, b),
            _ => Formula::or(a, b),
        }
    }
}

/// Every formula over `¬`, `→`, `□` and `p0..p{vars-1}` with at most
/// `max_connectives` connectives, grouped by connective count.
pub fn enumerate_minimal(max_connectives: usize, vars: u32) -> Vec<Vec<Formula>> {
    let mut by_size: Vec<Vec<Formula>> = vec![(0..vars).map(Formula::Var).collect()];
    for k in 1..=max_connectives {
        let mut level = Vec::new();
        for f in &by_size[k - 1] {
            level.push(Formula::neg(f.clone()));
            level.push(Formula::boxed(f.clone()));
        }
        for a in 0..k {
            let b = k - 1 - a;
            for x in &by_size[a] {
                for y in &by_size[b] {
                    level.push(Formula::imp(x.clone(), y.clone()));
                }
            }
        }
        by_size.push(level);
    }
    by_size
}
