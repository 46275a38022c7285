//! Ordinals below `ω^ω` in Cantor normal form.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrdinalError {
    #[error("coefficient overflow")]
    Overflow,
    #[error("malformed ordinal literal {0:?}")]
    Syntax(String),
}

/// `ω^e₁·c₁ + … + ω^e_k·c_k` with `e₁ > … > e_k` and every `c_i > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(u32, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal::default()
    }

    pub fn finite(n: u64) -> Self {
        Ordinal::from_terms(vec![(0, n)])
    }

    /// `ω^e`.
    pub fn omega_pow(e: u32) -> Self {
        Ordinal::from_terms(vec![(e, 1)])
    }

    /// Canonicalizes: merges equal exponents and drops absorbed and zero terms.
    pub fn from_terms(terms: Vec<(u32, u64)>) -> Self {
        let mut acc = Ordinal::zero();
        for (e, c) in terms {
            if c > 0 {
                acc = acc.add(&Ordinal { terms: vec![(e, c)] }).expect("term-wise sum stays in range");
            }
        }
        acc
    }

    /// From coefficients indexed by exponent (`coeffs[e]` is the coefficient of `ω^e`).
    pub fn from_coeffs(coeffs: &[u64]) -> Self {
        let terms = coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c > 0)
            .map(|(e, &c)| (e as u32, c))
            .collect();
        Ordinal { terms }
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exponent of the leading term; 0 for 0.
    pub fn degree(&self) -> u32 {
        self.terms.first().map_or(0, |t| t.0)
    }

    /// Coefficient of `ω^e`.
    pub fn coeff(&self, e: u32) -> u64 {
        self.terms.iter().find(|t| t.0 == e).map_or(0, |t| t.1)
    }

    /// Coefficients for exponents `0..=top`.
    pub fn coeffs(&self, top: u32) -> Vec<u64> {
        (0..=top).map(|e| self.coeff(e)).collect()
    }

    /// 0 for 0 and successors; the final exponent otherwise.
    pub fn last_exponent(&self) -> u32 {
        self.terms.last().map_or(0, |t| t.0)
    }

    pub fn is_successor(&self) -> bool {
        self.terms.last().is_some_and(|t| t.0 == 0)
    }

    pub fn is_limit(&self) -> bool {
        self.terms.last().is_some_and(|t| t.0 > 0)
    }

    /// Ordinal sum; the left summand's terms below the leading exponent of
    /// the right summand are absorbed.
    pub fn add(&self, other: &Ordinal) -> Result<Ordinal, OrdinalError> {
        let Some(&(e, c)) = other.terms.first() else {
            return Ok(self.clone());
        };
        let mut terms: Vec<(u32, u64)> = self.terms.iter().copied().filter(|t| t.0 > e).collect();
        let carry = self.coeff(e);
        terms.push((e, c.checked_add(carry).ok_or(OrdinalError::Overflow)?));
        terms.extend_from_slice(&other.terms[1..]);
        Ok(Ordinal { terms })
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::finite(1)).expect("successor of a small ordinal")
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn ord_cmp(a: &Ordinal, b: &Ordinal) -> Ordering {
    a.cmp(b)
}

pub fn ord_add(a: &Ordinal, b: &Ordinal) -> Result<Ordinal, OrdinalError> {
    a.add(b)
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, &(e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, "+")?;
            }
            match (e, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "w")?,
                (1, c) => write!(f, "w*{c}")?,
                (e, 1) => write!(f, "w^{e}")?,
                (e, c) => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

fn parse_term(term: &str, whole: &str) -> Result<Ordinal, OrdinalError> {
    let bad = || OrdinalError::Syntax(whole.to_string());
    let num = |s: &str| -> Result<u64, OrdinalError> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        s.parse().map_err(|_| bad())
    };
    let Some(rest) = term.strip_prefix('w') else {
        return Ok(Ordinal::finite(num(term)?));
    };
    let (exp_part, coef) = match rest.split_once('*') {
        Some((e, c)) => (e, num(c)?),
        None => (rest, 1),
    };
    let exp = match exp_part.strip_prefix('^') {
        Some(e) => u32::try_from(num(e)?).map_err(|_| bad())?,
        None if exp_part.is_empty() => 1,
        None => return Err(bad()),
    };
    Ok(Ordinal::from_terms(vec![(exp, coef)]))
}

impl FromStr for Ordinal {
    type Err = OrdinalError;

    /// Literals like `w^2*3+w+5`; the terms are summed as ordinals.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(OrdinalError::Syntax(s.to_string()));
        }
        let mut acc = Ordinal::zero();
        for term in compact.split('+') {
            acc = acc.add(&parse_term(term, s)?)?;
        }
        Ok(acc)
    }
}

impl Serialize for Ordinal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
