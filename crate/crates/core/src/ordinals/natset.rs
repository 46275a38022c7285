//! Eventually periodic subsets of ℕ.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest period a combined set may have.
pub const MAX_PERIOD: usize = 1 << 16;

/// `n ∈ S` iff `prefix[n]` for `n < prefix.len()`, else
/// `cycle[(n - prefix.len()) % cycle.len()]`. Always in canonical form:
/// the cycle has its least period and the prefix is as short as possible.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NatSet {
    prefix: Vec<bool>,
    cycle: Vec<bool>,
}

impl NatSet {
    pub fn new(prefix: Vec<bool>, cycle: Vec<bool>) -> Self {
        assert!(!cycle.is_empty(), "cycle must be non-empty");
        canonical(prefix, cycle)
    }

    pub fn empty() -> Self {
        NatSet { prefix: vec![], cycle: vec![false] }
    }

    pub fn all() -> Self {
        NatSet { prefix: vec![], cycle: vec![true] }
    }

    pub fn singleton(n: u64) -> Self {
        NatSet::range(n, n + 1)
    }

    /// `{lo, …, hi-1}`.
    pub fn range(lo: u64, hi: u64) -> Self {
        let prefix = (0..hi).map(|k| k >= lo).collect();
        NatSet::new(prefix, vec![false])
    }

    pub fn at_least(lo: u64) -> Self {
        NatSet::new(vec![false; lo as usize], vec![true])
    }

    /// `{n : n ≡ r (mod m)}`.
    pub fn residue(r: u64, m: u64) -> Self {
        assert!(m > 0);
        NatSet::new(vec![], (0..m).map(|k| k == r % m).collect())
    }

    pub fn contains(&self, n: u64) -> bool {
        let n = n as usize;
        match n.checked_sub(self.prefix.len()) {
            None => self.prefix[n],
            Some(k) => self.cycle[k % self.cycle.len()],
        }
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix.len()
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.prefix.iter().chain(&self.cycle).any(|&x| x)
    }

    pub fn is_all(&self) -> bool {
        self.prefix.iter().chain(&self.cycle).all(|&x| x)
    }

    pub fn is_infinite(&self) -> bool {
        self.cycle.iter().any(|&x| x)
    }

    pub fn least(&self) -> Option<u64> {
        self.prefix.iter().chain(&self.cycle).position(|&x| x).map(|k| k as u64)
    }

    /// Least element `≥ n`.
    pub fn min_at_least(&self, n: u64) -> Option<u64> {
        let p = self.prefix.len() as u64;
        let l = self.cycle.len() as u64;
        let end = n.max(p) + l;
        (n..end).find(|&k| self.contains(k))
    }

    fn binop(&self, other: &NatSet, op: impl Fn(bool, bool) -> bool) -> NatSet {
        let p = self.prefix.len().max(other.prefix.len());
        let l = lcm(self.cycle.len(), other.cycle.len());
        assert!(l <= MAX_PERIOD, "period {l} exceeds {MAX_PERIOD}");
        let at = |n: usize| op(self.contains(n as u64), other.contains(n as u64));
        canonical((0..p).map(at).collect(), (p..p + l).map(at).collect())
    }

    pub fn union(&self, other: &NatSet) -> NatSet {
        self.binop(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &NatSet) -> NatSet {
        self.binop(other, |a, b| a && b)
    }

    pub fn difference(&self, other: &NatSet) -> NatSet {
        self.binop(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> NatSet {
        NatSet {
            prefix: self.prefix.iter().map(|x| !x).collect(),
            cycle: self.cycle.iter().map(|x| !x).collect(),
        }
    }

    /// `{n + k : n ∈ self}`.
    pub fn shift_up(&self, k: u64) -> NatSet {
        let mut prefix = vec![false; k as usize];
        prefix.extend_from_slice(&self.prefix);
        canonical(prefix, self.cycle.clone())
    }

    pub fn is_subset(&self, other: &NatSet) -> bool {
        self.difference(other).is_empty()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

fn canonical(mut prefix: Vec<bool>, mut cycle: Vec<bool>) -> NatSet {
    let l = cycle.len();
    if let Some(p) = (1..=l).find(|&p| l % p == 0 && (p..l).all(|k| cycle[k] == cycle[k - p])) {
        cycle.truncate(p);
    }
    while prefix.last().is_some_and(|&x| Some(&x) == cycle.last()) {
        prefix.pop();
        cycle.rotate_right(1);
    }
    NatSet { prefix, cycle }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&x| if x { '1' } else { '0' }).collect()
}

impl fmt::Display for NatSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", bits(&self.prefix), bits(&self.cycle))
    }
}

#[derive(Serialize, Deserialize)]
struct NatSetDoc {
    prefix: String,
    cycle: String,
}

impl Serialize for NatSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        NatSetDoc { prefix: bits(&self.prefix), cycle: bits(&self.cycle) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NatSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = NatSetDoc::deserialize(d)?;
        let parse = |s: &str| -> Result<Vec<bool>, D::Error> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(serde::de::Error::custom(format!("bad bit {c:?}"))),
                })
                .collect()
        };
        let cycle = parse(&doc.cycle)?;
        if cycle.is_empty() {
            return Err(serde::de::Error::custom("empty cycle"));
        }
        Ok(NatSet::new(parse(&doc.prefix)?, cycle))
    }
}
