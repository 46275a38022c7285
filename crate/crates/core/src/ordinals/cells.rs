//! The cell file format: unions of order intervals cut by rank windows.

use serde::{Deserialize, Serialize};

use crate::ordinals::ordinal::Ordinal;
use crate::ordinals::symbolic::{SetDoc, SetError, SymbolicSet};

/// `{α : lo ≤ α < hi, lo_rank ≤ lastexp(α) ≤ hi_rank}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub lo: Ordinal,
    pub hi: Ordinal,
    pub lo_rank: u32,
    pub hi_rank: u32,
}

impl Cell {
    pub fn new(lo: &str, hi: &str, lo_rank: u32, hi_rank: u32) -> Cell {
        Cell {
            lo: lo.parse().expect("ordinal literal"),
            hi: hi.parse().expect("ordinal literal"),
            lo_rank,
            hi_rank,
        }
    }

    pub fn contains(&self, alpha: &Ordinal) -> bool {
        let r = alpha.last_exponent();
        self.lo <= *alpha && *alpha < self.hi && self.lo_rank <= r && r <= self.hi_rank
    }

    pub fn to_set(&self, top: &Ordinal) -> SymbolicSet {
        SymbolicSet::interval(top, &self.lo, &self.hi)
            .intersection(&SymbolicSet::rank_window(top, self.lo_rank, self.hi_rank))
            .expect("same space")
    }

    /// Cell-wise cofinality: `α` is a limit of the cell iff `lo < α ≤ hi`
    /// and the window admits a rank below `lastexp(α)`.
    pub fn has_limit_point(&self, alpha: &Ordinal) -> bool {
        alpha.is_limit()
            && self.lo < *alpha
            && *alpha <= self.hi
            && self.lo_rank <= self.hi_rank
            && self.lo_rank < alpha.last_exponent()
    }
}

pub fn cells_to_set(top: &Ordinal, cells: &[Cell]) -> SymbolicSet {
    cells
        .iter()
        .fold(SymbolicSet::empty(top), |acc, c| acc.union(&c.to_set(top)).expect("same space"))
}

/// Membership of `α` in `d(⋃ cells)` decided directly on the cell list.
pub fn cells_derivative_contains(top: &Ordinal, cells: &[Cell], alpha: &Ordinal) -> bool {
    *alpha <= *top && cells.iter().any(|c| c.has_limit_point(alpha))
}

/// Accepted encodings of a set on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetFile {
    Tree(SetDoc),
    Cells { space_top: Ordinal, cells: Vec<Cell> },
    Bare(Vec<Cell>),
}

impl SetFile {
    /// `default_top` is used for bare cell lists.
    pub fn into_set(self, default_top: Option<&Ordinal>) -> Result<SymbolicSet, SetError> {
        match self {
            SetFile::Tree(doc) => SymbolicSet::from_doc(&doc),
            SetFile::Cells { space_top, cells } => Ok(cells_to_set(&space_top, &cells)),
            SetFile::Bare(cells) => {
                let top = default_top.ok_or_else(|| SetError::Malformed("cell list without a space top".into()))?;
                Ok(cells_to_set(top, &cells))
            }
        }
    }
}
