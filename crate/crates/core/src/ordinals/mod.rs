//! Ordinals below `ω^ω` as topological spaces: Cantor normal form
//! arithmetic, a set algebra closed under the derivative, interval and
//! end-segment semantics, Γ-labelings by ordinal blocks, and countermodels
//! pulled back from finite trees.

pub mod cells;
pub mod countermodel;
pub mod gamma_end;
pub mod natset;
pub mod ordinal;
pub mod semantics;
pub mod symbolic;

pub use cells::{cells_derivative_contains, cells_to_set, Cell, SetFile};
pub use countermodel::{
    interval_countermodel, interval_countermodel_for, interval_preimages, CountermodelError, IntervalCountermodel,
};
pub use gamma_end::{gamma_end_candidate, gamma_end_validate, GammaEnd, GammaEndViolation};
pub use natset::NatSet;
pub use ordinal::{ord_add, ord_cmp, Ordinal, OrdinalError};
pub use semantics::{end_segment_model_check, interval_model_check, OrdinalValuation};
pub use symbolic::{NodeDoc, PartDoc, SetDoc, SetError, SymbolicSet};

/// `lastexp(α)`: 0 for 0 and successors, the final CNF exponent otherwise.
pub fn last_exponent(a: &Ordinal) -> u32 {
    a.last_exponent()
}

/// `d(X)`.
pub fn derivative(x: &SymbolicSet) -> SymbolicSet {
    x.derivative()
}
