//! A workbench for the provability logic GL.
//!
//! The crate covers the usual relational side (a tableau decision procedure,
//! Kripke models, the universal `K_n` trees and bounded morphisms), a finite
//! surrogate of the normal-measure semantics with its Mitchell order, and
//! ordinal spaces below `ω^ω` under the interval topology and the
//! end-segment filters.

pub mod formula;
pub mod kripke;
pub mod decide;
pub mod measures;
pub mod ordinals;
pub mod cli;
