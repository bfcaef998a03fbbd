//! Combinatorial models of the spaces of plumbers' curves.

pub mod combinatorics;
pub mod complex;
pub mod error;
pub mod filtration;
pub mod geometry;
pub mod homology;
pub mod invariants;
pub mod vassiliev;

pub use combinatorics::{
    AdmissibleSet, Cell, CellName, DecoratedTransposition, Direction, SingularityPartition, TriplePerm,
};
pub use error::{Error, Result};
