//! Empirical and conjectured pair correlation of lattice angles.

mod empirical;
mod fxi;
mod grid;
mod theory;

pub use empirical::*;
pub use fxi::*;
pub use grid::*;
pub use theory::*;
