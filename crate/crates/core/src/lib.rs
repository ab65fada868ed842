//! Pair correlation of angles in hyperbolic lattices PSL₂(ℤ)ω with rational
//! base-point data: exact orbit enumeration, empirical and conjectural pair
//! correlation densities, the volume bodies behind them, closed geodesics
//! through ρ, and the Selberg/Harish-Chandra transform of the kernel.

pub mod ballenum;
pub mod error;
pub mod geodesics;
pub mod modgroup;
pub mod paircorr;
pub mod quad;
pub mod rational;
pub mod selberg;
pub mod special;
pub mod volumes;

pub use error::{Error, Result};
