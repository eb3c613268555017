//! Explicit ordinary Dirichlet series whose partial sums stay bounded, and in
//! fact converge, on a vertical strip where the series is neither absolutely
//! nor uniformly convergent.
//!
//! The series is assembled level by level. Level `L` contributes the terms
//! `n = p_{i_1} ... p_{i_M}` indexed by a product of prime blocks, with
//! coefficients read off a multilinear Walsh-type polynomial `Q^L`.

pub mod ascent;
pub mod bounds;
pub mod error;
pub mod experiments;
pub mod kronecker;
pub mod lattice;
pub mod params;
pub mod primes;
pub mod series;
pub mod walsh;

/// Version tag carried by every JSON report.
pub const SCHEMA_VERSION: u32 = 1;

pub use error::{Error, Result};
pub use lattice::{build_level, build_levels, LevelLattice, MultiIndex};
pub use params::{parse_profile, ConstructionParams, Exponent};
pub use series::DirichletSeries;
pub use walsh::{TorusPoint, WalshPolynomial};
