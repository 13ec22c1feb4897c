//! Exact and numerical tools for the 3-diagonal pentagram-type map acting on
//! affine classes of centrally symmetric octagons.
//!
//! Formulas are written once against [`scalar::Scalar`] and run on exact
//! rationals, floats, or dual numbers for exact derivatives.

pub mod error;
pub mod flow;
pub mod hamiltonian;
pub mod invariants;
pub mod maps;
pub mod octagon;
pub mod polynomial;
pub mod poncelet;
pub mod scalar;

pub use error::{Error, Result};
pub use flow::{LevelSpec, Trajectory};
pub use hamiltonian::TangentVec;
pub use invariants::InvariantReport;
pub use maps::{GenWord, Generator};
pub use octagon::{CanonCoords, Octagon};
pub use polynomial::MPoly;
pub use poncelet::{LftLevel, PlanePoint};
pub use scalar::QuadRat;
pub use scalar::{Dual4, Field4, Rat, Scalar};
