//! Computational toolkit for elliptic theory on manifolds with corners.
//!
//! The crate is organised bottom-up:
//!
//! * [`complex`] and [`polytopes`]: combinatorial face lattices with
//!   coverings and permutation structure groups.
//! * [`dual`]: the stratified dual space, cone fibrations in logarithmic
//!   coordinates and ray-limit membership tests.
//! * [`geometry`]: transition factorization, the conormal pairing and the
//!   partition-of-unity gluing of exponential maps.
//! * [`operators`]: lattice models, Fourier multipliers, corner measures and
//!   group-invariant subspaces.
//! * [`localization`]: restricted norms, ideal profiles, gluing and the
//!   localization Fredholm check for parameter-dependent families.
//! * [`symbols`]: symbol tuples, their compatibility conditions, composition
//!   and the recursive ellipticity test.

pub mod complex;
pub mod dual;
pub mod error;
pub mod geometry;
pub mod localization;
pub mod operators;
pub mod perm;
pub mod polytopes;
pub mod symbols;

pub use complex::{CornerComplex, FaceId, Polytope};
pub use error::{CornerError, Result};
pub use perm::{Perm, PermGroup};
