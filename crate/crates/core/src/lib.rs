//! Normal deformations of G-structures, computed on local chart data.
//!
//! The crate is organized in four layers:
//!
//! * [`liealg`] — matrix Lie groups and algebras as explicit numerical
//!   objects: bases, brackets, exponentials, adjoint actions, invariant
//!   splittings and the normaliser/centraliser/stabiliser predicates.
//! * [`fields`] — charts, a small scalar expression language with exact
//!   symbolic differentiation, matrix- and group-valued fields,
//!   Maurer–Cartan pullbacks and exterior calculus.
//! * [`deform`] — the deformation engine: admissibility, the connection
//!   bijection, the obstruction form, intrinsic torsion and its change,
//!   gauge transformations, conformal and constant specializations and a
//!   Levi-Civita helper.
//! * [`instanton`] — instanton bundles of metric G-structures, the
//!   pointwise preservation criterion and instanton verification, with a
//!   Hodge-duality oracle in dimension four.

pub mod deform;
pub mod error;
pub mod fields;
pub mod instanton;
pub mod liealg;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
