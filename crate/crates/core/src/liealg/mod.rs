//! Matrix Lie groups and algebras as explicit numerical objects.
//!
//! Everything is realized over the reals: algebras are spans of explicit
//! square matrices, groups are membership predicates, and the structural
//! conditions of the deformation theory (normaliser, centraliser,
//! stabiliser, invariant splittings) become pointwise residual tests.

mod algebra;
mod catalog;
mod group;
mod splitting;

pub use algebra::{adjoint, bracket, exponential, frobenius, logarithm, LieAlgebraModel};
pub use catalog::{catalog_algebra, catalog_group, catalog_names};
pub use group::{
    centraliser_membership, normaliser_membership, stabiliser_membership, GroupModel,
    MembershipRule, RepresentationModel,
};
pub use splitting::{build_splitting, check_splitting_invariance, Splitting};

/// Default tolerance for membership and invariance tests.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Tolerance for pure matrix identities (no modeling residual involved).
pub const MATRIX_IDENTITY_TOLERANCE: f64 = 1e-12;
