//! The normal-deformation engine: admissibility of the deformation
//! field, the connection bijection, the obstruction form, intrinsic
//! torsion and its change, gauge transformations, the conformal and
//! constant specializations, defining-section transport and a
//! Levi-Civita helper for metric structures.

mod conformal;
mod connection;
mod engine;
mod levi_civita;

pub use conformal::{conformal_deform, metric_compatibility_residual, ConformalDeformation};
pub use connection::{FrameField, LocalConnection};
pub use engine::{
    central_pullback_deform, check_admissibility, composition_discrepancy, constant_deform,
    deform_connection, deform_defining_section, extend_connection_rep, gauge_transform,
    intrinsic_torsion, restrict_project_connection, torsion_change, zeta_form,
    DefiningSectionModel, DeformationSetup,
};
pub use levi_civita::{levi_civita_connection, levi_civita_residuals};
