use crate::fields::{Expr, GroupValuedField, LieValuedForm, MatrixField};
use crate::liealg::{build_splitting, catalog_algebra, catalog_group};
use crate::{Error, Result};

use super::engine::{
    central_pullback_deform, check_admissibility, deform_connection, zeta_form,
};
use super::{FrameField, LocalConnection};

/// Result of a conformal rescaling `h = φ·1_D`.
#[derive(Debug, Clone)]
pub struct ConformalDeformation {
    /// Deformed connection; its components relative to the rescaled frame
    /// equal the input components relative to the original frame.
    pub connection: LocalConnection,
    /// Rescaled frame `e' = φ·e`.
    pub frame: FrameField,
    /// The obstruction form, `d log(φ) · 1_D`.
    pub zeta: LieValuedForm,
    /// Worst componentwise gap between the two available transports (the
    /// general deformation formula and the centraliser pullback); zero up
    /// to roundoff for `G ⊆ SO(D)`.
    pub path_coincidence_residual: f64,
}

/// Conformal rescaling of a metric G-structure by a positive scalar
/// field.
///
/// Requires the connection to be valued in some `𝔤 ⊆ so(D)`; the ambient
/// splitting `gl(D) = 𝔤 ⊕ m̃` is assembled internally.
pub fn conformal_deform(
    a: &LocalConnection,
    phi: &Expr,
    frame: &FrameField,
) -> Result<ConformalDeformation> {
    let g_alg = a
        .value_algebra()
        .ok_or_else(|| Error::Invalid("conformal deformation needs a 𝔤-valued connection".into()))?
        .clone();
    let d = a.matrix_size();
    let chart = a.chart().clone();

    for x in chart.evaluation_points() {
        let v = phi.eval(&x);
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositiveScale { value: v, point: x });
        }
    }

    let gl = catalog_algebra(&format!("gl({d})"))?;
    let split = build_splitting(&gl, &g_alg)?;

    let h_field = MatrixField::scalar_identity(chart.clone(), d, phi);
    let h = GroupValuedField::new(h_field, catalog_group(&format!("gl({d})"))?)?;
    let setup = check_admissibility(&h, &split)?;

    let theorem_path = deform_connection(a, &setup)?;
    let pullback_path = central_pullback_deform(a, &setup)?;
    let path_coincidence_residual = theorem_path
        .form()
        .worst_difference(pullback_path.form())?;

    let zeta = zeta_form(&setup)?;
    let scaled_frame = frame.scaled(phi)?;

    Ok(ConformalDeformation {
        connection: pullback_path,
        frame: scaled_frame,
        zeta,
        path_coincidence_residual,
    })
}

/// Worst metric-compatibility residual of a connection in a frame:
/// `max |A(e_i) + A(e_i)ᵀ|` over evaluation points, which is the failure
/// of `∇g = 0` expressed in frame components.
pub fn metric_compatibility_residual(a: &LocalConnection, frame: &FrameField) -> Result<f64> {
    if a.chart() != frame.chart() || a.matrix_size() != frame.dim() {
        return Err(Error::SizeMismatch(
            "connection and frame must share chart and dimension".into(),
        ));
    }
    let d = frame.dim();
    let mut worst = 0.0_f64;
    for x in a.chart().evaluation_points() {
        let e = frame.eval(&x)?;
        let comps: Vec<_> = (0..d).map(|mu| a.form().eval_component(mu, &x)).collect();
        for i in 0..d {
            let mut m = nalgebra::DMatrix::zeros(d, d);
            for (mu, comp) in comps.iter().enumerate() {
                m += comp * e[(mu, i)];
            }
            let sym = &m + m.transpose();
            worst = worst.max(sym.amax());
        }
    }
    Ok(worst)
}
