use nalgebra::{DMatrix, DVector};

use crate::fields::{maurer_cartan_pullback, GroupValuedField, LieValuedForm, MatrixField};
use crate::liealg::{
    centraliser_membership, exponential, logarithm, normaliser_membership,
    stabiliser_membership, LieAlgebraModel, RepresentationModel, Splitting,
};
use crate::{Error, Result};

use super::LocalConnection;

/// An admissibility-checked deformation field `h` together with the
/// splitting it acts through.
///
/// Construction goes through [`check_admissibility`]; a setup therefore
/// always satisfies the normaliser criterion at every evaluation point.
#[derive(Debug, Clone)]
pub struct DeformationSetup {
    splitting: Splitting,
    h: GroupValuedField,
    worst_normaliser_residual: f64,
    centraliser_valued: bool,
    constant: bool,
    conformal: bool,
}

impl DeformationSetup {
    pub fn splitting(&self) -> &Splitting {
        &self.splitting
    }

    pub fn h(&self) -> &GroupValuedField {
        &self.h
    }

    pub fn worst_normaliser_residual(&self) -> f64 {
        self.worst_normaliser_residual
    }

    /// `h(x)` commutes with `𝔤` everywhere.
    pub fn is_centraliser_valued(&self) -> bool {
        self.centraliser_valued
    }

    /// `h` is syntactically constant.
    pub fn is_constant(&self) -> bool {
        self.constant
    }

    /// `h(x)` is a positive multiple of the identity everywhere.
    pub fn is_conformal(&self) -> bool {
        self.conformal
    }

    /// Setup for the pointwise inverse field `h^{-1}`, admissible
    /// whenever `h` is since the normaliser is a group.
    pub fn inverse(&self) -> Result<DeformationSetup> {
        check_admissibility(&self.h.pointwise_inverse()?, &self.splitting)
    }
}

/// Verifies the normaliser criterion for `h` pointwise on the evaluation
/// set and records the centraliser/constant/conformal flags.
///
/// Fails hard with the worst offending point when `h` leaves the
/// normaliser; downstream operations only accept checked setups.
pub fn check_admissibility(h: &GroupValuedField, split: &Splitting) -> Result<DeformationSetup> {
    if h.matrix_size() != split.matrix_size() {
        return Err(Error::SizeMismatch(format!(
            "deformation field of size {} against a splitting of size {}",
            h.matrix_size(),
            split.matrix_size()
        )));
    }
    let (ok, residual, point) = h.validate();
    if !ok {
        return Err(Error::FieldNotInGroup { residual, point });
    }

    let mut worst = 0.0_f64;
    let mut worst_point = Vec::new();
    let mut centraliser = true;
    let mut conformal = true;
    for x in h.chart().evaluation_points() {
        let hx = h.eval(&x)?;
        let (_, r) = normaliser_membership(&hx, split)?;
        if r > worst {
            worst = r;
            worst_point = x.clone();
        }
        if centraliser {
            let (is_central, _) = centraliser_membership(&hx, split.sub())?;
            centraliser &= is_central;
        }
        if conformal {
            let scale = hx[(0, 0)];
            let deviation =
                (&hx - DMatrix::identity(hx.nrows(), hx.ncols()) * scale).norm();
            conformal &= scale > 0.0 && deviation <= 1e-9 * scale.abs().max(1.0);
        }
    }
    if worst > split.tolerance() {
        return Err(Error::Admissibility {
            residual: worst,
            point: worst_point,
        });
    }
    Ok(DeformationSetup {
        splitting: split.clone(),
        h: h.clone(),
        worst_normaliser_residual: worst,
        centraliser_valued: centraliser,
        constant: h.field().is_syntactically_constant(),
        conformal,
    })
}

fn deformed_label(setup: &DeformationSetup, label: &str) -> String {
    format!("R[{}]({label})", setup.h.target().name())
}

/// The connection bijection in local components:
/// `s'^*(f(A)) = Ad(h^{-1}) ∘ s^*A + pr_𝔤 ∘ h^*μ_H`.
///
/// The output is verified to stay `𝔤`-valued at all evaluation points.
pub fn deform_connection(a: &LocalConnection, setup: &DeformationSetup) -> Result<LocalConnection> {
    let split = &setup.splitting;
    a.check_compatible(split)?;
    let h = setup.h.field();
    let h_inv = setup.h.inverse_field()?;
    let conjugated = a.form().sandwich(&h_inv, h)?;
    let mc = maurer_cartan_pullback(&setup.h)?;
    let projected = mc.apply_matrix_map(&split.projector_matrix_sub())?;
    let form = conjugated
        .add(&projected)?
        .with_value_algebra(Some(split.sub().clone()))?;
    LocalConnection::new_compatible(form, split, deformed_label(setup, a.section_label()))
}

/// Pullback of the extended connection:
/// `s'^*(f̂(A)) = Ad(h^{-1}) ∘ s^*A + h^*μ_H`, an `𝔥`-valued form.
pub fn extend_connection_rep(
    a: &LocalConnection,
    setup: &DeformationSetup,
) -> Result<LieValuedForm> {
    let split = &setup.splitting;
    a.check_compatible(split)?;
    let h = setup.h.field();
    let h_inv = setup.h.inverse_field()?;
    let conjugated = a.form().sandwich(&h_inv, h)?;
    let mc = maurer_cartan_pullback(&setup.h)?;
    conjugated
        .add(&mc)?
        .with_value_algebra(Some(split.ambient().clone()))
}

/// Projection of an ambient connection onto the compatible ones:
/// `A ↦ pr_𝔤 ∘ A`.
pub fn restrict_project_connection(
    ambient: &LieValuedForm,
    split: &Splitting,
    section_label: impl Into<String>,
) -> Result<LocalConnection> {
    let form = ambient
        .apply_matrix_map(&split.projector_matrix_sub())?
        .with_value_algebra(Some(split.sub().clone()))?;
    LocalConnection::new(form, section_label)
}

/// The obstruction form `ζ_h` with components `pr_m ∘ h^*μ_H`.
pub fn zeta_form(setup: &DeformationSetup) -> Result<LieValuedForm> {
    let mc = maurer_cartan_pullback(&setup.h)?;
    mc.apply_matrix_map(&setup.splitting.projector_matrix_complement())
}

/// Intrinsic torsion of the structure with respect to a reference
/// connection: `pr_m ∘ A_0` componentwise.
pub fn intrinsic_torsion(a0: &LieValuedForm, split: &Splitting) -> Result<LieValuedForm> {
    a0.apply_matrix_map(&split.projector_matrix_complement())
}

/// Change of intrinsic torsion under the deformation:
/// `Ad(h) ∘ pr_m ∘ Ad(h^{-1}) ∘ s^*A_0' − pr_m ∘ s^*A_0 + Ad(h) ∘ pr_m ∘ h^*μ_H`.
pub fn torsion_change(
    a0: &LieValuedForm,
    a0_prime: &LieValuedForm,
    setup: &DeformationSetup,
) -> Result<LieValuedForm> {
    let split = &setup.splitting;
    let h = setup.h.field();
    let h_inv = setup.h.inverse_field()?;
    let pm = split.projector_matrix_complement();

    let term1 = a0_prime
        .sandwich(&h_inv, h)?
        .apply_matrix_map(&pm)?
        .sandwich(h, &h_inv)?;
    let term2 = a0.apply_matrix_map(&pm)?;
    let mc = maurer_cartan_pullback(&setup.h)?;
    let term3 = mc.apply_matrix_map(&pm)?.sandwich(h, &h_inv)?;
    term1.sub(&term2)?.add(&term3)
}

/// Section change `Ad(g^{-1}) ∘ A + g^*μ_G` for a gauge field `g` valued
/// in `G`.
pub fn gauge_transform(
    a: &LocalConnection,
    g: &GroupValuedField,
    split: &Splitting,
) -> Result<LocalConnection> {
    // g must take values in G itself, not just in the ambient group:
    // check the target's membership rule and that log(g(x)) lies in 𝔤.
    for x in g.chart().evaluation_points() {
        let gx = g.eval(&x)?;
        let mut residual = g.target().membership_residual(&gx);
        if let Ok(log) = logarithm(&gx) {
            residual = residual.max(split.sub().span_residual(&log));
        } else {
            residual = f64::INFINITY;
        }
        if residual > g.target().tolerance() {
            return Err(Error::NotInGroup {
                group: g.target().name().to_string(),
                residual,
            });
        }
    }
    let gf = g.field();
    let g_inv = g.inverse_field()?;
    let conjugated = a.form().sandwich(&g_inv, gf)?;
    let mc = maurer_cartan_pullback(g)?;
    let form = conjugated
        .add(&mc)?
        .with_value_algebra(a.value_algebra().cloned())?;
    LocalConnection::new_compatible(
        form,
        split,
        format!("{}·g", a.section_label()),
    )
}

/// Pullback transport for centraliser-valued deformations:
/// components are copied verbatim, only the section changes.
pub fn central_pullback_deform(
    a: &LocalConnection,
    setup: &DeformationSetup,
) -> Result<LocalConnection> {
    if !setup.is_centraliser_valued() {
        return Err(Error::NotCentraliser);
    }
    LocalConnection::new(a.form().clone(), deformed_label(setup, a.section_label()))
}

/// Constant deformation `ρ(h_0^{-1}) · A · ρ(h_0)` by a fixed normaliser
/// element.
pub fn constant_deform(
    a: &LocalConnection,
    h0: &DMatrix<f64>,
    split: &Splitting,
) -> Result<LocalConnection> {
    let (ok, residual) = normaliser_membership(h0, split)?;
    if !ok {
        return Err(Error::Admissibility {
            residual,
            point: Vec::new(),
        });
    }
    let chart = a.chart().clone();
    let h0_field = MatrixField::from_constant(chart.clone(), h0);
    let h0_inv = MatrixField::from_constant(
        chart,
        &h0.clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("constant deformation element".into()))?,
    );
    let form = a
        .form()
        .sandwich(&h0_inv, &h0_field)?
        .with_value_algebra(Some(split.sub().clone()))?;
    LocalConnection::new_compatible(form, split, format!("R[h0]({})", a.section_label()))
}

/// A defining section in representation data: the reference vector
/// `τ_0` whose `G`-orbit is trivial.
#[derive(Debug, Clone)]
pub struct DefiningSectionModel {
    rep: RepresentationModel,
}

impl DefiningSectionModel {
    /// Verifies `G ⊆ Stab(τ_0)` on sampled group elements
    /// `exp(t E_a)`, `t ∈ {±1, ±0.5}`.
    pub fn new(rep: RepresentationModel, sub: &LieAlgebraModel) -> Result<Self> {
        if rep.tau0().is_none() {
            return Err(Error::MissingTau0);
        }
        for e in sub.basis() {
            for t in [1.0, -1.0, 0.5, -0.5] {
                let g = exponential(&(e * t))?;
                let (ok, residual) = stabiliser_membership(&g, &rep)?;
                if !ok {
                    return Err(Error::Invalid(format!(
                        "reference vector is not G-invariant (residual {residual:.3e})"
                    )));
                }
            }
        }
        Ok(Self { rep })
    }

    pub fn rep(&self) -> &RepresentationModel {
        &self.rep
    }
}

/// Components of the deformed defining section relative to the original
/// section: `ρ(h(x)) · τ_0`.
pub fn deform_defining_section(
    ds: &DefiningSectionModel,
    setup: &DeformationSetup,
    x: &[f64],
) -> Result<DVector<f64>> {
    let tau0 = ds.rep().tau0().ok_or(Error::MissingTau0)?;
    let hx = setup.h.eval(x)?;
    let m = ds.rep().matrix_for(&hx)?;
    Ok(m * tau0)
}

/// Diagnostic for the composition question: the worst componentwise gap
/// between deforming by `h1·h2` in one step and deforming by `h1` then
/// `h2`.
///
/// Equality holds whenever `Ad` of the normaliser preserves `m`; the
/// value is reported rather than asserted.
pub fn composition_discrepancy(
    a: &LocalConnection,
    h1: &GroupValuedField,
    h2: &GroupValuedField,
    split: &Splitting,
) -> Result<f64> {
    let setup1 = check_admissibility(h1, split)?;
    let step1 = deform_connection(a, &setup1)?;
    let setup2 = check_admissibility(h2, split)?;
    let two_step = deform_connection(&step1, &setup2)?;

    let product = h1.field().matmul(h2.field())?;
    let combined = GroupValuedField::new(product, h1.target().clone())?;
    let setup12 = check_admissibility(&combined, split)?;
    let one_step = deform_connection(a, &setup12)?;

    one_step.form().worst_difference(two_step.form())
}
