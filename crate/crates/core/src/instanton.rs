//! Instanton bundles of metric G-structures: the identification of
//! 2-forms with antisymmetric matrices in an orthonormal frame, the
//! pointwise preservation criterion for deformations, and instanton
//! verification, with a Hodge-duality oracle in dimension four.

use nalgebra::DMatrix;

use crate::deform::{DeformationSetup, FrameField};
use crate::fields::LieValuedForm;
use crate::liealg::{LieAlgebraModel, Splitting, DEFAULT_TOLERANCE};
use crate::{Error, Result};

/// The frame-adapted matrix picture of a gauge-algebra-valued 2-form:
/// for each direction of the gauge algebra basis, the antisymmetric
/// `D×D` coefficient matrix in the orthonormal coframe.
#[derive(Debug, Clone)]
pub struct TwoFormMatrixRep {
    frame: FrameField,
    gauge_basis: LieAlgebraModel,
    form: LieValuedForm,
}

impl TwoFormMatrixRep {
    pub fn frame(&self) -> &FrameField {
        &self.frame
    }

    pub fn gauge_basis(&self) -> &LieAlgebraModel {
        &self.gauge_basis
    }

    pub fn directions(&self) -> usize {
        self.gauge_basis.dim()
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// The orthonormal-coframe coefficient matrices
    /// `ω^c_{ab} = e^μ_a F^c_{μν} e^ν_b` for every gauge direction `c`,
    /// stored antisymmetrically.
    pub fn components_at(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let d = self.dim();
        let e = self.frame.eval(x)?;
        let mut out = vec![DMatrix::zeros(d, d); self.directions()];
        for mu in 0..d {
            for nu in (mu + 1)..d {
                let value = self.form.eval_pair(mu, nu, x);
                let (coeffs, residual) = self.gauge_basis.coefficients_of(&value)?;
                if residual > self.gauge_basis.tolerance().max(1e-8) {
                    return Err(Error::Invalid(format!(
                        "2-form value leaves the gauge algebra at {x:?} (residual {residual:.3e})"
                    )));
                }
                for (c, out_c) in out.iter_mut().enumerate() {
                    let f = coeffs[c];
                    if f == 0.0 {
                        continue;
                    }
                    for a in 0..d {
                        for b in 0..d {
                            out_c[(a, b)] += f * (e[(mu, a)] * e[(nu, b)] - e[(nu, a)] * e[(mu, b)]);
                        }
                    }
                }
            }
        }
        for m in &mut out {
            let anti = (&*m - m.transpose()) * 0.5;
            *m = anti;
        }
        Ok(out)
    }

    /// Round-trip back to coordinate-coframe coefficients,
    /// `F^c_{μν} = β^a_μ ω^c_{ab} β^b_ν`.
    pub fn coordinate_components_at(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let beta = self.frame.coframe()?.eval(x);
        self.components_at(x)?
            .into_iter()
            .map(|omega| Ok(beta.transpose() * omega * &beta))
            .collect()
    }
}

/// Converts a gauge-algebra-valued 2-form from coordinate-coframe to
/// orthonormal-coframe components over a frame.
pub fn two_form_components(
    f: &LieValuedForm,
    frame: &FrameField,
    gauge_basis: &LieAlgebraModel,
) -> Result<TwoFormMatrixRep> {
    if f.degree() != 2 {
        return Err(Error::UnsupportedDegree(f.degree()));
    }
    if f.chart() != frame.chart() {
        return Err(Error::Invalid("form and frame must share a chart".into()));
    }
    if f.matrix_size() != gauge_basis.matrix_size() {
        return Err(Error::SizeMismatch(format!(
            "form values are {}x{} but the gauge algebra has size {}",
            f.matrix_size(),
            f.matrix_size(),
            gauge_basis.matrix_size()
        )));
    }
    Ok(TwoFormMatrixRep {
        frame: frame.clone(),
        gauge_basis: gauge_basis.clone(),
        form: f.clone(),
    })
}

/// The pointwise coframe action on 2-form matrices:
/// `ω ↦ hᵀ ω h` in the standard representation.
pub fn phi_map(h: &DMatrix<f64>, omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if h.shape() != omega.shape() || h.nrows() != h.ncols() {
        return Err(Error::SizeMismatch(format!(
            "phi map of {}x{} on {}x{}",
            h.nrows(),
            h.ncols(),
            omega.nrows(),
            omega.ncols()
        )));
    }
    Ok(h.transpose() * omega * h)
}

/// Whether the deformation preserves the instanton bundle:
/// `Φ_{h(x)}` must map `𝔤 ⊂ so(D)` into itself at every point.
///
/// Tested on a `𝔤`-basis (sufficient by linearity); each image is
/// re-antisymmetrized and normalized before projecting, since span
/// membership is scale-invariant.
pub fn instanton_bundle_preserved(
    setup: &DeformationSetup,
    g_alg: &LieAlgebraModel,
    split: &Splitting,
) -> Result<(bool, f64)> {
    let mut worst = 0.0_f64;
    for x in setup.h().chart().evaluation_points() {
        let hx = setup.h().eval(&x)?;
        for e in g_alg.basis() {
            let image = phi_map(&hx, e)?;
            let anti = (&image - image.transpose()) * 0.5;
            let norm = anti.norm();
            if norm < 1e-14 {
                continue;
            }
            let normalized = anti / norm;
            worst = worst.max(split.distance_from_sub(&normalized));
        }
    }
    Ok((worst <= split.tolerance(), worst))
}

/// Pass/fail result of an instanton check, with the worst offender and a
/// per-gauge-direction residual table.
#[derive(Debug, Clone)]
pub struct InstantonVerdict {
    pub is_instanton: bool,
    pub worst_residual: f64,
    pub worst_point: Vec<f64>,
    pub per_direction: Vec<f64>,
    pub tolerance: f64,
}

/// Verifies the instanton condition: for every gauge direction, the
/// orthonormal-coframe coefficient matrix of the field strength must lie
/// in `𝔤 ⊂ so(D)` at every evaluation point.
pub fn instanton_check(
    f: &LieValuedForm,
    frame: &FrameField,
    g_alg: &LieAlgebraModel,
    split: &Splitting,
    gauge_basis: &LieAlgebraModel,
) -> Result<InstantonVerdict> {
    let rep = two_form_components(f, frame, gauge_basis)?;
    let mut per_direction = vec![0.0_f64; rep.directions()];
    let mut worst = 0.0_f64;
    let mut worst_point = Vec::new();
    for x in frame.chart().evaluation_points() {
        for (c, omega) in rep.components_at(&x)?.into_iter().enumerate() {
            let r = if omega.norm() < 1e-14 {
                0.0
            } else {
                split.distance_from_sub(&omega)
            };
            per_direction[c] = per_direction[c].max(r);
            if r > worst {
                worst = r;
                worst_point = x.clone();
            }
        }
    }
    let tolerance = g_alg.tolerance().max(split.tolerance());
    Ok(InstantonVerdict {
        is_instanton: worst <= tolerance,
        worst_residual: worst,
        worst_point,
        per_direction,
        tolerance,
    })
}

fn epsilon4(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let perm = [a, b, c, d];
    let mut sign = 1.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if perm[i] == perm[j] {
                return 0.0;
            }
            if perm[i] > perm[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Independent duality oracle in dimension 4: compares `ω` with its
/// Hodge dual `½ ε_{abcd} ω_{cd}` at every evaluation point and reports
/// `(self-dual, anti-self-dual)`.
pub fn hodge_selfdual_oracle(rep: &TwoFormMatrixRep) -> Result<(bool, bool)> {
    if rep.dim() != 4 {
        return Err(Error::SizeMismatch(format!(
            "Hodge oracle requires dimension 4, got {}",
            rep.dim()
        )));
    }
    let mut sd_residual = 0.0_f64;
    let mut asd_residual = 0.0_f64;
    for x in rep.frame().chart().evaluation_points() {
        for omega in rep.components_at(&x)? {
            let mut star = DMatrix::zeros(4, 4);
            for a in 0..4 {
                for b in 0..4 {
                    let mut sum = 0.0;
                    for c in 0..4 {
                        for d in 0..4 {
                            sum += epsilon4(a, b, c, d) * omega[(c, d)];
                        }
                    }
                    star[(a, b)] = 0.5 * sum;
                }
            }
            sd_residual = sd_residual.max((&star - &omega).norm());
            asd_residual = asd_residual.max((&star + &omega).norm());
        }
    }
    Ok((
        sd_residual <= DEFAULT_TOLERANCE,
        asd_residual <= DEFAULT_TOLERANCE,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::check_admissibility;
    use crate::fields::{parse_expression, Chart, GroupValuedField, MatrixField};
    use crate::liealg::{
        build_splitting, catalog_algebra, catalog_group, exponential,
    };

    fn l4(a: usize, b: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(4, 4);
        m[(a, b)] = 1.0;
        m[(b, a)] = -1.0;
        m
    }

    fn chart4() -> Chart {
        Chart::unit_cube(4, 2).unwrap()
    }

    fn so4_su2_split() -> Splitting {
        build_splitting(
            &catalog_algebra("so(4)").unwrap(),
            &catalog_algebra("su2_plus_in_so4").unwrap(),
        )
        .unwrap()
    }

    /// Abelian gauge algebra so(2); a single direction with basis L₁₂.
    fn gauge() -> LieAlgebraModel {
        catalog_algebra("so(2)").unwrap()
    }

    /// A gauge 2-form on the 4-cube with constant coefficients c_{μν}
    /// times the so(2) generator.
    fn abelian_two_form(chart: &Chart, coeffs: [f64; 6]) -> LieValuedForm {
        let mut gen = DMatrix::zeros(2, 2);
        gen[(0, 1)] = 1.0;
        gen[(1, 0)] = -1.0;
        let comps = coeffs
            .iter()
            .map(|c| MatrixField::from_constant(chart.clone(), &(&gen * *c)))
            .collect();
        LieValuedForm::new(chart.clone(), 2, Some(gauge()), comps).unwrap()
    }

    #[test]
    fn identity_frame_keeps_components() {
        let chart = chart4();
        let frame = FrameField::identity(chart.clone()).unwrap();
        // F = dx1∧dx2 + dx3∧dx4 ⊗ T.
        let f = abelian_two_form(&chart, [1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let rep = two_form_components(&f, &frame, &gauge()).unwrap();
        let omega = rep.components_at(&[0.5; 4]).unwrap();
        assert_eq!(omega.len(), 1);
        assert!((&omega[0] - (l4(0, 1) + l4(2, 3))).norm() < 1e-14);
    }

    #[test]
    fn scaled_frame_scales_components_quadratically() {
        let chart = chart4();
        let identity = FrameField::identity(chart.clone()).unwrap();
        let phi = parse_expression("1 + x1^2", &chart).unwrap();
        let scaled = identity.scaled(&phi).unwrap();
        let f = abelian_two_form(&chart, [1.0, 0.5, 0.0, -0.3, 0.0, 1.0]);
        let base = two_form_components(&f, &identity, &gauge()).unwrap();
        let rescaled = two_form_components(&f, &scaled, &gauge()).unwrap();
        let x = [0.5, 0.25, 0.75, 0.5];
        let phi_x: f64 = 1.0 + 0.25;
        let a = base.components_at(&x).unwrap();
        let b = rescaled.components_at(&x).unwrap();
        assert!((&b[0] - &a[0] * phi_x * phi_x).norm() < 1e-12);
    }

    #[test]
    fn coordinate_round_trip() {
        let chart = chart4();
        // Non-trivial frame: diagonal stretch varying over the chart.
        let rows: Vec<Vec<String>> = (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        if i == j {
                            format!("1 + 0.{}*x{}", i + 1, i + 1)
                        } else {
                            "0".to_string()
                        }
                    })
                    .collect()
            })
            .collect();
        let frame =
            FrameField::new(MatrixField::from_strings(chart.clone(), &rows).unwrap()).unwrap();
        let f = abelian_two_form(&chart, [0.7, -1.2, 0.4, 2.0, 0.1, -0.6]);
        let rep = two_form_components(&f, &frame, &gauge()).unwrap();
        let x = [0.3, 0.6, 0.2, 0.8];
        let back = rep.coordinate_components_at(&x).unwrap();
        let mut original = DMatrix::zeros(4, 4);
        for mu in 0..4 {
            for nu in (mu + 1)..4 {
                let v = f.eval_pair(mu, nu, &x)[(0, 1)];
                original[(mu, nu)] = v;
                original[(nu, mu)] = -v;
            }
        }
        assert!((&back[0] - original).norm() < 1e-10);
    }

    #[test]
    fn phi_map_examples() {
        let omega = l4(0, 1) + l4(2, 3) * 0.5;
        // Identity.
        let id = DMatrix::identity(4, 4);
        assert_eq!(phi_map(&id, &omega).unwrap(), omega);
        // Scalar: φ² scaling.
        let h = DMatrix::identity(4, 4) * 1.7;
        assert!((phi_map(&h, &omega).unwrap() - &omega * 1.7 * 1.7).norm() < 1e-12);
        // Orthogonal: conjugation by the inverse.
        let r = exponential(&(l4(0, 2) * 0.6)).unwrap();
        let via_phi = phi_map(&r, &omega).unwrap();
        let conj = r.transpose() * &omega * &r;
        assert!((via_phi - conj).norm() < 1e-14);
        // Size mismatch.
        assert!(phi_map(&DMatrix::identity(3, 3), &omega).is_err());
    }

    #[test]
    fn phi_map_is_linear() {
        let h = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, 0.3, 0.0, 0.1, 0.0, 1.0, 0.2, 0.0, 0.4, 0.0, 1.5, 0.0, 0.0, 0.0, 0.0, 0.8,
            ],
        );
        let w1 = l4(0, 1) * 1.3;
        let w2 = l4(1, 3) * -0.4 + l4(0, 2);
        let lhs = phi_map(&h, &(&w1 * 2.0 + &w2 * -0.7)).unwrap();
        let rhs = phi_map(&h, &w1).unwrap() * 2.0 + phi_map(&h, &w2).unwrap() * -0.7;
        assert!((lhs - rhs).norm() < 1e-12);
    }

    fn setup_for_constant(h0: &DMatrix<f64>, split: &Splitting, group: &str) -> DeformationSetup {
        let chart = chart4();
        let h = GroupValuedField::new(
            MatrixField::from_constant(chart, h0),
            catalog_group(group).unwrap(),
        )
        .unwrap();
        check_admissibility(&h, split).unwrap()
    }

    #[test]
    fn preservation_for_orthogonal_and_scalar_h() {
        let split = so4_su2_split();
        let g_alg = catalog_algebra("su2_plus_in_so4").unwrap();

        // h ∈ SU(2)_+ ⊂ SO(4) ∩ N(G).
        let h0 = exponential(&((l4(0, 1) + l4(2, 3)) * 0.7)).unwrap();
        let setup = setup_for_constant(&h0, &split, "so(4)");
        let (ok, r) = instanton_bundle_preserved(&setup, &g_alg, &split).unwrap();
        assert!(ok && r <= 1e-10, "residual {r}");

        // h = φ·1 with φ = 3 (admissible over gl(4) = su(2)_+ ⊕ m̃).
        let gl_split = build_splitting(&catalog_algebra("gl(4)").unwrap(), &g_alg).unwrap();
        let setup = setup_for_constant(&(DMatrix::identity(4, 4) * 3.0), &gl_split, "gl(4)");
        let (ok, r) = instanton_bundle_preserved(&setup, &g_alg, &split).unwrap();
        assert!(ok && r <= 1e-10, "residual {r}");
    }

    #[test]
    fn diagonal_stretch_breaks_preservation() {
        // h = diag(2,1,1,1): Φ_h(L12+L34) = 2L12+L34 acquires the
        // su(2)_- component (L12−L34)/2. Oracle: explicit projection.
        let split = so4_su2_split();
        let g_alg = catalog_algebra("su2_plus_in_so4").unwrap();
        let trivial_split = build_splitting(
            &catalog_algebra("gl(4)").unwrap(),
            &catalog_algebra("trivial(4)").unwrap(),
        )
        .unwrap();
        let h0 =
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0, 1.0, 1.0]));
        let setup = setup_for_constant(&h0, &trivial_split, "gl(4)");
        let (ok, r) = instanton_bundle_preserved(&setup, &g_alg, &split).unwrap();
        assert!(!ok);
        assert!(r >= 0.1, "residual {r}");

        // Projector oracle for the worst direction.
        let image = phi_map(&h0, &(l4(0, 1) + l4(2, 3))).unwrap();
        assert!((&image - (l4(0, 1) * 2.0 + l4(2, 3))).norm() < 1e-14);
        let minus_part = split.project_complement(&image);
        assert!((minus_part - (l4(0, 1) - l4(2, 3)) * 0.5).norm() < 1e-12);
    }

    #[test]
    fn scaling_does_not_change_preservation() {
        let split = so4_su2_split();
        let g_alg = catalog_algebra("su2_plus_in_so4").unwrap();
        let trivial_split = build_splitting(
            &catalog_algebra("gl(4)").unwrap(),
            &catalog_algebra("trivial(4)").unwrap(),
        )
        .unwrap();
        for h0 in [
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0, 1.0, 1.0])),
            exponential(&(l4(1, 2) * 0.4)).unwrap(),
        ] {
            let base = setup_for_constant(&h0, &trivial_split, "gl(4)");
            let scaled = setup_for_constant(&(&h0 * 2.5), &trivial_split, "gl(4)");
            let (ok_a, _) = instanton_bundle_preserved(&base, &g_alg, &split).unwrap();
            let (ok_b, _) = instanton_bundle_preserved(&scaled, &g_alg, &split).unwrap();
            assert_eq!(ok_a, ok_b);
        }
    }

    #[test]
    fn instanton_check_self_dual_and_anti() {
        let chart = chart4();
        let frame = FrameField::identity(chart.clone()).unwrap();
        let split = so4_su2_split();
        let g_alg = catalog_algebra("su2_plus_in_so4").unwrap();

        let sd = abelian_two_form(&chart, [1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let verdict = instanton_check(&sd, &frame, &g_alg, &split, &gauge()).unwrap();
        assert!(verdict.is_instanton, "residual {}", verdict.worst_residual);

        let asd = abelian_two_form(&chart, [1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        let verdict = instanton_check(&asd, &frame, &g_alg, &split, &gauge()).unwrap();
        assert!(!verdict.is_instanton);
        assert!((verdict.worst_residual - 2.0).abs() < 1e-12);

        let zero = abelian_two_form(&chart, [0.0; 6]);
        let verdict = instanton_check(&zero, &frame, &g_alg, &split, &gauge()).unwrap();
        assert!(verdict.is_instanton);
        assert_eq!(verdict.worst_residual, 0.0);
    }

    #[test]
    fn full_so2_structure_has_no_obstruction() {
        // G = so(2) on R²: m = 0, every 2-form is an instanton.
        let chart = Chart::unit_cube(2, 3).unwrap();
        let frame = FrameField::identity(chart.clone()).unwrap();
        let so2 = catalog_algebra("so(2)").unwrap();
        let split = build_splitting(&so2, &so2).unwrap();
        let mut gen = DMatrix::zeros(2, 2);
        gen[(0, 1)] = 1.0;
        gen[(1, 0)] = -1.0;
        let comp = MatrixField::from_constant(chart.clone(), &gen)
            .scale(&parse_expression("2*x1", &chart).unwrap());
        let f = LieValuedForm::new(chart, 2, Some(so2.clone()), vec![comp]).unwrap();
        let verdict = instanton_check(&f, &frame, &so2, &split, &so2).unwrap();
        assert!(verdict.is_instanton);
    }

    #[test]
    fn hodge_oracle_examples() {
        let chart = chart4();
        let frame = FrameField::identity(chart.clone()).unwrap();

        let sd = abelian_two_form(&chart, [1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let rep = two_form_components(&sd, &frame, &gauge()).unwrap();
        assert_eq!(hodge_selfdual_oracle(&rep).unwrap(), (true, false));

        let asd = abelian_two_form(&chart, [1.0, 0.0, 0.0, 0.0, 0.0, -1.0]);
        let rep = two_form_components(&asd, &frame, &gauge()).unwrap();
        assert_eq!(hodge_selfdual_oracle(&rep).unwrap(), (false, true));

        let generic = abelian_two_form(&chart, [1.0, 0.3, 0.0, -0.4, 0.0, 0.2]);
        let rep = two_form_components(&generic, &frame, &gauge()).unwrap();
        assert_eq!(hodge_selfdual_oracle(&rep).unwrap(), (false, false));

        // Dimension guard.
        let chart2 = Chart::unit_cube(2, 3).unwrap();
        let frame2 = FrameField::identity(chart2.clone()).unwrap();
        let mut gen = DMatrix::zeros(2, 2);
        gen[(0, 1)] = 1.0;
        gen[(1, 0)] = -1.0;
        let f2 = LieValuedForm::new(
            chart2.clone(),
            2,
            None,
            vec![MatrixField::from_constant(chart2, &gen)],
        )
        .unwrap();
        let so2 = catalog_algebra("so(2)").unwrap();
        let rep2 = two_form_components(&f2, &frame2, &so2).unwrap();
        assert!(hodge_selfdual_oracle(&rep2).is_err());
    }
}
