use crate::fields::{Expr, LieValuedForm, MatrixField};
use crate::liealg::catalog_algebra;
use crate::Result;

use super::FrameField;

/// Levi-Civita connection 1-form of the metric derived from a frame,
/// expressed in that frame.
///
/// Built from the Koszul/Christoffel formula on the derived metric and
/// rotated into the frame:
/// `ω^a_{b,μ} = Σ_λ β^a_λ (∂_μ e^λ_b + Σ_ν Γ^λ_{μν} e^ν_b)`.
/// The output is `so(D)`-valued and torsion-free up to the second
/// derivatives involved (1e-7 scale).
#[allow(clippy::needless_range_loop)]
pub fn levi_civita_connection(frame: &FrameField) -> Result<LieValuedForm> {
    let d = frame.dim();
    let chart = frame.chart().clone();
    let e = frame.matrix();
    let beta = frame.coframe()?;

    // g^{-1} = e eᵀ, so only g itself needs a symbolic inverse.
    let g_inv = e.matmul(&e.transpose())?;
    let g = g_inv.inverse()?;
    let dg: Vec<MatrixField> = (0..d).map(|k| g.partial(k)).collect();

    // Γ^λ_{μν} = ½ Σ_σ g^{λσ} (∂_μ g_{σν} + ∂_ν g_{σμ} − ∂_σ g_{μν})
    let mut christoffel = vec![vec![vec![Expr::zero(); d]; d]; d];
    for lambda in 0..d {
        for mu in 0..d {
            for nu in 0..d {
                let mut sum = Expr::zero();
                for sigma in 0..d {
                    let bracket = Expr::sub(
                        Expr::add(
                            dg[mu].entry(sigma, nu).clone(),
                            dg[nu].entry(sigma, mu).clone(),
                        ),
                        dg[sigma].entry(mu, nu).clone(),
                    );
                    sum = Expr::add(sum, Expr::mul(g_inv.entry(lambda, sigma).clone(), bracket));
                }
                christoffel[lambda][mu][nu] = Expr::mul(Expr::constant(0.5), sum);
            }
        }
    }

    let de: Vec<MatrixField> = (0..d).map(|mu| e.partial(mu)).collect();
    let mut components = Vec::with_capacity(d);
    for mu in 0..d {
        let mut entries = Vec::with_capacity(d * d);
        for a in 0..d {
            for b in 0..d {
                let mut sum = Expr::zero();
                for lambda in 0..d {
                    let mut covariant = de[mu].entry(lambda, b).clone();
                    for nu in 0..d {
                        covariant = Expr::add(
                            covariant,
                            Expr::mul(christoffel[lambda][mu][nu].clone(), e.entry(nu, b).clone()),
                        );
                    }
                    sum = Expr::add(sum, Expr::mul(beta.entry(a, lambda).clone(), covariant));
                }
                entries.push(sum);
            }
        }
        components.push(MatrixField::new(chart.clone(), d, d, entries)?);
    }

    LieValuedForm::new(
        chart,
        1,
        Some(catalog_algebra(&format!("so({d})"))?),
        components,
    )
}

/// Residuals of the defining properties of a frame connection at the
/// evaluation points: the torsion `dβ^a + ω^a_b ∧ β^b` and the failure
/// of antisymmetry `ω^{ab} + ω^{ba}`.
pub fn levi_civita_residuals(frame: &FrameField, omega: &LieValuedForm) -> Result<(f64, f64)> {
    let d = frame.dim();
    let beta = frame.coframe()?;
    let dbeta: Vec<MatrixField> = (0..d).map(|mu| beta.partial(mu)).collect();

    let mut torsion = 0.0_f64;
    let mut antisym = 0.0_f64;
    for x in frame.chart().evaluation_points() {
        let beta_x = beta.eval(&x);
        let dbeta_x: Vec<_> = dbeta.iter().map(|f| f.eval(&x)).collect();
        let omega_x: Vec<_> = (0..d).map(|mu| omega.eval_component(mu, &x)).collect();

        for w in &omega_x {
            antisym = antisym.max((w + w.transpose()).amax());
        }
        for a in 0..d {
            for mu in 0..d {
                for nu in (mu + 1)..d {
                    let mut t = dbeta_x[mu][(a, nu)] - dbeta_x[nu][(a, mu)];
                    for b in 0..d {
                        t += omega_x[mu][(a, b)] * beta_x[(b, nu)]
                            - omega_x[nu][(a, b)] * beta_x[(b, mu)];
                    }
                    torsion = torsion.max(t.abs());
                }
            }
        }
    }
    Ok((torsion, antisym))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Chart;

    #[test]
    fn flat_frame_has_zero_connection() {
        let chart = Chart::unit_cube(3, 3).unwrap();
        let frame = FrameField::identity(chart).unwrap();
        let omega = levi_civita_connection(&frame).unwrap();
        assert!(omega.worst_norm() < 1e-15);
        let (torsion, antisym) = levi_civita_residuals(&frame, &omega).unwrap();
        assert!(torsion < 1e-15 && antisym < 1e-15);
    }

    #[test]
    fn conformal_frame_closed_form() {
        // e = (1/φ)·1 gives g = φ²δ; the closed form is
        // ω¹₂ = (∂₂ log φ) dx¹ − (∂₁ log φ) dx².
        let chart = Chart::unit_cube(2, 4).unwrap();
        let phi = crate::fields::parse_expression("1 + x1^2 + 0.5*x2^2", &chart).unwrap();
        let inv_phi = Expr::div(Expr::one(), phi);
        let e = MatrixField::scalar_identity(chart.clone(), 2, &inv_phi);
        let frame = FrameField::new(e).unwrap();
        let omega = levi_civita_connection(&frame).unwrap();
        for x in chart.evaluation_points() {
            let phi_x = 1.0 + x[0] * x[0] + 0.5 * x[1] * x[1];
            let d1 = 2.0 * x[0] / phi_x;
            let d2 = x[1] / phi_x;
            let w0 = omega.eval_component(0, &x);
            let w1 = omega.eval_component(1, &x);
            assert!((w0[(0, 1)] - d2).abs() < 1e-9, "at {x:?}");
            assert!((w1[(0, 1)] + d1).abs() < 1e-9, "at {x:?}");
        }
        let (torsion, antisym) = levi_civita_residuals(&frame, &omega).unwrap();
        assert!(torsion < 1e-7, "torsion {torsion}");
        assert!(antisym < 1e-9, "antisymmetry {antisym}");
    }

    #[test]
    fn sphere_frame_closed_form() {
        // Round sphere: x1 = θ, x2 = φ, frame e₁ = ∂_θ, e₂ = (1/sin θ)∂_φ;
        // the closed form is ω¹₂ = −cos θ dφ.
        let chart = Chart::new(vec![(0.4, 2.7), (0.0, 6.0)], vec![4, 4]).unwrap();
        let rows = vec![
            vec!["1".to_string(), "0".to_string()],
            vec!["0".to_string(), "1/sin(x1)".to_string()],
        ];
        let e = MatrixField::from_strings(chart.clone(), &rows).unwrap();
        let frame = FrameField::new(e).unwrap();
        let omega = levi_civita_connection(&frame).unwrap();
        for x in chart.evaluation_points() {
            let w_theta = omega.eval_component(0, &x);
            let w_phi = omega.eval_component(1, &x);
            assert!(w_theta.norm() < 1e-9, "at {x:?}");
            assert!((w_phi[(0, 1)] + x[0].cos()).abs() < 1e-9, "at {x:?}");
        }
        let (torsion, antisym) = levi_civita_residuals(&frame, &omega).unwrap();
        assert!(torsion < 1e-7, "torsion {torsion}");
        assert!(antisym < 1e-9, "antisymmetry {antisym}");
    }
}
