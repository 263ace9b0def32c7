use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

use super::{adjoint, exponential, frobenius, LieAlgebraModel};

/// Vectors with post-projection norm below this are dropped during
/// Gram-Schmidt, keeping the complement basis deterministic.
const GRAM_SCHMIDT_DROP: f64 = 1e-10;

/// An invariant decomposition `𝔥 = 𝔤 ⊕ m` with Frobenius-orthogonal
/// projectors.
///
/// The complement `m` is the Frobenius-orthogonal complement of `𝔤`
/// inside `𝔥`; projectors act via orthonormalized bases of the two
/// summands.
#[derive(Debug, Clone)]
pub struct Splitting {
    ambient: LieAlgebraModel,
    sub: LieAlgebraModel,
    sub_orthonormal: Vec<DMatrix<f64>>,
    complement_orthonormal: Vec<DMatrix<f64>>,
}

impl Splitting {
    pub fn ambient(&self) -> &LieAlgebraModel {
        &self.ambient
    }

    pub fn sub(&self) -> &LieAlgebraModel {
        &self.sub
    }

    /// Orthonormal basis of the complement `m`.
    pub fn complement_basis(&self) -> &[DMatrix<f64>] {
        &self.complement_orthonormal
    }

    pub fn complement_dim(&self) -> usize {
        self.complement_orthonormal.len()
    }

    pub fn matrix_size(&self) -> usize {
        self.ambient.matrix_size()
    }

    pub fn tolerance(&self) -> f64 {
        self.ambient.tolerance()
    }

    /// Projection onto `𝔤`.
    pub fn project_sub(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        project_onto(&self.sub_orthonormal, x, self.matrix_size())
    }

    /// Projection onto the complement `m`.
    pub fn project_complement(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        project_onto(&self.complement_orthonormal, x, self.matrix_size())
    }

    /// Distance of `x` from `𝔤`, i.e. the full residual including any
    /// component outside `span(𝔥)`.
    pub fn distance_from_sub(&self, x: &DMatrix<f64>) -> f64 {
        (x - self.project_sub(x)).norm()
    }

    /// Distance of `x` from the complement `m`.
    pub fn distance_from_complement(&self, x: &DMatrix<f64>) -> f64 {
        (x - self.project_complement(x)).norm()
    }

    /// The projector onto `𝔤` as an `n²×n²` matrix acting on row-major
    /// vectorized matrices.
    pub fn projector_matrix_sub(&self) -> DMatrix<f64> {
        projector_matrix(&self.sub_orthonormal, self.matrix_size())
    }

    /// The projector onto `m` as an `n²×n²` matrix acting on row-major
    /// vectorized matrices.
    pub fn projector_matrix_complement(&self) -> DMatrix<f64> {
        projector_matrix(&self.complement_orthonormal, self.matrix_size())
    }
}

fn projector_matrix(basis: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(n * n, n * n);
    for u in basis {
        let v = DMatrix::from_fn(n * n, 1, |k, _| u[(k / n, k % n)]);
        p += &v * v.transpose();
    }
    p
}

fn project_onto(basis: &[DMatrix<f64>], x: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, n);
    for b in basis {
        out += b * frobenius(b, x);
    }
    out
}

/// Builds the splitting `𝔥 = 𝔤 ⊕ m` with `m` the Frobenius-orthogonal
/// complement of `𝔤` inside `𝔥`.
///
/// Complement candidates are the ambient basis elements in order; each is
/// orthogonalized against everything accepted so far and dropped when the
/// remainder is negligible.
pub fn build_splitting(ambient: &LieAlgebraModel, sub: &LieAlgebraModel) -> Result<Splitting> {
    if ambient.matrix_size() != sub.matrix_size() {
        return Err(Error::SizeMismatch(format!(
            "splitting of `{}` ({}x{}) by `{}` ({}x{})",
            ambient.name(),
            ambient.matrix_size(),
            ambient.matrix_size(),
            sub.name(),
            sub.matrix_size(),
            sub.matrix_size()
        )));
    }
    for e in sub.basis() {
        let residual = ambient.span_residual(e);
        if residual > ambient.tolerance() {
            return Err(Error::NotASubalgebra {
                sub: sub.name().to_string(),
                ambient: ambient.name().to_string(),
                residual,
            });
        }
    }

    let mut sub_on: Vec<DMatrix<f64>> = Vec::with_capacity(sub.dim());
    for e in sub.basis() {
        if let Some(u) = orthogonalize(e, &sub_on) {
            sub_on.push(u);
        }
    }
    if sub_on.len() != sub.dim() {
        return Err(Error::Singular(format!(
            "degenerate basis while orthonormalizing `{}`",
            sub.name()
        )));
    }

    let mut accepted: Vec<DMatrix<f64>> = sub_on.clone();
    let mut complement_on: Vec<DMatrix<f64>> = Vec::new();
    for e in ambient.basis() {
        if let Some(u) = orthogonalize(e, &accepted) {
            accepted.push(u.clone());
            complement_on.push(u);
        }
    }

    Ok(Splitting {
        ambient: ambient.clone(),
        sub: sub.clone(),
        sub_orthonormal: sub_on,
        complement_orthonormal: complement_on,
    })
}

/// One Gram-Schmidt step with a single re-orthogonalization pass.
fn orthogonalize(x: &DMatrix<f64>, against: &[DMatrix<f64>]) -> Option<DMatrix<f64>> {
    let mut v = x.clone();
    for _ in 0..2 {
        for u in against {
            let c = frobenius(u, &v);
            v -= u * c;
        }
    }
    let norm = v.norm();
    if norm < GRAM_SCHMIDT_DROP {
        None
    } else {
        Some(v / norm)
    }
}

/// Checks G-invariance of the complement by sampling group elements.
///
/// Samples `exp(t E_a)` for each generator `E_a` of `𝔤` at
/// `t ∈ {±1, ±0.5}` plus `sample_count` seeded random products of
/// generator exponentials, and reports the worst distance of
/// `Ad(g)(m_b)` from `m` over all complement basis elements.
pub fn check_splitting_invariance(split: &Splitting, sample_count: usize) -> (bool, f64) {
    let mut max_residual = 0.0_f64;
    let mut check = |g: &DMatrix<f64>| {
        for mb in split.complement_basis() {
            if let Ok(ad) = adjoint(g, mb) {
                max_residual = max_residual.max(split.distance_from_complement(&ad));
            } else {
                max_residual = f64::INFINITY;
            }
        }
    };

    for e in split.sub().basis() {
        for t in [1.0, -1.0, 0.5, -0.5] {
            if let Ok(g) = exponential(&(e * t)) {
                check(&g);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x51_17);
    let generators = split.sub().basis();
    if !generators.is_empty() {
        for _ in 0..sample_count {
            let mut g = DMatrix::identity(split.matrix_size(), split.matrix_size());
            for _ in 0..3 {
                let a = rng.random_range(0..generators.len());
                let t: f64 = rng.random_range(-1.0..1.0);
                if let Ok(f) = exponential(&(&generators[a] * t)) {
                    g = &g * f;
                }
            }
            check(&g);
        }
    }

    (max_residual <= split.tolerance(), max_residual)
}

#[cfg(test)]
mod tests {
    use super::super::catalog::l_matrix;
    use super::super::{catalog_algebra, DEFAULT_TOLERANCE};
    use super::*;

    fn so2_in_so3() -> Splitting {
        let ambient = catalog_algebra("so(3)").unwrap();
        let sub = LieAlgebraModel::with_default_tolerance("so(2)_12", 3, vec![l_matrix(3, 0, 1)])
            .unwrap();
        build_splitting(&ambient, &sub).unwrap()
    }

    #[test]
    fn so3_splits_over_so2() {
        let split = so2_in_so3();
        assert_eq!(split.complement_dim(), 2);
        // m = span{L13, L23}.
        for m in [l_matrix(3, 0, 2), l_matrix(3, 1, 2)] {
            assert!(split.distance_from_complement(&m) < 1e-12);
            assert!((split.distance_from_sub(&m) - m.norm()).abs() < 1e-12);
        }
        let g = l_matrix(3, 0, 1);
        assert!((split.project_sub(&g) - &g).norm() < 1e-12);
        assert!(split.project_complement(&g).norm() < 1e-12);
    }

    #[test]
    fn projectors_sum_to_identity_on_ambient() {
        let split = so2_in_so3();
        let x = l_matrix(3, 0, 1) * 0.3 - l_matrix(3, 0, 2) * 1.7 + l_matrix(3, 1, 2) * 0.9;
        let recomposed = split.project_sub(&x) + split.project_complement(&x);
        assert!((recomposed - &x).norm() < 1e-12);
    }

    #[test]
    fn projector_matrices_are_idempotent_and_complementary() {
        let split = so2_in_so3();
        let pg = split.projector_matrix_sub();
        let pm = split.projector_matrix_complement();
        assert!((&pg * &pg - &pg).norm() < 1e-12);
        assert!((&pm * &pm - &pm).norm() < 1e-12);
        assert!((&pg * &pm).norm() < 1e-12);
        // Their sum projects onto span(𝔥) = so(3), so rank 3 here.
        let sum = &pg + &pm;
        assert!((sum.trace() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gl_splits_into_antisymmetric_and_symmetric() {
        let ambient = catalog_algebra("gl(3)").unwrap();
        let sub = catalog_algebra("so(3)").unwrap();
        let split = build_splitting(&ambient, &sub).unwrap();
        assert_eq!(split.complement_dim(), 6);
        // Oracle: the Frobenius complement of antisymmetric matrices in
        // gl is the symmetric matrices.
        let sym = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.5, 2.0, -1.0, 3.0, 0.5, 3.0, 0.0]);
        assert!(split.distance_from_complement(&sym) < 1e-12);
        let anti = l_matrix(3, 0, 2) * 1.4;
        assert!(split.distance_from_sub(&anti) < 1e-12);
        let (ok, r) = check_splitting_invariance(&split, 16);
        assert!(ok, "residual {r}");
    }

    #[test]
    fn so4_splits_into_su2_factors() {
        let ambient = catalog_algebra("so(4)").unwrap();
        let sub = catalog_algebra("su2_plus_in_so4").unwrap();
        let split = build_splitting(&ambient, &sub).unwrap();
        assert_eq!(split.complement_dim(), 3);
        let minus = catalog_algebra("su2_minus_in_so4").unwrap();
        for e in minus.basis() {
            assert!(split.distance_from_complement(e) < 1e-12);
        }
        let (ok, r) = check_splitting_invariance(&split, 16);
        assert!(ok, "residual {r}");
    }

    #[test]
    fn trivial_complement_when_sub_is_ambient() {
        let so3 = catalog_algebra("so(3)").unwrap();
        let split = build_splitting(&so3, &so3).unwrap();
        assert_eq!(split.complement_dim(), 0);
        let x = l_matrix(3, 1, 2) * 2.0;
        assert!((split.project_sub(&x) - &x).norm() < 1e-12);
    }

    #[test]
    fn rejects_non_subalgebra() {
        let so2 = catalog_algebra("so(2)").unwrap();
        let gl2 = catalog_algebra("gl(2)").unwrap();
        assert!(matches!(
            build_splitting(&so2, &gl2),
            Err(Error::NotASubalgebra { .. })
        ));
    }

    #[test]
    fn invariance_check_detects_non_invariant_complement() {
        // sub = span{E12} inside gl(2): Ad(exp(t E12)) pushes E21 out of
        // the Frobenius complement, so the splitting is not invariant.
        let ambient = catalog_algebra("gl(2)").unwrap();
        let mut e12 = DMatrix::zeros(2, 2);
        e12[(0, 1)] = 1.0;
        let sub =
            LieAlgebraModel::new("nilpotent", 2, vec![e12], DEFAULT_TOLERANCE).unwrap();
        let split = build_splitting(&ambient, &sub).unwrap();
        let (ok, r) = check_splitting_invariance(&split, 8);
        assert!(!ok);
        assert!(r > 0.1, "residual {r}");
    }

    #[test]
    fn splitting_invariance_holds_for_so2_in_so3() {
        let (ok, r) = check_splitting_invariance(&so2_in_so3(), 16);
        assert!(ok, "residual {r}");
    }
}
