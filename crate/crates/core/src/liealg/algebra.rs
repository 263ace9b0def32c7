use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

use super::DEFAULT_TOLERANCE;

/// Frobenius pairing `tr(Xᵀ Y)`.
///
/// This is the inner product used for all orthogonal complements and
/// projectors in this crate. It is invariant under conjugation by
/// orthogonal matrices, which covers every `G ⊆ SO(D)` occurring here,
/// and on `gl(D)` it reproduces the antisymmetric/symmetric split.
pub fn frobenius(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// Commutator `[X, Y] = XY − YX`.
pub fn bracket(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.nrows() != x.ncols() || x.shape() != y.shape() {
        return Err(Error::SizeMismatch(format!(
            "bracket of {}x{} with {}x{}",
            x.nrows(),
            x.ncols(),
            y.nrows(),
            y.ncols()
        )));
    }
    Ok(x * y - y * x)
}

/// Matrix exponential by scaling and squaring of a truncated series.
///
/// The argument is scaled by `2^{-s}` until its 1-norm is below 1/2, the
/// series is summed to order 18 and the result squared back up. On the
/// matrices handled here (n ≤ 8, moderate norms) the relative error is
/// well below 1e-12.
pub fn exponential(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.nrows() != x.ncols() {
        return Err(Error::SizeMismatch(format!(
            "exponential of {}x{} matrix",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = x.nrows();
    let norm = x
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = x / 2.0_f64.powi(squarings as i32);

    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=18 {
        term = (&term * &scaled) / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

/// Principal matrix logarithm by inverse scaling and squaring.
///
/// Square roots are taken with the Denman-Beavers iteration until the
/// argument is close to the identity, then `log(1 + X)` is summed as a
/// series. Valid for group elements in the image of the exponential with
/// eigenvalues off the negative real axis.
pub fn logarithm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::SizeMismatch(format!(
            "logarithm of {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let id = DMatrix::identity(n, n);
    let mut y = a.clone();
    let mut scalings = 0u32;
    while (&y - &id).norm() > 0.25 {
        if scalings >= 40 {
            return Err(Error::Singular("matrix logarithm did not converge".into()));
        }
        y = denman_beavers_sqrt(&y)?;
        scalings += 1;
    }
    let x = &y - &id;
    // log(1 + X) = Σ (−1)^{k+1} X^k / k
    let mut result = DMatrix::zeros(n, n);
    let mut power = id.clone();
    for k in 1..=30 {
        power = &power * &x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        result += &power * (sign / k as f64);
    }
    Ok(result * 2.0_f64.powi(scalings as i32))
}

fn denman_beavers_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..60 {
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("square root iteration".into()))?;
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("square root iteration".into()))?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-14 {
            break;
        }
    }
    Ok(y)
}

/// Adjoint action `Ad(a)(X) = a X a^{-1}`.
pub fn adjoint(a: &DMatrix<f64>, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.shape() != x.shape() || a.nrows() != a.ncols() {
        return Err(Error::SizeMismatch(format!(
            "adjoint of {}x{} on {}x{}",
            a.nrows(),
            a.ncols(),
            x.nrows(),
            x.ncols()
        )));
    }
    // a X a^{-1} = ((a^{-1})ᵀ (a X)ᵀ)ᵀ, solved rather than inverted.
    let ax = a * x;
    let lu = a.transpose().lu();
    let solved = lu
        .solve(&ax.transpose())
        .ok_or_else(|| Error::Singular("adjoint by a singular matrix".into()))?;
    Ok(solved.transpose())
}

/// A matrix Lie algebra given by an explicit basis of square real matrices.
#[derive(Debug, Clone)]
pub struct LieAlgebraModel {
    name: String,
    matrix_size: usize,
    basis: Vec<DMatrix<f64>>,
    tolerance: f64,
}

impl LieAlgebraModel {
    /// Builds a model and verifies its invariants: the basis elements are
    /// linearly independent and the bracket of any two basis elements
    /// stays inside the span.
    pub fn new(
        name: impl Into<String>,
        matrix_size: usize,
        basis: Vec<DMatrix<f64>>,
        tolerance: f64,
    ) -> Result<Self> {
        let name = name.into();
        if matrix_size == 0 {
            return Err(Error::InvalidAlgebra {
                name,
                reason: "matrix size must be positive".into(),
            });
        }
        if tolerance < 0.0 {
            return Err(Error::InvalidAlgebra {
                name,
                reason: "tolerance must be non-negative".into(),
            });
        }
        for (i, e) in basis.iter().enumerate() {
            if e.nrows() != matrix_size || e.ncols() != matrix_size {
                return Err(Error::InvalidAlgebra {
                    name,
                    reason: format!("basis element {i} is not {matrix_size}x{matrix_size}"),
                });
            }
            if e.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidAlgebra {
                    name,
                    reason: format!("basis element {i} has non-finite entries"),
                });
            }
        }
        let model = Self {
            name,
            matrix_size,
            basis,
            tolerance,
        };
        model.check_independence()?;
        model.check_closure()?;
        Ok(model)
    }

    /// Builds with the default membership tolerance.
    pub fn with_default_tolerance(
        name: impl Into<String>,
        matrix_size: usize,
        basis: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        Self::new(name, matrix_size, basis, DEFAULT_TOLERANCE)
    }

    fn check_independence(&self) -> Result<()> {
        let k = self.basis.len();
        if k == 0 {
            return Ok(());
        }
        let mut gram = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = frobenius(&self.basis[i], &self.basis[j]);
            }
        }
        let svd = gram.svd(false, false);
        let max = svd.singular_values.max();
        let min = svd.singular_values.min();
        if min <= 1e-12 * max.max(1.0) {
            return Err(Error::InvalidAlgebra {
                name: self.name.clone(),
                reason: "basis is linearly dependent (singular Gram matrix)".into(),
            });
        }
        Ok(())
    }

    fn check_closure(&self) -> Result<()> {
        for a in 0..self.basis.len() {
            for b in (a + 1)..self.basis.len() {
                let br = bracket(&self.basis[a], &self.basis[b])?;
                let residual = self.span_residual(&br);
                if residual > self.tolerance {
                    return Err(Error::InvalidAlgebra {
                        name: self.name.clone(),
                        reason: format!(
                            "bracket of basis elements {a},{b} leaves the span (residual {residual:.3e})"
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Zero matrix of the ambient size.
    pub fn zero(&self) -> DMatrix<f64> {
        DMatrix::zeros(self.matrix_size, self.matrix_size)
    }

    /// Linear combination of the basis with the given coefficients.
    pub fn element(&self, coefficients: &[f64]) -> Result<DMatrix<f64>> {
        if coefficients.len() != self.basis.len() {
            return Err(Error::SizeMismatch(format!(
                "{} coefficients for a {}-dimensional algebra",
                coefficients.len(),
                self.basis.len()
            )));
        }
        let mut out = self.zero();
        for (c, e) in coefficients.iter().zip(&self.basis) {
            out += e * *c;
        }
        Ok(out)
    }

    /// Least-squares coefficients of `x` in the basis, together with the
    /// Frobenius norm of the part of `x` outside the span.
    pub fn coefficients_of(&self, x: &DMatrix<f64>) -> Result<(DVector<f64>, f64)> {
        if x.nrows() != self.matrix_size || x.ncols() != self.matrix_size {
            return Err(Error::SizeMismatch(format!(
                "coefficients of a {}x{} matrix in `{}`",
                x.nrows(),
                x.ncols(),
                self.name
            )));
        }
        let k = self.basis.len();
        if k == 0 {
            return Ok((DVector::zeros(0), x.norm()));
        }
        let mut gram = DMatrix::zeros(k, k);
        let mut rhs = DVector::zeros(k);
        for i in 0..k {
            rhs[i] = frobenius(&self.basis[i], x);
            for j in 0..k {
                gram[(i, j)] = frobenius(&self.basis[i], &self.basis[j]);
            }
        }
        let coeffs = gram
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Singular(format!("Gram matrix of `{}`", self.name)))?;
        let reconstructed = self.element(coeffs.as_slice())?;
        let residual = (x - reconstructed).norm();
        Ok((coeffs, residual))
    }

    /// Distance of `x` from the span of the basis.
    pub fn span_residual(&self, x: &DMatrix<f64>) -> f64 {
        match self.coefficients_of(x) {
            Ok((_, r)) => r,
            Err(_) => f64::INFINITY,
        }
    }

    /// Whether `x` lies in the span within the model tolerance.
    pub fn contains(&self, x: &DMatrix<f64>) -> bool {
        self.span_residual(x) <= self.tolerance
    }
}
