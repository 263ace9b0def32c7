use nalgebra::DMatrix;

use crate::liealg::LieAlgebraModel;
use crate::{Error, Result};

use super::matrix_field::{GroupValuedField, MatrixField};
use super::Chart;

/// Index of the pair `(i, j)`, `i < j`, in the canonical ordering of
/// degree-2 components.
pub fn pair_index(i: usize, j: usize, d: usize) -> usize {
    debug_assert!(i < j && j < d);
    i * d - i * (i + 1) / 2 + (j - i - 1)
}

/// Number of independent degree-`k` components on a `d`-dimensional
/// chart.
pub fn component_count(degree: usize, d: usize) -> usize {
    match degree {
        0 => 1,
        1 => d,
        2 => d * (d - 1) / 2,
        _ => 0,
    }
}

/// A differential form of degree ≤ 2 with matrix-of-expression
/// coefficients in the coordinate coframe.
///
/// Degree-2 components are stored canonically for `i < j`; the form is
/// `Σ_{i<j} ω_{ij} dx^i ∧ dx^j`. When a value algebra is attached, the
/// coefficients are expected to lie in its span at the chart's
/// evaluation points; [`LieValuedForm::worst_value_residual`] measures
/// this.
#[derive(Debug, Clone)]
pub struct LieValuedForm {
    chart: Chart,
    degree: usize,
    matrix_size: usize,
    value_algebra: Option<LieAlgebraModel>,
    components: Vec<MatrixField>,
}

impl LieValuedForm {
    pub fn new(
        chart: Chart,
        degree: usize,
        value_algebra: Option<LieAlgebraModel>,
        components: Vec<MatrixField>,
    ) -> Result<Self> {
        if degree > 2 {
            return Err(Error::UnsupportedDegree(degree));
        }
        let expected = component_count(degree, chart.dim());
        if components.len() != expected {
            return Err(Error::SizeMismatch(format!(
                "degree-{degree} form on a {}-dim chart needs {expected} components, got {}",
                chart.dim(),
                components.len()
            )));
        }
        let matrix_size = components
            .first()
            .map(|f| f.rows())
            .ok_or_else(|| Error::Invalid("form must have at least one component".into()))?;
        for f in &components {
            if f.rows() != matrix_size || f.cols() != matrix_size {
                return Err(Error::SizeMismatch(
                    "form components must be square and equally sized".into(),
                ));
            }
            if f.chart() != &chart {
                return Err(Error::Invalid(
                    "form components must live on the form's chart".into(),
                ));
            }
        }
        if let Some(alg) = &value_algebra {
            if alg.matrix_size() != matrix_size {
                return Err(Error::SizeMismatch(format!(
                    "value algebra `{}` has size {}, components have size {matrix_size}",
                    alg.name(),
                    alg.matrix_size()
                )));
            }
        }
        Ok(Self {
            chart,
            degree,
            matrix_size,
            value_algebra,
            components,
        })
    }

    pub fn zero(
        chart: Chart,
        degree: usize,
        matrix_size: usize,
        value_algebra: Option<LieAlgebraModel>,
    ) -> Result<Self> {
        let count = component_count(degree, chart.dim());
        let components = (0..count)
            .map(|_| MatrixField::zeros(chart.clone(), matrix_size, matrix_size))
            .collect();
        Self::new(chart, degree, value_algebra, components)
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn value_algebra(&self) -> Option<&LieAlgebraModel> {
        self.value_algebra.as_ref()
    }

    pub fn components(&self) -> &[MatrixField] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &MatrixField {
        &self.components[k]
    }

    /// Degree-2 coefficient for an arbitrary index pair, honoring
    /// antisymmetry.
    pub fn eval_pair(&self, i: usize, j: usize, x: &[f64]) -> DMatrix<f64> {
        let d = self.chart.dim();
        if i == j {
            return DMatrix::zeros(self.matrix_size, self.matrix_size);
        }
        if i < j {
            self.components[pair_index(i, j, d)].eval(x)
        } else {
            -self.components[pair_index(j, i, d)].eval(x)
        }
    }

    pub fn eval_component(&self, k: usize, x: &[f64]) -> DMatrix<f64> {
        self.components[k].eval(x)
    }

    /// Replaces the declared value algebra without touching components.
    pub fn with_value_algebra(mut self, algebra: Option<LieAlgebraModel>) -> Result<Self> {
        if let Some(alg) = &algebra {
            if alg.matrix_size() != self.matrix_size {
                return Err(Error::SizeMismatch(format!(
                    "value algebra `{}` has size {}, components have size {}",
                    alg.name(),
                    alg.matrix_size(),
                    self.matrix_size
                )));
            }
        }
        self.value_algebra = algebra;
        Ok(self)
    }

    pub fn add(&self, other: &LieValuedForm) -> Result<LieValuedForm> {
        self.zip(other, MatrixField::add)
    }

    pub fn sub(&self, other: &LieValuedForm) -> Result<LieValuedForm> {
        self.zip(other, MatrixField::sub)
    }

    fn zip(
        &self,
        other: &LieValuedForm,
        op: fn(&MatrixField, &MatrixField) -> Result<MatrixField>,
    ) -> Result<LieValuedForm> {
        if self.degree != other.degree || self.chart != other.chart {
            return Err(Error::SizeMismatch(
                "forms must share chart and degree".into(),
            ));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| op(a, b))
            .collect::<Result<Vec<_>>>()?;
        LieValuedForm::new(
            self.chart.clone(),
            self.degree,
            self.value_algebra.clone(),
            components,
        )
    }

    /// Applies a linear map on matrix space, given as an `n²×n²` matrix
    /// acting on row-major vectorized coefficients, to every component.
    pub fn apply_matrix_map(&self, map: &DMatrix<f64>) -> Result<LieValuedForm> {
        let components = self
            .components
            .iter()
            .map(|f| apply_linear_map(map, f))
            .collect::<Result<Vec<_>>>()?;
        LieValuedForm::new(self.chart.clone(), self.degree, None, components)
    }

    /// Componentwise conjugation `ω ↦ L ω R` by expression matrices.
    pub fn sandwich(&self, left: &MatrixField, right: &MatrixField) -> Result<LieValuedForm> {
        let components = self
            .components
            .iter()
            .map(|f| left.matmul(f)?.matmul(right))
            .collect::<Result<Vec<_>>>()?;
        LieValuedForm::new(self.chart.clone(), self.degree, None, components)
    }

    /// Worst distance of the components from the span of `algebra` over
    /// the evaluation set. Returns the residual and the offending point.
    pub fn worst_value_residual(&self, algebra: &LieAlgebraModel) -> (f64, Vec<f64>) {
        let mut worst = 0.0_f64;
        let mut worst_point = Vec::new();
        for x in self.chart.evaluation_points() {
            for f in &self.components {
                let r = algebra.span_residual(&f.eval(&x));
                if r > worst {
                    worst = r;
                    worst_point = x.clone();
                }
            }
        }
        (worst, worst_point)
    }

    /// Worst Frobenius norm of any component over the evaluation set.
    pub fn worst_norm(&self) -> f64 {
        let mut worst = 0.0_f64;
        for x in self.chart.evaluation_points() {
            for f in &self.components {
                worst = worst.max(f.eval(&x).norm());
            }
        }
        worst
    }

    /// Worst componentwise difference from another form over the
    /// evaluation set.
    pub fn worst_difference(&self, other: &LieValuedForm) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.worst_norm())
    }
}

/// Applies an `n²×n²` coefficient-space linear map to a square
/// expression matrix. Near-zero map entries are skipped.
pub fn apply_linear_map(map: &DMatrix<f64>, field: &MatrixField) -> Result<MatrixField> {
    let n = field.rows();
    if field.cols() != n || map.nrows() != n * n || map.ncols() != n * n {
        return Err(Error::SizeMismatch(format!(
            "{}x{} map on a {}x{} field",
            map.nrows(),
            map.ncols(),
            field.rows(),
            field.cols()
        )));
    }
    let mut entries = Vec::with_capacity(n * n);
    for out_idx in 0..n * n {
        let mut sum = Expr::zero();
        for in_idx in 0..n * n {
            let c = map[(out_idx, in_idx)];
            if c == 0.0 {
                continue;
            }
            sum = Expr::add(
                sum,
                Expr::mul(
                    Expr::constant(c),
                    field.entry(in_idx / n, in_idx % n).clone(),
                ),
            );
        }
        entries.push(sum);
    }
    MatrixField::new(field.chart().clone(), n, n, entries)
}

use super::expr::Expr;

/// Pullback of the Maurer-Cartan form: the degree-1 form with components
/// `h(x)^{-1} ∂_i h(x)`, computed symbolically.
pub fn maurer_cartan_pullback(h: &GroupValuedField) -> Result<LieValuedForm> {
    let field = h.field();
    let inv = field.inverse()?;
    let d = field.chart().dim();
    let components = (0..d)
        .map(|i| inv.matmul(&field.partial(i)))
        .collect::<Result<Vec<_>>>()?;
    LieValuedForm::new(field.chart().clone(), 1, None, components)
}

/// Exterior derivative of a degree-0 or degree-1 form, computed
/// symbolically.
pub fn exterior_derivative(omega: &LieValuedForm) -> Result<LieValuedForm> {
    let d = omega.chart().dim();
    match omega.degree() {
        0 => {
            let components = (0..d).map(|i| omega.component(0).partial(i)).collect();
            LieValuedForm::new(omega.chart().clone(), 1, None, components)
        }
        1 => {
            let mut components = Vec::with_capacity(component_count(2, d));
            for i in 0..d {
                for j in (i + 1)..d {
                    let dij = omega.component(j).partial(i);
                    let dji = omega.component(i).partial(j);
                    components.push(dij.sub(&dji)?);
                }
            }
            LieValuedForm::new(omega.chart().clone(), 2, None, components)
        }
        k => Err(Error::UnsupportedDegree(k)),
    }
}

/// Matrix wedge of two degree-1 forms:
/// `(α ∧ β)_{ij} = α_i β_j − α_j β_i` with matrix products.
pub fn wedge_bracket(alpha: &LieValuedForm, beta: &LieValuedForm) -> Result<LieValuedForm> {
    if alpha.degree() != 1 || beta.degree() != 1 {
        return Err(Error::UnsupportedDegree(alpha.degree().max(beta.degree())));
    }
    if alpha.chart() != beta.chart() || alpha.matrix_size() != beta.matrix_size() {
        return Err(Error::SizeMismatch(
            "wedge factors must share chart and matrix size".into(),
        ));
    }
    let d = alpha.chart().dim();
    let mut components = Vec::with_capacity(component_count(2, d));
    for i in 0..d {
        for j in (i + 1)..d {
            let ab = alpha.component(i).matmul(beta.component(j))?;
            let ba = alpha.component(j).matmul(beta.component(i))?;
            components.push(ab.sub(&ba)?);
        }
    }
    LieValuedForm::new(alpha.chart().clone(), 2, None, components)
}

/// Local field strength `F = dA + A ∧ A` of a degree-1 form.
pub fn field_strength(a: &LieValuedForm) -> Result<LieValuedForm> {
    let da = exterior_derivative(a)?;
    let aa = wedge_bracket(a, a)?;
    da.add(&aa)?.with_value_algebra(a.value_algebra().cloned())
}

/// Evaluates the group-membership residual of a field at all evaluation
/// points. Returns `(ok, worst residual, worst point)`.
pub fn validate_group_field(h: &GroupValuedField) -> (bool, f64, Vec<f64>) {
    h.validate()
}
