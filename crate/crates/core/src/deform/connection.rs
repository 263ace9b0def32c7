use nalgebra::DMatrix;

use crate::fields::{Chart, LieValuedForm, MatrixField};
use crate::liealg::{LieAlgebraModel, Splitting};
use crate::{Error, Result};

/// A local connection form: a degree-1 form on a chart together with the
/// label of the local section its components refer to.
///
/// A connection is *compatible* when its components lie in the subalgebra
/// `𝔤` of the governing splitting; ambient connections take values in the
/// full `𝔥`.
#[derive(Debug, Clone)]
pub struct LocalConnection {
    form: LieValuedForm,
    section_label: String,
}

impl LocalConnection {
    /// Wraps a degree-1 form as a connection relative to the named
    /// section. No valuedness is enforced here; use
    /// [`LocalConnection::check_compatible`] for the compatible case.
    pub fn new(form: LieValuedForm, section_label: impl Into<String>) -> Result<Self> {
        if form.degree() != 1 {
            return Err(Error::UnsupportedDegree(form.degree()));
        }
        Ok(Self {
            form,
            section_label: section_label.into(),
        })
    }

    /// Wraps a form and verifies that its components stay inside `𝔤` of
    /// the splitting at all evaluation points.
    pub fn new_compatible(
        form: LieValuedForm,
        split: &Splitting,
        section_label: impl Into<String>,
    ) -> Result<Self> {
        let conn = Self::new(form, section_label)?;
        conn.check_compatible(split)?;
        Ok(conn)
    }

    /// Worst distance of the components from `𝔤` over the evaluation
    /// set; errors when it exceeds the splitting tolerance.
    pub fn check_compatible(&self, split: &Splitting) -> Result<f64> {
        let mut worst = 0.0_f64;
        let mut worst_point = Vec::new();
        for x in self.form.chart().evaluation_points() {
            for f in self.form.components() {
                let r = split.distance_from_sub(&f.eval(&x));
                if r > worst {
                    worst = r;
                    worst_point = x.clone();
                }
            }
        }
        if worst > split.tolerance() {
            return Err(Error::CompatibilityLost {
                residual: worst,
                point: worst_point,
            });
        }
        Ok(worst)
    }

    pub fn form(&self) -> &LieValuedForm {
        &self.form
    }

    pub fn into_form(self) -> LieValuedForm {
        self.form
    }

    pub fn section_label(&self) -> &str {
        &self.section_label
    }

    pub fn chart(&self) -> &Chart {
        self.form.chart()
    }

    pub fn matrix_size(&self) -> usize {
        self.form.matrix_size()
    }

    pub fn value_algebra(&self) -> Option<&LieAlgebraModel> {
        self.form.value_algebra()
    }
}

/// A local frame: an invertible matrix field whose column `a` holds the
/// coordinate components of the frame vector `e_a`. The derived metric is
/// `g = (e eᵀ)^{-1}`.
#[derive(Debug, Clone)]
pub struct FrameField {
    e: MatrixField,
}

impl FrameField {
    /// Validates invertibility and positive-definiteness of the derived
    /// metric at all evaluation points.
    pub fn new(e: MatrixField) -> Result<Self> {
        if e.rows() != e.cols() || e.rows() != e.chart().dim() {
            return Err(Error::SizeMismatch(format!(
                "frame must be {0}x{0} on a {0}-dimensional chart",
                e.chart().dim()
            )));
        }
        let frame = Self { e };
        for x in frame.chart().evaluation_points() {
            let m = frame.e.eval_finite(&x)?;
            if m.determinant().abs() < 1e-12 {
                return Err(Error::FieldSingular(x));
            }
            let metric = frame.metric_at_matrix(&m)?;
            let sym_residual = (&metric - metric.transpose()).norm();
            if sym_residual > 1e-9 {
                return Err(Error::DegenerateMetric(x));
            }
            let chol = nalgebra::Cholesky::new(metric);
            if chol.is_none() {
                return Err(Error::DegenerateMetric(x));
            }
        }
        Ok(frame)
    }

    /// The identity frame on a chart (flat Euclidean metric).
    pub fn identity(chart: Chart) -> Result<Self> {
        let d = chart.dim();
        Self::new(MatrixField::identity(chart, d))
    }

    pub fn matrix(&self) -> &MatrixField {
        &self.e
    }

    pub fn chart(&self) -> &Chart {
        self.e.chart()
    }

    pub fn dim(&self) -> usize {
        self.e.rows()
    }

    /// Frame matrix at a point.
    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.e.eval_finite(x)
    }

    /// Coframe `β = e^{-1}` as a symbolic field; row `a` holds `β^a`.
    pub fn coframe(&self) -> Result<MatrixField> {
        self.e.inverse()
    }

    /// Derived metric `g_{μν} = Σ_a (e^{-1})^a_μ (e^{-1})^a_ν` at a
    /// point.
    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.e.eval_finite(x)?;
        self.metric_at_matrix(&m)
    }

    fn metric_at_matrix(&self, e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let inv = e
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("frame matrix".into()))?;
        Ok(inv.transpose() * inv)
    }

    /// Rescales the frame by a scalar expression, `e ↦ φ·e`.
    pub fn scaled(&self, phi: &crate::fields::Expr) -> Result<FrameField> {
        FrameField::new(self.e.scale(phi))
    }
}
