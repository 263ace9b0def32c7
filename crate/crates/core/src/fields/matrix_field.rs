use std::rc::Rc;

use nalgebra::DMatrix;

use crate::liealg::GroupModel;
use crate::{Error, Result};

use super::expr::{parse_expression, Expr, ExprMatrixData};
use super::Chart;

/// A matrix of scalar expressions over a chart.
#[derive(Debug, Clone)]
pub struct MatrixField {
    chart: Chart,
    rows: usize,
    cols: usize,
    entries: Vec<Expr>,
}

impl MatrixField {
    pub fn new(chart: Chart, rows: usize, cols: usize, entries: Vec<Expr>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::SizeMismatch(format!(
                "{} entries for a {rows}x{cols} field",
                entries.len()
            )));
        }
        for e in &entries {
            if let Some(i) = e.max_coord() {
                if i >= chart.dim() {
                    return Err(Error::UnknownCoordinate {
                        index: i + 1,
                        dim: chart.dim(),
                    });
                }
            }
        }
        Ok(Self {
            chart,
            rows,
            cols,
            entries,
        })
    }

    /// Parses a rectangular array of expression strings.
    pub fn from_strings(chart: Chart, rows: &[Vec<String>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::Invalid(
                "matrix field must be a nonempty rectangular array".into(),
            ));
        }
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in rows {
            for text in row {
                entries.push(parse_expression(text, &chart)?);
            }
        }
        Self::new(chart, nrows, ncols, entries)
    }

    pub fn zeros(chart: Chart, rows: usize, cols: usize) -> Self {
        Self {
            chart,
            rows,
            cols,
            entries: vec![Expr::zero(); rows * cols],
        }
    }

    pub fn identity(chart: Chart, n: usize) -> Self {
        let mut f = Self::zeros(chart, n, n);
        for i in 0..n {
            f.entries[i * n + i] = Expr::one();
        }
        f
    }

    /// `φ · 1_n` for a scalar expression `φ`.
    pub fn scalar_identity(chart: Chart, n: usize, phi: &Expr) -> Self {
        let mut f = Self::zeros(chart, n, n);
        for i in 0..n {
            f.entries[i * n + i] = phi.clone();
        }
        f
    }

    /// Lifts a constant matrix to a field.
    pub fn from_constant(chart: Chart, m: &DMatrix<f64>) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
            .map(|(r, c)| Expr::constant(m[(r, c)]))
            .collect();
        Self {
            chart,
            rows: m.nrows(),
            cols: m.ncols(),
            entries,
        }
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, r: usize, c: usize) -> &Expr {
        &self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.entry(r, c).eval(x))
    }

    /// Evaluation that rejects non-finite results.
    pub fn eval_finite(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.eval(x);
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::FieldSingular(x.to_vec()));
        }
        Ok(m)
    }

    /// No entry mentions a coordinate.
    pub fn is_syntactically_constant(&self) -> bool {
        self.entries.iter().all(|e| e.is_constant())
    }

    /// Entrywise partial derivative.
    pub fn partial(&self, i: usize) -> MatrixField {
        MatrixField {
            chart: self.chart.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.diff(i)).collect(),
        }
    }

    pub fn transpose(&self) -> MatrixField {
        let entries = (0..self.cols)
            .flat_map(|r| (0..self.rows).map(move |c| (r, c)))
            .map(|(r, c)| self.entry(c, r).clone())
            .collect();
        MatrixField {
            chart: self.chart.clone(),
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn add(&self, other: &MatrixField) -> Result<MatrixField> {
        self.zip(other, Expr::add)
    }

    pub fn sub(&self, other: &MatrixField) -> Result<MatrixField> {
        self.zip(other, Expr::sub)
    }

    fn zip(&self, other: &MatrixField, op: fn(Expr, Expr) -> Expr) -> Result<MatrixField> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::SizeMismatch(format!(
                "{}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| op(a.clone(), b.clone()))
            .collect();
        Ok(MatrixField {
            chart: self.chart.clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn scale(&self, factor: &Expr) -> MatrixField {
        MatrixField {
            chart: self.chart.clone(),
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|e| Expr::mul(factor.clone(), e.clone()))
                .collect(),
        }
    }

    pub fn matmul(&self, other: &MatrixField) -> Result<MatrixField> {
        if self.cols != other.rows {
            return Err(Error::SizeMismatch(format!(
                "product of {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut sum = Expr::zero();
                for k in 0..self.cols {
                    sum = Expr::add(
                        sum,
                        Expr::mul(self.entry(r, k).clone(), other.entry(k, c).clone()),
                    );
                }
                entries.push(sum);
            }
        }
        Ok(MatrixField {
            chart: self.chart.clone(),
            rows: self.rows,
            cols: other.cols,
            entries,
        })
    }

    /// Symbolic inverse: adjugate over determinant for `n ≤ 4`, deferred
    /// numeric LU entries for larger sizes.
    pub fn inverse(&self) -> Result<MatrixField> {
        if self.rows != self.cols {
            return Err(Error::SizeMismatch(format!(
                "inverse of a {}x{} field",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n <= 4 {
            let det = self.det_expr();
            let mut entries = Vec::with_capacity(n * n);
            for r in 0..n {
                for c in 0..n {
                    // Adjugate: cofactor of (c, r).
                    let minor = self.minor(c, r);
                    let sign = if (r + c) % 2 == 0 { 1.0 } else { -1.0 };
                    let cof = Expr::mul(Expr::constant(sign), det_of(&minor, n - 1));
                    entries.push(Expr::div(cof, det.clone()));
                }
            }
            MatrixField::new(self.chart.clone(), n, n, entries)
        } else {
            let data = Rc::new(ExprMatrixData {
                n,
                entries: self.entries.clone(),
            });
            let entries = (0..n)
                .flat_map(|r| (0..n).map(move |c| (r, c)))
                .map(|(r, c)| Expr::InvEntry {
                    matrix: Rc::clone(&data),
                    row: r,
                    col: c,
                })
                .collect();
            MatrixField::new(self.chart.clone(), n, n, entries)
        }
    }

    /// Symbolic determinant (Laplace expansion; intended for `n ≤ 4`).
    pub fn det_expr(&self) -> Expr {
        det_of(&self.entries, self.rows)
    }

    fn minor(&self, skip_row: usize, skip_col: usize) -> Vec<Expr> {
        let n = self.rows;
        let mut out = Vec::with_capacity((n - 1) * (n - 1));
        for r in 0..n {
            if r == skip_row {
                continue;
            }
            for c in 0..n {
                if c == skip_col {
                    continue;
                }
                out.push(self.entry(r, c).clone());
            }
        }
        out
    }
}

fn det_of(entries: &[Expr], n: usize) -> Expr {
    match n {
        0 => Expr::one(),
        1 => entries[0].clone(),
        _ => {
            let mut sum = Expr::zero();
            for c in 0..n {
                let mut minor = Vec::with_capacity((n - 1) * (n - 1));
                for r in 1..n {
                    for cc in 0..n {
                        if cc != c {
                            minor.push(entries[r * n + cc].clone());
                        }
                    }
                }
                let term = Expr::mul(entries[c].clone(), det_of(&minor, n - 1));
                sum = if c % 2 == 0 {
                    Expr::add(sum, term)
                } else {
                    Expr::sub(sum, term)
                };
            }
            sum
        }
    }
}

/// A matrix field together with the group it is supposed to take values
/// in. Construction validates membership and invertibility on the
/// evaluation set.
#[derive(Debug, Clone)]
pub struct GroupValuedField {
    field: MatrixField,
    target: GroupModel,
}

impl GroupValuedField {
    pub fn new(field: MatrixField, target: GroupModel) -> Result<Self> {
        if field.rows() != target.matrix_size() || field.cols() != target.matrix_size() {
            return Err(Error::SizeMismatch(format!(
                "{}x{} field into group `{}` of size {}",
                field.rows(),
                field.cols(),
                target.name(),
                target.matrix_size()
            )));
        }
        let candidate = Self { field, target };
        let (ok, residual, point) = candidate.validate();
        if !ok {
            return Err(Error::FieldNotInGroup { residual, point });
        }
        Ok(candidate)
    }

    /// Evaluates the membership residual at every evaluation point and
    /// reports the worst offender.
    pub fn validate(&self) -> (bool, f64, Vec<f64>) {
        let mut worst = 0.0_f64;
        let mut worst_point = Vec::new();
        for x in self.field.chart().evaluation_points() {
            let m = self.field.eval(&x);
            let r = if m.iter().all(|v| v.is_finite()) {
                let inv_ok = m.clone().try_inverse().is_some();
                let base = self.target.membership_residual(&m);
                if inv_ok {
                    base
                } else {
                    f64::INFINITY
                }
            } else {
                f64::INFINITY
            };
            if r > worst {
                worst = r;
                worst_point = x;
            }
        }
        (worst <= self.target.tolerance(), worst, worst_point)
    }

    pub fn field(&self) -> &MatrixField {
        &self.field
    }

    pub fn target(&self) -> &GroupModel {
        &self.target
    }

    pub fn chart(&self) -> &Chart {
        self.field.chart()
    }

    pub fn matrix_size(&self) -> usize {
        self.target.matrix_size()
    }

    pub fn eval(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.field.eval_finite(x)
    }

    /// The pointwise inverse field `x ↦ h(x)^{-1}`, which takes values in
    /// the same group.
    pub fn pointwise_inverse(&self) -> Result<GroupValuedField> {
        GroupValuedField::new(self.inverse_field()?, self.target.clone())
    }

    /// The inverse as a plain matrix field. For special-orthogonal
    /// targets this is the transpose, which keeps expressions small.
    pub fn inverse_field(&self) -> Result<MatrixField> {
        match self.target.membership_rule() {
            crate::liealg::MembershipRule::SpecialOrthogonal => Ok(self.field.transpose()),
            _ => self.field.inverse(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::finite_difference;
    use super::*;
    use crate::liealg::catalog_group;

    fn chart1() -> Chart {
        Chart::unit_cube(1, 5).unwrap()
    }

    fn strings(rows: &[&[&str]]) -> Vec<Vec<String>> {
        rows.iter()
            .map(|r| r.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn from_strings_and_eval() {
        let f = MatrixField::from_strings(
            chart1(),
            &strings(&[&["1 + x1^2", "0"], &["x1", "2"]]),
        )
        .unwrap();
        let m = f.eval(&[0.5]);
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.25, 0.0, 0.5, 2.0]));
    }

    #[test]
    fn from_strings_rejects_ragged_rows() {
        assert!(MatrixField::from_strings(chart1(), &strings(&[&["1", "2"], &["3"]])).is_err());
    }

    #[test]
    fn algebraic_operations() {
        let chart = chart1();
        let a = MatrixField::from_strings(chart.clone(), &strings(&[&["x1", "1"], &["0", "2"]]))
            .unwrap();
        let b = MatrixField::identity(chart.clone(), 2);
        let x = [0.7];
        let sum = a.add(&b).unwrap().eval(&x);
        assert_eq!(sum, DMatrix::from_row_slice(2, 2, &[1.7, 1.0, 0.0, 3.0]));
        let prod = a.matmul(&a).unwrap().eval(&x);
        assert_eq!(prod, a.eval(&x).clone() * a.eval(&x));
        let t = a.transpose().eval(&x);
        assert_eq!(t, a.eval(&x).transpose());
        let scaled = a.scale(&Expr::constant(2.0)).eval(&x);
        assert_eq!(scaled, a.eval(&x) * 2.0);
    }

    #[test]
    fn partial_differentiates_entries() {
        let f = MatrixField::from_strings(chart1(), &strings(&[&["x1^3"]])).unwrap();
        let d = f.partial(0);
        assert!((d.eval(&[0.5])[(0, 0)] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn small_inverse_is_symbolic_and_exact() {
        let chart = chart1();
        let f = MatrixField::from_strings(
            chart.clone(),
            &strings(&[&["1 + x1^2", "x1"], &["0", "2"]]),
        )
        .unwrap();
        let inv = f.inverse().unwrap();
        for x in chart.evaluation_points() {
            let prod = f.eval(&x) * inv.eval(&x);
            assert!((prod - DMatrix::identity(2, 2)).norm() < 1e-12);
        }
        // The symbolic inverse stays differentiable: compare the exact
        // derivative with −M⁻¹ (∂M) M⁻¹ and with finite differences.
        let x = [0.37];
        let dinv = inv.partial(0).eval(&x);
        let oracle = -inv.eval(&x) * f.partial(0).eval(&x) * inv.eval(&x);
        assert!((&dinv - oracle).norm() < 1e-12);
        let fd = finite_difference(inv.entry(0, 0), 0, &x, &chart).unwrap();
        assert!((dinv[(0, 0)] - fd).abs() < 1e-6);
    }

    #[test]
    fn large_inverse_uses_deferred_entries() {
        let chart = chart1();
        let n = 5;
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let text = if i == j {
                    format!("{} + x1^2", i + 2)
                } else if j == i + 1 {
                    "x1".to_string()
                } else {
                    "0".to_string()
                };
                entries.push(crate::fields::parse_expression(&text, &chart).unwrap());
            }
        }
        let f = MatrixField::new(chart.clone(), n, n, entries).unwrap();
        let inv = f.inverse().unwrap();
        let x = [0.61];
        let prod = f.eval(&x) * inv.eval(&x);
        assert!((prod - DMatrix::identity(n, n)).norm() < 1e-12);
        let dinv = inv.partial(0).eval(&x);
        let oracle = -inv.eval(&x) * f.partial(0).eval(&x) * inv.eval(&x);
        assert!((dinv - oracle).norm() < 1e-10);
    }

    #[test]
    fn inverse_rejects_singular_fields() {
        let f = MatrixField::from_strings(chart1(), &strings(&[&["x1", "0"], &["0", "1"]]))
            .unwrap();
        // Vanishes at x1 = 0, which is an evaluation point.
        assert!(f.inverse().is_err() || f.inverse().unwrap().eval_finite(&[0.0]).is_err());
    }

    #[test]
    fn determinant_matches_numeric_oracle() {
        let chart = chart1();
        let f = MatrixField::from_strings(
            chart.clone(),
            &strings(&[
                &["1 + x1", "x1", "0"],
                &["x1^2", "2", "1"],
                &["0", "sin(x1)", "3"],
            ]),
        )
        .unwrap();
        let det = f.det_expr();
        for x in chart.evaluation_points() {
            assert!((det.eval(&x) - f.eval(&x).determinant()).abs() < 1e-12);
        }
    }

    #[test]
    fn group_valued_field_validates_membership() {
        let chart = chart1();
        let rot = MatrixField::from_strings(
            chart.clone(),
            &strings(&[&["cos(x1)", "sin(x1)"], &["-sin(x1)", "cos(x1)"]]),
        )
        .unwrap();
        let so2 = catalog_group("so(2)").unwrap();
        let h = GroupValuedField::new(rot, so2.clone()).unwrap();
        let (ok, worst, _) = h.validate();
        assert!(ok, "residual {worst}");

        let inv = h.pointwise_inverse().unwrap();
        for x in chart.evaluation_points() {
            let prod = h.eval(&x).unwrap() * inv.eval(&x).unwrap();
            assert!((prod - DMatrix::identity(2, 2)).norm() < 1e-12);
        }

        // A stretch is not special orthogonal.
        let stretch =
            MatrixField::from_strings(chart, &strings(&[&["1 + x1", "0"], &["0", "1"]])).unwrap();
        assert!(GroupValuedField::new(stretch, so2).is_err());
    }
}
