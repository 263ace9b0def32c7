use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

use super::{adjoint, exponential, LieAlgebraModel, Splitting};

/// How membership in a matrix group is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MembershipRule {
    /// `‖aᵀa − 1‖ + |det a − 1|`.
    SpecialOrthogonal,
    /// Invertibility only; residual 0 for any matrix with nonzero
    /// determinant.
    GeneralLinear,
    /// `‖a − 1‖`; the trivial group.
    IdentityOnly,
}

impl MembershipRule {
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        match self {
            MembershipRule::SpecialOrthogonal => {
                let gram = a.transpose() * a;
                let ortho = (&gram - DMatrix::identity(n, n)).norm();
                ortho + (a.determinant() - 1.0).abs()
            }
            MembershipRule::GeneralLinear => {
                let det = a.determinant().abs();
                if det > 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            MembershipRule::IdentityOnly => (a - DMatrix::identity(n, n)).norm(),
        }
    }
}

/// A matrix Lie group: a membership predicate over a fixed matrix size
/// together with its Lie algebra.
#[derive(Debug, Clone)]
pub struct GroupModel {
    name: String,
    matrix_size: usize,
    algebra: LieAlgebraModel,
    membership: MembershipRule,
    tolerance: f64,
}

impl GroupModel {
    /// Builds a model and verifies that the identity passes membership
    /// exactly and the exponential of every algebra basis element passes
    /// within tolerance.
    pub fn new(
        name: impl Into<String>,
        algebra: LieAlgebraModel,
        membership: MembershipRule,
        tolerance: f64,
    ) -> Result<Self> {
        let name = name.into();
        let matrix_size = algebra.matrix_size();
        let model = Self {
            name,
            matrix_size,
            algebra,
            membership,
            tolerance,
        };
        let id = DMatrix::identity(matrix_size, matrix_size);
        let id_residual = model.membership_residual(&id);
        if id_residual != 0.0 {
            return Err(Error::NotInGroup {
                group: model.name,
                residual: id_residual,
            });
        }
        for e in model.algebra.basis() {
            let g = exponential(e)?;
            let residual = model.membership_residual(&g);
            if residual > model.tolerance {
                return Err(Error::NotInGroup {
                    group: model.name,
                    residual,
                });
            }
        }
        Ok(model)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix_size(&self) -> usize {
        self.matrix_size
    }

    pub fn algebra(&self) -> &LieAlgebraModel {
        &self.algebra
    }

    pub fn membership_rule(&self) -> MembershipRule {
        self.membership
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn membership_residual(&self, a: &DMatrix<f64>) -> f64 {
        if a.nrows() != self.matrix_size || a.ncols() != self.matrix_size {
            return f64::INFINITY;
        }
        self.membership.residual(a)
    }

    pub fn contains(&self, a: &DMatrix<f64>) -> bool {
        self.membership_residual(a) <= self.tolerance
    }
}

/// How a group element acts on a representation space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepresentationKind {
    /// The defining representation of a matrix group on `R^n`.
    Standard,
}

/// A representation together with an optional reference vector whose
/// stabiliser cuts out the subgroup.
#[derive(Debug, Clone)]
pub struct RepresentationModel {
    target_dim: usize,
    kind: RepresentationKind,
    tau0: Option<DVector<f64>>,
}

impl RepresentationModel {
    pub fn standard(target_dim: usize, tau0: Option<DVector<f64>>) -> Result<Self> {
        if let Some(v) = &tau0 {
            if v.len() != target_dim {
                return Err(Error::SizeMismatch(format!(
                    "reference vector of length {} in dimension {}",
                    v.len(),
                    target_dim
                )));
            }
        }
        Ok(Self {
            target_dim,
            kind: RepresentationKind::Standard,
            tau0,
        })
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn tau0(&self) -> Option<&DVector<f64>> {
        self.tau0.as_ref()
    }

    /// Matrix representing a group element on the target space.
    pub fn matrix_for(&self, a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match self.kind {
            RepresentationKind::Standard => {
                if a.nrows() != self.target_dim || a.ncols() != self.target_dim {
                    return Err(Error::SizeMismatch(format!(
                        "standard representation of a {}x{} matrix in dimension {}",
                        a.nrows(),
                        a.ncols(),
                        self.target_dim
                    )));
                }
                Ok(a.clone())
            }
        }
    }
}

/// Algebra-level normaliser test: `Ad(a)(𝔤) ⊆ 𝔤`.
///
/// The residual is the worst distance of `Ad(a)(E)` from `𝔤` over the
/// `𝔤`-basis. For connected `G` this is equivalent to the group-level
/// condition `a g a^{-1} ∈ G`; for disconnected `G` it tests the
/// connected-component condition.
pub fn normaliser_membership(a: &DMatrix<f64>, split: &Splitting) -> Result<(bool, f64)> {
    let mut residual = 0.0_f64;
    for e in split.sub().basis() {
        let ad = adjoint(a, e)?;
        residual = residual.max(split.distance_from_sub(&ad));
    }
    Ok((residual <= split.tolerance(), residual))
}

/// Centraliser test: `Ad(a)(E) = E` for every `𝔤`-basis element.
pub fn centraliser_membership(a: &DMatrix<f64>, sub: &LieAlgebraModel) -> Result<(bool, f64)> {
    let mut residual = 0.0_f64;
    for e in sub.basis() {
        let ad = adjoint(a, e)?;
        residual = residual.max((ad - e).norm());
    }
    Ok((residual <= sub.tolerance(), residual))
}

/// Stabiliser test: `ρ(g)(τ_0) = τ_0`.
pub fn stabiliser_membership(g: &DMatrix<f64>, rep: &RepresentationModel) -> Result<(bool, f64)> {
    let tau0 = rep.tau0().ok_or(Error::MissingTau0)?;
    let m = rep.matrix_for(g)?;
    let residual = (m * tau0 - tau0).norm();
    Ok((residual <= super::DEFAULT_TOLERANCE, residual))
}
