use nalgebra::DMatrix;

use crate::{Error, Result};

use super::{GroupModel, LieAlgebraModel, MembershipRule, DEFAULT_TOLERANCE};

/// The elementary antisymmetric matrix `L_{ab} = E_{ab} − E_{ba}` in
/// dimension `n` (zero-based indices).
pub(crate) fn l_matrix(n: usize, a: usize, b: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(a, b)] = 1.0;
    m[(b, a)] = -1.0;
    m
}

fn so_basis(d: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::new();
    for a in 0..d {
        for b in (a + 1)..d {
            basis.push(l_matrix(d, a, b));
        }
    }
    basis
}

fn gl_basis(d: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let mut m = DMatrix::zeros(d, d);
            m[(i, j)] = 1.0;
            basis.push(m);
        }
    }
    basis
}

/// Self-dual copy of su(2) inside so(4).
fn su2_plus_basis() -> Vec<DMatrix<f64>> {
    vec![
        l_matrix(4, 0, 1) + l_matrix(4, 2, 3),
        l_matrix(4, 0, 2) - l_matrix(4, 1, 3),
        l_matrix(4, 0, 3) + l_matrix(4, 1, 2),
    ]
}

/// Anti-self-dual copy of su(2) inside so(4).
fn su2_minus_basis() -> Vec<DMatrix<f64>> {
    vec![
        l_matrix(4, 0, 1) - l_matrix(4, 2, 3),
        l_matrix(4, 0, 2) + l_matrix(4, 1, 3),
        l_matrix(4, 0, 3) - l_matrix(4, 1, 2),
    ]
}

fn parse_sized(name: &str, prefix: &str) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    let inner = rest.strip_prefix('(')?.strip_suffix(')')?;
    inner.parse().ok()
}

/// Stable identifiers accepted by [`catalog_algebra`] and
/// [`catalog_group`]; these are the names used in scenario files.
pub fn catalog_names() -> Vec<String> {
    let mut names: Vec<String> = (2..=8).map(|d| format!("so({d})")).collect();
    names.extend((1..=8).map(|d| format!("gl({d})")));
    names.extend(
        [
            "su2_plus_in_so4",
            "su2_minus_in_so4",
            "u1_in_so2",
            "trivial",
        ]
        .map(String::from),
    );
    names.extend((1..=8).map(|d| format!("trivial({d})")));
    names
}

/// Looks up a Lie algebra by its catalog name.
pub fn catalog_algebra(name: &str) -> Result<LieAlgebraModel> {
    if let Some(d) = parse_sized(name, "so") {
        if (2..=8).contains(&d) {
            return LieAlgebraModel::new(name, d, so_basis(d), DEFAULT_TOLERANCE);
        }
    }
    if let Some(d) = parse_sized(name, "gl") {
        if (1..=8).contains(&d) {
            return LieAlgebraModel::new(name, d, gl_basis(d), DEFAULT_TOLERANCE);
        }
    }
    if let Some(d) = parse_sized(name, "trivial") {
        if (1..=8).contains(&d) {
            return LieAlgebraModel::new(name, d, Vec::new(), DEFAULT_TOLERANCE);
        }
    }
    match name {
        "su2_plus_in_so4" => LieAlgebraModel::new(name, 4, su2_plus_basis(), DEFAULT_TOLERANCE),
        "su2_minus_in_so4" => LieAlgebraModel::new(name, 4, su2_minus_basis(), DEFAULT_TOLERANCE),
        "u1_in_so2" => LieAlgebraModel::new(name, 2, so_basis(2), DEFAULT_TOLERANCE),
        "trivial" => LieAlgebraModel::new(name, 1, Vec::new(), DEFAULT_TOLERANCE),
        _ => Err(Error::UnknownCatalogName(name.to_string())),
    }
}

/// Looks up the matrix group a catalog algebra integrates to, with the
/// matching membership rule.
pub fn catalog_group(name: &str) -> Result<GroupModel> {
    let algebra = catalog_algebra(name)?;
    let rule = if name.starts_with("gl") {
        MembershipRule::GeneralLinear
    } else if name.starts_with("trivial") {
        MembershipRule::IdentityOnly
    } else {
        MembershipRule::SpecialOrthogonal
    };
    GroupModel::new(name, algebra, rule, DEFAULT_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::super::bracket;
    use super::*;

    #[test]
    fn every_catalog_name_resolves() {
        for name in catalog_names() {
            let algebra = catalog_algebra(&name).unwrap();
            assert_eq!(algebra.name(), name);
            catalog_group(&name).unwrap();
        }
    }

    #[test]
    fn unknown_name_is_rejected() {
        assert!(matches!(
            catalog_algebra("so(99)"),
            Err(Error::UnknownCatalogName(_))
        ));
        assert!(catalog_algebra("sp(4)").is_err());
    }

    #[test]
    fn expected_dimensions() {
        assert_eq!(catalog_algebra("so(3)").unwrap().dim(), 3);
        assert_eq!(catalog_algebra("so(4)").unwrap().dim(), 6);
        assert_eq!(catalog_algebra("gl(4)").unwrap().dim(), 16);
        assert_eq!(catalog_algebra("su2_plus_in_so4").unwrap().dim(), 3);
        assert_eq!(catalog_algebra("trivial(5)").unwrap().dim(), 0);
        assert_eq!(catalog_algebra("u1_in_so2").unwrap().dim(), 1);
    }

    #[test]
    fn su2_factors_commute() {
        let plus = catalog_algebra("su2_plus_in_so4").unwrap();
        let minus = catalog_algebra("su2_minus_in_so4").unwrap();
        for p in plus.basis() {
            for m in minus.basis() {
                assert!(bracket(p, m).unwrap().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn su2_plus_has_su2_structure_constants() {
        // [T_a, T_b] = −2 T_c cyclically for this normalization; the
        // oracle is direct matrix multiplication inside the model.
        let plus = catalog_algebra("su2_plus_in_so4").unwrap();
        let b = plus.basis();
        let br = bracket(&b[0], &b[1]).unwrap();
        assert!((&br + &b[2] * 2.0).norm() < 1e-15);
    }

    #[test]
    fn membership_rules_match_families() {
        assert_eq!(
            catalog_group("so(5)").unwrap().membership_rule(),
            MembershipRule::SpecialOrthogonal
        );
        assert_eq!(
            catalog_group("gl(2)").unwrap().membership_rule(),
            MembershipRule::GeneralLinear
        );
        assert_eq!(
            catalog_group("trivial(3)").unwrap().membership_rule(),
            MembershipRule::IdentityOnly
        );
    }
}
