//! Bundled example scenarios, buildable by name from the `catalog`
//! subcommand.

use nalgebra::DMatrix;
use normdef_core::liealg::{catalog_algebra, exponential};

use crate::scenario::{AlgebraSpec, ChartSpec, Scenario};

pub const BUILTIN_NAMES: [&str; 4] = [
    "conformal_so3",
    "constant_su2",
    "su2_diag_break",
    "trivial_frame",
];

pub fn builtin_catalog(name: &str) -> Result<Scenario, String> {
    match name {
        "conformal_so3" => Ok(conformal_so3()),
        "constant_su2" => Ok(constant_su2()),
        "su2_diag_break" => Ok(su2_diag_break()),
        "trivial_frame" => Ok(trivial_frame()),
        other => Err(format!(
            "unknown catalog scenario `{other}`; available: {}",
            BUILTIN_NAMES.join(", ")
        )),
    }
}

fn unit_chart(dim: usize, grid: usize) -> ChartSpec {
    ChartSpec {
        bounds: vec![(0.0, 1.0); dim],
        grid: vec![grid; dim],
    }
}

/// Renders a constant matrix as a grid of expression strings.
fn constant_strings(m: &DMatrix<f64>) -> Vec<Vec<String>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| {
                    let v = m[(r, c)];
                    if v == 0.0 {
                        "0".to_string()
                    } else {
                        format!("({v:.17e})")
                    }
                })
                .collect()
        })
        .collect()
}

/// Renders `factor(x) * m` for a constant coefficient matrix `m`.
fn scaled_strings(m: &DMatrix<f64>, factor: &str) -> Vec<Vec<String>> {
    (0..m.nrows())
        .map(|r| {
            (0..m.ncols())
                .map(|c| {
                    let v = m[(r, c)];
                    if v == 0.0 {
                        "0".to_string()
                    } else {
                        format!("({v:.17e})*{factor}")
                    }
                })
                .collect()
        })
        .collect()
}

/// Conformal rescaling of an SO(3)-structure on a 3-dimensional chart:
/// h = φ·1 with φ = 1 + x1², acting through GL(3) ⊃ SO(3).
fn conformal_so3() -> Scenario {
    let so3 = catalog_algebra("so(3)").expect("catalog");
    let basis = so3.basis();
    let connection = vec![
        scaled_strings(&basis[0], "x2"),
        scaled_strings(&basis[1], "x3"),
        scaled_strings(&basis[2], "x1"),
    ];
    let phi = "1 + x1^2";
    let h = (0..3)
        .map(|r| {
            (0..3)
                .map(|c| if r == c { phi.to_string() } else { "0".into() })
                .collect()
        })
        .collect();
    Scenario {
        name: "conformal_so3".into(),
        chart: unit_chart(3, 3),
        ambient: "gl(3)".into(),
        subgroup: AlgebraSpec::Name("so(3)".into()),
        h,
        connection: Some(connection),
        frame: None,
        representation: None,
        phi_algebra: None,
        checks: [
            "admissibility",
            "deform",
            "zeta",
            "torsion",
            "metric-compat",
            "instanton",
        ]
        .map(String::from)
        .to_vec(),
        tolerances: Default::default(),
    }
}

/// Constant deformation of an SU(2)₊-structure on a 4-dimensional chart
/// by an element of the commuting SU(2)₋ factor.
fn constant_su2() -> Scenario {
    let su2p = catalog_algebra("su2_plus_in_so4").expect("catalog");
    let su2m = catalog_algebra("su2_minus_in_so4").expect("catalog");
    let generator = su2m.element(&[0.6, -0.3, 0.9]).expect("element");
    let h0 = exponential(&generator).expect("exponential");
    let basis = su2p.basis();
    let zero = vec![vec!["0".to_string(); 4]; 4];
    let connection = vec![
        scaled_strings(&basis[0], "x2"),
        scaled_strings(&basis[1], "x1"),
        scaled_strings(&basis[2], "x3"),
        zero,
    ];
    Scenario {
        name: "constant_su2".into(),
        chart: unit_chart(4, 2),
        ambient: "so(4)".into(),
        subgroup: AlgebraSpec::Name("su2_plus_in_so4".into()),
        h: constant_strings(&h0),
        connection: Some(connection),
        frame: None,
        representation: None,
        phi_algebra: None,
        checks: ["admissibility", "deform", "zeta", "torsion-change", "phi"]
            .map(String::from)
            .to_vec(),
        tolerances: Default::default(),
    }
}

/// A deformation that is admissible for the trivial structure but fails
/// to preserve the SU(2)₊ instanton bundle: h = diag(2,1,1,1).
fn su2_diag_break() -> Scenario {
    let h0 = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0, 1.0, 1.0]));
    Scenario {
        name: "su2_diag_break".into(),
        chart: unit_chart(4, 2),
        ambient: "gl(4)".into(),
        subgroup: AlgebraSpec::Name("trivial(4)".into()),
        h: constant_strings(&h0),
        connection: None,
        frame: None,
        representation: None,
        phi_algebra: Some("su2_plus_in_so4".into()),
        checks: ["admissibility", "phi"].map(String::from).to_vec(),
        tolerances: Default::default(),
    }
}

/// Trivial structure group: the whole connection is intrinsic torsion
/// and the identity deformation is vacuously admissible.
fn trivial_frame() -> Scenario {
    let so3 = catalog_algebra("so(3)").expect("catalog");
    let basis = so3.basis();
    let connection = vec![
        scaled_strings(&basis[0], "x2"),
        scaled_strings(&basis[1], "x3"),
        scaled_strings(&basis[2], "x1"),
    ];
    let h = (0..3)
        .map(|r| {
            (0..3)
                .map(|c| if r == c { "1".to_string() } else { "0".into() })
                .collect()
        })
        .collect();
    Scenario {
        name: "trivial_frame".into(),
        chart: unit_chart(3, 3),
        ambient: "so(3)".into(),
        subgroup: AlgebraSpec::Name("trivial(3)".into()),
        h,
        connection: Some(connection),
        frame: None,
        representation: None,
        phi_algebra: None,
        checks: ["admissibility", "zeta", "torsion"].map(String::from).to_vec(),
        tolerances: Default::default(),
    }
}
