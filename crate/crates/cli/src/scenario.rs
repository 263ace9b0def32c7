//! Declarative scenario files: JSON descriptions of a chart, a group
//! pair, a deformation field, and the checks to run against them.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use normdef_core::fields::Chart;
use normdef_core::liealg::{catalog_algebra, LieAlgebraModel};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartSpec {
    pub bounds: Vec<(f64, f64)>,
    pub grid: Vec<usize>,
}

impl ChartSpec {
    pub fn build(&self, grid_override: Option<usize>) -> Result<Chart, String> {
        let grid = match grid_override {
            Some(n) => vec![n; self.bounds.len()],
            None => self.grid.clone(),
        };
        Chart::new(self.bounds.clone(), grid).map_err(|e| e.to_string())
    }
}

/// Subalgebra reference: either a catalog name or an explicit basis
/// given as row-major matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Name(String),
    Explicit {
        name: String,
        matrix_size: usize,
        basis: Vec<Vec<f64>>,
    },
}

impl AlgebraSpec {
    pub fn build(&self) -> Result<LieAlgebraModel, String> {
        match self {
            AlgebraSpec::Name(name) => catalog_algebra(name).map_err(|e| e.to_string()),
            AlgebraSpec::Explicit {
                name,
                matrix_size,
                basis,
            } => {
                let n = *matrix_size;
                let matrices = basis
                    .iter()
                    .map(|flat| {
                        if flat.len() != n * n {
                            return Err(format!(
                                "basis entry of `{name}` has {} values, expected {}",
                                flat.len(),
                                n * n
                            ));
                        }
                        Ok(nalgebra::DMatrix::from_row_slice(n, n, flat))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                LieAlgebraModel::with_default_tolerance(name.clone(), n, matrices)
                    .map_err(|e| e.to_string())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepresentationSpec {
    pub dim: usize,
    pub tau0: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub chart: ChartSpec,
    /// Catalog name of the ambient group H.
    pub ambient: String,
    /// The subgroup's Lie algebra 𝔤 ⊆ 𝔥.
    pub subgroup: AlgebraSpec,
    /// Deformation field as a matrix of expression strings.
    pub h: Vec<Vec<String>>,
    /// Connection 1-form: one expression matrix per coordinate direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<Vec<Vec<Vec<String>>>>,
    /// Frame field as a matrix of expression strings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representation: Option<RepresentationSpec>,
    /// Algebra used by the `phi` preservation check when it differs from
    /// the subgroup (e.g. a trivial structure deformed across su(2)_+).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_algebra: Option<String>,
    pub checks: Vec<String>,
    /// Per-check tolerance overrides.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerances: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn from_json(bytes: &[u8]) -> Result<Self, String> {
        serde_json::from_slice(bytes).map_err(|e| format!("scenario parse error: {e}"))
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("scenario serialization");
        out.push('\n');
        out
    }
}

/// Stable 64-bit FNV-1a digest of the scenario bytes, echoed in reports
/// so a report can be traced back to its exact input.
pub fn digest(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}
