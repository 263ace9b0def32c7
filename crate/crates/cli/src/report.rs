//! Report emission: a fixed-field-order JSON document or a flat CSV
//! table. Output is byte-stable for a given scenario except for the
//! elapsed-time columns.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub check: String,
    /// One of `pass`, `fail`, `error`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub tolerance: f64,
    pub elapsed_ms: u64,
}

impl CheckReport {
    pub fn is_pass(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: String,
    pub scenario: String,
    pub digest: String,
    /// `pass` iff every check passed.
    pub status: String,
    pub checks: Vec<CheckReport>,
}

impl Report {
    pub fn new(scenario: String, digest: String, checks: Vec<CheckReport>) -> Self {
        let status = if checks.iter().all(CheckReport::is_pass) {
            "pass"
        } else {
            "fail"
        };
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            scenario,
            digest,
            status: status.to_string(),
            checks,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.status == "pass"
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serialization");
        out.push('\n');
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,status,residual,point,elapsed_ms\n");
        for c in &self.checks {
            let residual = c.residual.map(|r| format!("{r:e}")).unwrap_or_default();
            let point = c
                .point
                .as_ref()
                .map(|p| {
                    p.iter()
                        .map(|v| format!("{v}"))
                        .collect::<Vec<_>>()
                        .join(";")
                })
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                c.check, c.status, residual, point, c.elapsed_ms
            ));
        }
        out
    }

    pub fn render(&self, format: &str) -> String {
        match format {
            "csv" => self.to_csv(),
            _ => self.to_json(),
        }
    }
}
