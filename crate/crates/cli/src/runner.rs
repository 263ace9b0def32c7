//! Executes the checks requested by a scenario and collects a report.

use std::time::Instant;

use normdef_core::deform::{
    check_admissibility, deform_connection, extend_connection_rep, intrinsic_torsion,
    metric_compatibility_residual, torsion_change, zeta_form, DeformationSetup, FrameField,
    LocalConnection,
};
use normdef_core::fields::{
    field_strength, maurer_cartan_pullback, GroupValuedField, LieValuedForm, MatrixField,
};
use normdef_core::liealg::{
    build_splitting, catalog_algebra, catalog_group, LieAlgebraModel, Splitting,
};
use normdef_core::Error;

use crate::report::{CheckReport, Report};
use crate::scenario::{digest, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckKind {
    Admissibility,
    Deform,
    Zeta,
    Torsion,
    TorsionChange,
    MetricCompat,
    Phi,
    Instanton,
}

impl CheckKind {
    pub fn parse(name: &str) -> Result<Self, String> {
        Ok(match name {
            "admissibility" => CheckKind::Admissibility,
            "deform" => CheckKind::Deform,
            "zeta" => CheckKind::Zeta,
            "torsion" => CheckKind::Torsion,
            "torsion-change" => CheckKind::TorsionChange,
            "metric-compat" => CheckKind::MetricCompat,
            "phi" => CheckKind::Phi,
            "instanton" => CheckKind::Instanton,
            other => {
                return Err(format!(
                    "unknown check `{other}` (expected one of: admissibility, deform, zeta, \
                     torsion, torsion-change, metric-compat, phi, instanton)"
                ))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Admissibility => "admissibility",
            CheckKind::Deform => "deform",
            CheckKind::Zeta => "zeta",
            CheckKind::Torsion => "torsion",
            CheckKind::TorsionChange => "torsion-change",
            CheckKind::MetricCompat => "metric-compat",
            CheckKind::Phi => "phi",
            CheckKind::Instanton => "instanton",
        }
    }

    fn default_tolerance(self) -> f64 {
        match self {
            CheckKind::TorsionChange => 1e-8,
            _ => 1e-9,
        }
    }

    fn needs_setup(self) -> bool {
        !matches!(self, CheckKind::Torsion | CheckKind::MetricCompat)
    }

    fn needs_connection(self) -> bool {
        matches!(
            self,
            CheckKind::Deform
                | CheckKind::Torsion
                | CheckKind::TorsionChange
                | CheckKind::MetricCompat
                | CheckKind::Instanton
        )
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Global tolerance override for every check.
    pub tol: Option<f64>,
    /// Per-axis grid resolution override.
    pub grid: Option<usize>,
    /// Restrict the run to one check (plus its admissibility
    /// prerequisite); used by the single-purpose subcommands.
    pub only: Option<CheckKind>,
}

/// Everything built once from the scenario and shared between checks.
struct Context {
    split: Splitting,
    h_field: MatrixField,
    ambient_name: String,
    connection: Option<LieValuedForm>,
    frame: FrameField,
    phi_algebra: LieAlgebraModel,
}

enum Outcome {
    Residual {
        residual: f64,
        point: Option<Vec<f64>>,
    },
    Error(String),
}

pub fn run_scenario(sc: &Scenario, raw: &[u8], opts: &RunOptions) -> Result<Report, String> {
    let requested = resolve_checks(sc, opts)?;
    let ctx = build_context(sc, opts)?;

    for kind in &requested {
        if kind.needs_connection() && ctx.connection.is_none() {
            return Err(format!(
                "check `{}` requires a `connection` entry in the scenario",
                kind.name()
            ));
        }
    }

    let mut setup: Option<DeformationSetup> = None;
    let mut admissibility_ok = true;
    let mut checks = Vec::new();
    for kind in requested {
        let tol = opts
            .tol
            .or_else(|| sc.tolerances.get(kind.name()).copied())
            .unwrap_or_else(|| kind.default_tolerance());
        let start = Instant::now();
        let outcome = if kind.needs_setup() && kind != CheckKind::Admissibility && !admissibility_ok
        {
            Outcome::Error("prerequisite failed: admissibility".into())
        } else {
            run_check(kind, &ctx, &mut setup)
        };
        let elapsed_ms = start.elapsed().as_millis() as u64;
        let report = match outcome {
            Outcome::Residual { residual, point } => CheckReport {
                check: kind.name().to_string(),
                status: if residual <= tol { "pass" } else { "fail" }.to_string(),
                residual: Some(residual),
                point,
                message: None,
                tolerance: tol,
                elapsed_ms,
            },
            Outcome::Error(message) => CheckReport {
                check: kind.name().to_string(),
                status: "error".to_string(),
                residual: None,
                point: None,
                message: Some(message),
                tolerance: tol,
                elapsed_ms,
            },
        };
        if kind == CheckKind::Admissibility {
            admissibility_ok = report.is_pass();
        }
        checks.push(report);
    }

    Ok(Report::new(sc.name.clone(), digest(raw), checks))
}

/// Requested checks in dependency order, with admissibility prepended
/// whenever a setup-dependent check needs it.
fn resolve_checks(sc: &Scenario, opts: &RunOptions) -> Result<Vec<CheckKind>, String> {
    let mut kinds = match opts.only {
        Some(kind) => vec![kind],
        None => sc
            .checks
            .iter()
            .map(|name| CheckKind::parse(name))
            .collect::<Result<Vec<_>, _>>()?,
    };
    if kinds.is_empty() {
        return Err("scenario requests no checks".into());
    }
    if kinds.iter().any(|k| k.needs_setup()) && !kinds.contains(&CheckKind::Admissibility) {
        kinds.push(CheckKind::Admissibility);
    }
    kinds.sort();
    kinds.dedup();
    Ok(kinds)
}

fn build_context(sc: &Scenario, opts: &RunOptions) -> Result<Context, String> {
    let chart = sc.chart.build(opts.grid)?;
    let ambient_alg = catalog_algebra(&sc.ambient).map_err(|e| e.to_string())?;
    let sub = sc.subgroup.build()?;
    let split = build_splitting(&ambient_alg, &sub).map_err(|e| e.to_string())?;

    let h_field = MatrixField::from_strings(chart.clone(), &sc.h).map_err(|e| e.to_string())?;
    if h_field.rows() != split.matrix_size() || h_field.cols() != split.matrix_size() {
        return Err(format!(
            "deformation field is {}x{}, expected {n}x{n} for `{}`",
            h_field.rows(),
            h_field.cols(),
            sc.ambient,
            n = split.matrix_size()
        ));
    }

    let connection = sc
        .connection
        .as_ref()
        .map(|components| {
            if components.len() != chart.dim() {
                return Err(format!(
                    "connection has {} components, expected one per coordinate ({})",
                    components.len(),
                    chart.dim()
                ));
            }
            let fields = components
                .iter()
                .map(|rows| MatrixField::from_strings(chart.clone(), rows))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| e.to_string())?;
            LieValuedForm::new(chart.clone(), 1, Some(sub.clone()), fields)
                .map_err(|e| e.to_string())
        })
        .transpose()?;

    let frame = match &sc.frame {
        Some(rows) => {
            let field =
                MatrixField::from_strings(chart.clone(), rows).map_err(|e| e.to_string())?;
            FrameField::new(field).map_err(|e| e.to_string())?
        }
        None => FrameField::identity(chart.clone()).map_err(|e| e.to_string())?,
    };

    if let Some(rep) = &sc.representation {
        if rep.dim != split.matrix_size() {
            return Err(format!(
                "representation dimension {} does not match matrix size {}",
                rep.dim,
                split.matrix_size()
            ));
        }
        if rep.tau0.len() != rep.dim {
            return Err(format!(
                "tau0 has {} entries, expected {}",
                rep.tau0.len(),
                rep.dim
            ));
        }
    }

    let phi_algebra = match &sc.phi_algebra {
        Some(name) => catalog_algebra(name).map_err(|e| e.to_string())?,
        None => sub.clone(),
    };

    Ok(Context {
        split,
        h_field,
        ambient_name: sc.ambient.clone(),
        connection,
        frame,
        phi_algebra,
    })
}

fn run_check(kind: CheckKind, ctx: &Context, setup: &mut Option<DeformationSetup>) -> Outcome {
    match kind {
        CheckKind::Admissibility => check_admissibility_outcome(ctx, setup),
        CheckKind::Deform => {
            with_setup(setup, |s| check_deform(ctx, s)).unwrap_or_else(Outcome::Error)
        }
        CheckKind::Zeta => with_setup(setup, |s| check_zeta(ctx, s)).unwrap_or_else(Outcome::Error),
        CheckKind::Torsion => check_torsion(ctx),
        CheckKind::TorsionChange => {
            with_setup(setup, |s| check_torsion_change(ctx, s)).unwrap_or_else(Outcome::Error)
        }
        CheckKind::MetricCompat => check_metric_compat(ctx),
        CheckKind::Phi => with_setup(setup, |s| check_phi(ctx, s)).unwrap_or_else(Outcome::Error),
        CheckKind::Instanton => {
            with_setup(setup, |s| check_instanton(ctx, s)).unwrap_or_else(Outcome::Error)
        }
    }
}

fn with_setup<'a>(
    setup: &'a mut Option<DeformationSetup>,
    f: impl FnOnce(&'a DeformationSetup) -> Outcome,
) -> Result<Outcome, String> {
    match setup.as_ref() {
        Some(s) => Ok(f(s)),
        None => Err("prerequisite failed: admissibility".into()),
    }
}

fn check_admissibility_outcome(ctx: &Context, setup: &mut Option<DeformationSetup>) -> Outcome {
    let group = match catalog_group(&ctx.ambient_name) {
        Ok(g) => g,
        Err(e) => return Outcome::Error(e.to_string()),
    };
    let h = match GroupValuedField::new(ctx.h_field.clone(), group) {
        Ok(h) => h,
        Err(Error::FieldNotInGroup { residual, point }) => {
            return Outcome::Residual {
                residual,
                point: Some(point),
            }
        }
        Err(e) => return Outcome::Error(e.to_string()),
    };
    match check_admissibility(&h, &ctx.split) {
        Ok(s) => {
            let residual = s.worst_normaliser_residual();
            *setup = Some(s);
            Outcome::Residual {
                residual,
                point: None,
            }
        }
        Err(Error::Admissibility { residual, point }) => Outcome::Residual {
            residual,
            point: Some(point),
        },
        Err(e) => Outcome::Error(e.to_string()),
    }
}

fn check_deform(ctx: &Context, setup: &DeformationSetup) -> Outcome {
    let form = ctx.connection.clone().expect("connection checked upfront");
    let a = match LocalConnection::new(form, "s") {
        Ok(a) => a,
        Err(e) => return Outcome::Error(e.to_string()),
    };
    match deform_connection(&a, setup) {
        Ok(deformed) => match deformed.check_compatible(setup.splitting()) {
            Ok(residual) => Outcome::Residual {
                residual,
                point: None,
            },
            Err(Error::CompatibilityLost { residual, point }) => Outcome::Residual {
                residual,
                point: Some(point),
            },
            Err(e) => Outcome::Error(e.to_string()),
        },
        Err(Error::CompatibilityLost { residual, point }) => Outcome::Residual {
            residual,
            point: Some(point),
        },
        Err(e) => Outcome::Error(e.to_string()),
    }
}

/// ζ must be complement-valued; when a connection is present the
/// obstruction identity `extend − deform = ζ` is verified as well, and
/// for conformal deformations ζ is matched against `d log(φ)·1`.
fn check_zeta(ctx: &Context, setup: &DeformationSetup) -> Outcome {
    let zeta = match zeta_form(setup) {
        Ok(z) => z,
        Err(e) => return Outcome::Error(e.to_string()),
    };
    let leak = match zeta.apply_matrix_map(&setup.splitting().projector_matrix_sub()) {
        Ok(l) => l.worst_norm(),
        Err(e) => return Outcome::Error(e.to_string()),
    };
    let mut residual = leak;
    if setup.is_conformal() {
        let n = ctx.h_field.rows();
        let chart = ctx.h_field.chart();
        for mu in 0..chart.dim() {
            let dphi = ctx.h_field.partial(mu);
            for x in chart.evaluation_points() {
                let phi = ctx.h_field.eval(&x)[(0, 0)];
                let expected =
                    nalgebra::DMatrix::<f64>::identity(n, n) * (dphi.eval(&x)[(0, 0)] / phi);
                residual = residual.max((zeta.eval_component(mu, &x) - expected).norm());
            }
        }
    }
    // The obstruction identity needs a compatible (𝔤-valued) connection;
    // when the scenario's connection is not, only the leak is reported.
    let compatible = ctx
        .connection
        .as_ref()
        .map(|form| {
            form.apply_matrix_map(&setup.splitting().projector_matrix_complement())
                .map(|leak| leak.worst_norm() <= setup.splitting().tolerance())
                .unwrap_or(false)
        })
        .unwrap_or(false);
    if let (Some(form), true) = (&ctx.connection, compatible) {
        let gap = (|| -> normdef_core::Result<f64> {
            let a = LocalConnection::new(form.clone(), "s")?;
            let deformed = deform_connection(&a, setup)?;
            let extended = extend_connection_rep(&a, setup)?;
            Ok(extended.sub(deformed.form())?.sub(&zeta)?.worst_norm())
        })();
        match gap {
            Ok(g) => residual = residual.max(g),
            Err(e) => return Outcome::Error(e.to_string()),
        }
    }
    Outcome::Residual {
        residual,
        point: None,
    }
}

/// The intrinsic torsion is the complement part of the connection; the
/// residual is its leak back into the subalgebra.
fn check_torsion(ctx: &Context) -> Outcome {
    let form = ctx.connection.clone().expect("connection checked upfront");
    match intrinsic_torsion(&form, &ctx.split) {
        Ok(t) => match t.apply_matrix_map(&ctx.split.projector_matrix_sub()) {
            Ok(leak) => Outcome::Residual {
                residual: leak.worst_norm(),
                point: None,
            },
            Err(e) => Outcome::Error(e.to_string()),
        },
        Err(e) => Outcome::Error(e.to_string()),
    }
}

/// Symbolic torsion change against an independent pointwise evaluation
/// of `Ad(h)∘pr_m∘(Ad(h⁻¹)A + h*μ) − pr_m∘A`.
fn check_torsion_change(ctx: &Context, setup: &DeformationSetup) -> Outcome {
    let form = ctx.connection.clone().expect("connection checked upfront");
    let result = (|| -> normdef_core::Result<(f64, Vec<f64>)> {
        let change = torsion_change(&form, &form, setup)?;
        let mc = maurer_cartan_pullback(setup.h())?;
        let split = setup.splitting();
        let mut worst = 0.0_f64;
        let mut worst_point = Vec::new();
        for x in form.chart().evaluation_points() {
            let hx = setup.h().eval(&x)?;
            let hx_inv = hx
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::FieldSingular(x.clone()))?;
            for mu in 0..form.chart().dim() {
                let a_mu = form.eval_component(mu, &x);
                let mc_mu = mc.eval_component(mu, &x);
                let transported = &hx_inv * &a_mu * &hx + mc_mu;
                let direct =
                    &hx * split.project_complement(&transported) * &hx_inv
                        - split.project_complement(&a_mu);
                let gap = (change.eval_component(mu, &x) - direct).norm();
                if gap > worst {
                    worst = gap;
                    worst_point = x.clone();
                }
            }
        }
        Ok((worst, worst_point))
    })();
    match result {
        Ok((residual, point)) => Outcome::Residual {
            residual,
            point: Some(point),
        },
        Err(e) => Outcome::Error(e.to_string()),
    }
}

fn check_metric_compat(ctx: &Context) -> Outcome {
    let form = ctx.connection.clone().expect("connection checked upfront");
    let a = match LocalConnection::new(form, "s") {
        Ok(a) => a,
        Err(e) => return Outcome::Error(e.to_string()),
    };
    match metric_compatibility_residual(&a, &ctx.frame) {
        Ok(residual) => Outcome::Residual {
            residual,
            point: None,
        },
        Err(e) => Outcome::Error(e.to_string()),
    }
}

/// Pointwise preservation of the instanton bundle: `Φ_{h(x)}` must map
/// the metric structure algebra `𝔤 ⊂ so(D)` into itself.
fn check_phi(ctx: &Context, setup: &DeformationSetup) -> Outcome {
    let d = ctx.split.matrix_size();
    let result = (|| -> normdef_core::Result<(bool, f64)> {
        let so_d = catalog_algebra(&format!("so({d})"))?;
        let so_split = build_splitting(&so_d, &ctx.phi_algebra)?;
        normdef_core::instanton::instanton_bundle_preserved(setup, &ctx.phi_algebra, &so_split)
    })();
    match result {
        Ok((_, residual)) => Outcome::Residual {
            residual,
            point: None,
        },
        Err(e) => Outcome::Error(e.to_string()),
    }
}

/// Instanton condition for the field strength of the scenario
/// connection, measured in the frame supplied by the scenario.
fn check_instanton(ctx: &Context, setup: &DeformationSetup) -> Outcome {
    let form = ctx.connection.clone().expect("connection checked upfront");
    let d = ctx.split.matrix_size();
    let result = (|| -> normdef_core::Result<normdef_core::instanton::InstantonVerdict> {
        let f = field_strength(&form)?;
        let so_d = catalog_algebra(&format!("so({d})"))?;
        let so_split = build_splitting(&so_d, &ctx.phi_algebra)?;
        normdef_core::instanton::instanton_check(
            &f,
            &ctx.frame,
            &ctx.phi_algebra,
            &so_split,
            setup.splitting().sub(),
        )
    })();
    match result {
        Ok(verdict) => Outcome::Residual {
            residual: verdict.worst_residual,
            point: Some(verdict.worst_point),
        },
        Err(e) => Outcome::Error(e.to_string()),
    }
}
