//! The verification suite: every certified identity as a named
//! pass/fail record with its measured residual and tolerance.
//!
//! A report is self-contained: it echoes the resolved spec, the grid and
//! the tolerances, so re-running the echoed configuration reproduces the
//! residuals bit for bit on the same build.

use serde::Serialize;

use crate::classify::{classify_on_grid, ClassificationResult, Tolerances};
use crate::config::SpecConfig;
use crate::curve::CurveFamily;
use crate::error::{GeometryError, Result};
use crate::grid::{sample_grid, GridResult};
use crate::jet::finite_difference_jet;
use crate::patch::MeridianSpec;
use crate::surface::{
    gauss_curvature, gauss_curvature_closed, mean_curvature, mean_curvature_closed,
    meridian_curvature, normal_connection, second_form,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub pass: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckRecord {
    fn new(name: &str, residual: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckRecord { name: name.into(), pass: residual <= tolerance, residual, tolerance, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SummaryStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub spread: f64,
}

impl SummaryStats {
    fn of(grid: &GridResult, f: impl Fn(&crate::grid::SurfaceSample) -> f64) -> Self {
        let (min, max, mean) = grid.stats(&f);
        SummaryStats { min, max, mean, spread: max - min }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub timestamp_unix: u64,
    /// Resolved spec; feeding this back reproduces the run.
    pub spec: SpecConfig,
    pub grid: [usize; 2],
    pub valid_samples: usize,
    pub degenerate_samples: usize,
    pub checks: Vec<CheckRecord>,
    pub classification: ClassificationResult,
    pub k_stats: SummaryStats,
    pub h_norm2_stats: SummaryStats,
    pub all_passed: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Run the full certification suite on an admissible spec.
///
/// `expect` optionally names a classification flag (flat, constant_k,
/// parallel_h, pnmcv, cmc, minimal, quasi_minimal) that must come out
/// true for the report to pass.
pub fn run_verification(
    spec: &MeridianSpec,
    nu: usize,
    nv: usize,
    tols: &Tolerances,
    expect: Option<&str>,
) -> Result<VerificationReport> {
    let violations = spec.validate(21);
    if !violations.is_empty() {
        return Err(GeometryError::BadParam(format!(
            "spec is not admissible: {}",
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        )));
    }
    if let Some(name) = expect {
        if !crate::classify::is_flag_name(name) {
            return Err(GeometryError::BadParam(format!("unknown expect flag '{name}'")));
        }
    }

    let grid = sample_grid(spec, nu, nv);
    if grid.valid_fraction() < tols.min_valid_fraction {
        return Err(GeometryError::DegeneratePoint {
            u: f64::NAN,
            v: f64::NAN,
            what: format!(
                "only {:.0}% of grid samples are non-degenerate",
                100.0 * grid.valid_fraction()
            ),
        });
    }

    let mut checks = Vec::new();

    // frame orthonormality
    let frame_res = grid.max_abs(|s| s.point.frame.orthonormality_residual());
    checks.push(CheckRecord::new(
        "frame_orthonormality",
        frame_res,
        tols.frame,
        "max deviation of the ten frame inner products",
    ));

    // flat normal connection
    let d_res = grid.max_abs(|s| {
        let r = &s.point.report;
        [r.dx_n1, r.dx_n2, r.dy_n1, r.dy_n2]
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, c| m.max(c.abs()))
    });
    checks.push(CheckRecord::new(
        "flat_normal_connection",
        d_res,
        tols.vanishing,
        "max |D_X n_i|, |D_Y n_i| coefficient",
    ));

    // h(X,Y) = 0
    let h12_res = grid.max_abs(|s| s.point.forms.h12[0].abs().max(s.point.forms.h12[1].abs()));
    checks.push(CheckRecord::new(
        "mixed_second_form_vanishes",
        h12_res,
        tols.frame,
        "max |h(X,Y)| component",
    ));

    // Gauss curvature: generic contraction vs closed form
    let k_res = grid.max_abs(|s| s.point.report.k - gauss_curvature_closed(spec, s.u));
    checks.push(CheckRecord::new(
        "gauss_oracle",
        k_res,
        tols.vanishing,
        "generic Gauss-equation K vs eps f''/f",
    ));

    // mean curvature components vs closed form
    let h_res = grid.max_abs(|s| {
        let cf = mean_curvature_closed(spec, s.u, s.v);
        (s.point.report.h_components[0] - cf[0])
            .abs()
            .max((s.point.report.h_components[1] - cf[1]).abs())
    });
    checks.push(CheckRecord::new(
        "mean_curvature_oracle",
        h_res,
        tols.vanishing,
        "trace H components vs closed forms",
    ));

    // Weingarten: nabla_X n1 - (normal part) = sigma kappa_m X
    let mut wein_res: f64 = 0.0;
    for s in &grid.samples {
        if let Ok(nb) = normal_connection(spec, s.u, s.v) {
            let sigma = spec.profile.df(s.u).signum();
            let want = s.point.frame.x * (sigma * meridian_curvature(spec, s.u));
            wein_res = wein_res.max((nb.nabla_x_n1 - want).euclidean_norm());
            wein_res = wein_res.max(nb.nabla_x_n2.euclidean_norm());
        }
    }
    checks.push(CheckRecord::new(
        "weingarten_tangency",
        wein_res,
        tols.vanishing,
        "nabla_X n1 = sigma kappa_m X and nabla_X n2 = 0",
    ));

    // gauge 2 eps f' g' = 1
    let eps = spec.epsilon() as f64;
    let gauge_res = grid.max_abs(|s| 2.0 * eps * spec.profile.df(s.u) * spec.profile.dg(s.u) - 1.0);
    checks.push(CheckRecord::new("gauge", gauge_res, 1e-10, "max |2 eps f' g' - 1|"));

    // family defining ODE
    if spec.profile.family_ode_residual(spec.u_domain.0).is_some() {
        let ode_res = grid.max_abs(|s| spec.profile.family_ode_residual(s.u).unwrap_or(0.0));
        checks.push(CheckRecord::new(
            "family_ode",
            ode_res,
            tols.vanishing,
            "residual of the family's defining ODE",
        ));
    }

    // generating-curve curvature
    match spec.curve.family() {
        CurveFamily::KappaZero => {
            let res = grid.max_abs(|s| s.point.report.kappa);
            checks.push(CheckRecord::new("curve_kappa", res, 1e-10, "kappa = 0 family: max |kappa|"));
        }
        CurveFamily::ConstantKappa => {
            let kappa0 = spec
                .curve
                .params()
                .iter()
                .find(|(k, _)| k == "kappa0")
                .map(|&(_, v)| v)
                .unwrap_or(0.0);
            let res = grid.max_abs(|s| s.point.report.kappa - kappa0);
            checks.push(CheckRecord::new(
                "curve_kappa",
                res,
                1e-7,
                format!("constant-kappa family: max |kappa - {kappa0}|"),
            ));
        }
    }

    // jets vs central differences on an interior subgrid
    let fd_res = jet_fd_residual(spec, 5);
    checks.push(CheckRecord::new(
        "jet_vs_finite_difference",
        fd_res,
        1e-6,
        "z_u, z_v, z_uu, z_uv, z_vv, K, H: jets vs central differences",
    ));

    let classification = classify_on_grid(spec, nu, nv, tols)?;

    if let Some(name) = expect {
        let got = classification.flag(name).unwrap_or(false);
        checks.push(CheckRecord::new(
            &format!("expect_{name}"),
            if got { 0.0 } else { 1.0 },
            0.5,
            format!("classification flag '{name}' must hold"),
        ));
    }

    let all_passed = checks.iter().all(|c| c.pass);
    Ok(VerificationReport {
        tool: "meridian".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        spec: SpecConfig::resolved_default(spec),
        grid: [nu, nv],
        valid_samples: grid.samples.len(),
        degenerate_samples: grid.failures.len(),
        checks,
        classification,
        k_stats: SummaryStats::of(&grid, |s| s.point.report.k),
        h_norm2_stats: SummaryStats::of(&grid, |s| s.point.report.h_norm2),
        all_passed,
    })
}

/// Max deviation between the jet pipeline and the finite-difference
/// pipeline over an interior n x n subgrid: derivatives, K and H.
pub fn jet_fd_residual(spec: &MeridianSpec, n: usize) -> f64 {
    let h = crate::jet::FD_DEFAULT_STEP;
    let (u0, u1) = spec.u_domain;
    let (v0, v1) = spec.v_domain;
    let patch = |u: f64, v: f64| spec.position(u, v);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        // keep the 5-point stencils inside the domain
        let u = (u0 + h) + (u1 - u0 - 2.0 * h) * i as f64 / (n - 1) as f64;
        for k in 0..n {
            let v = (v0 + h) + (v1 - v0 - 2.0 * h) * k as f64 / (n - 1) as f64;
            let (Ok(j), Ok(fd)) = (spec.position_jet(u, v), finite_difference_jet(patch, u, v, h))
            else {
                continue;
            };
            for (a, b) in [
                (j.zu(), fd.zu()),
                (j.zv(), fd.zv()),
                (j.zuu(), fd.zuu()),
                (j.zuv(), fd.zuv()),
                (j.zvv(), fd.zvv()),
            ] {
                worst = worst.max((a - b).euclidean_norm());
            }
            // run K and H through the same frame with FD-jet second forms
            let (Ok(frame), Ok(frame_fd)) = (
                crate::surface::meridian_frame(spec, &j, u, v),
                crate::surface::meridian_frame(spec, &fd, u, v),
            ) else {
                continue;
            };
            let (Ok(ff), Ok(ff_fd)) = (second_form(&j, &frame), second_form(&fd, &frame_fd)) else {
                continue;
            };
            let k_jet = gauss_curvature(&ff, frame.epsilon);
            let k_fd = gauss_curvature(&ff_fd, frame_fd.epsilon);
            worst = worst.max((k_jet - k_fd).abs());
            let (h_jet, _, _) = mean_curvature(&ff, &frame);
            let (h_fd, _, _) = mean_curvature(&ff_fd, &frame_fd);
            worst = worst.max((h_jet - h_fd).euclidean_norm());
        }
    }
    worst
}

impl SpecConfig {
    /// Echo helper when no original config exists (library-built specs).
    pub fn resolved_default(spec: &MeridianSpec) -> SpecConfig {
        let placeholder = SpecConfig {
            family: String::new(),
            epsilon: spec.epsilon(),
            params: Default::default(),
            u_domain: None,
            v_domain: None,
            curve: crate::config::CurveConfig {
                family: String::new(),
                params: Default::default(),
                v_domain: None,
            },
        };
        placeholder.resolved(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::GeneratingCurve;
    use crate::profile::ProfileCurve;

    fn spec_parallel_h() -> MeridianSpec {
        MeridianSpec::new(
            ProfileCurve::parallel_h(1.0, 1.0, 1.0, -1, Some((0.0, 1.0))).unwrap(),
            GeneratingCurve::kappa_zero(1.0, 1.0, -1, Some((-0.7, 0.7))).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn suite_passes_on_parallel_h() {
        let spec = spec_parallel_h();
        let report =
            run_verification(&spec, 11, 11, &Tolerances::default(), Some("parallel_h")).unwrap();
        for c in &report.checks {
            assert!(c.pass, "check {} failed: residual {} > {}", c.name, c.residual, c.tolerance);
        }
        assert!(report.all_passed);
        assert!(report.classification.is_parallel_h);
        // <H,H> = -a^2/4 for eps = -1
        assert!((report.h_norm2_stats.mean + 0.25).abs() < 1e-9);
    }

    #[test]
    fn expect_mismatch_fails_but_reports() {
        let spec = spec_parallel_h();
        let report =
            run_verification(&spec, 9, 9, &Tolerances::default(), Some("constant_k")).unwrap();
        assert!(!report.all_passed);
        let exp = report.checks.iter().find(|c| c.name == "expect_constant_k").unwrap();
        assert!(!exp.pass);
    }

    #[test]
    fn unknown_expect_flag_is_input_error() {
        let spec = spec_parallel_h();
        assert!(matches!(
            run_verification(&spec, 9, 9, &Tolerances::default(), Some("bogus")),
            Err(GeometryError::BadParam(_))
        ));
    }

    #[test]
    fn report_json_is_reparsable() {
        let spec = spec_parallel_h();
        let report = run_verification(&spec, 9, 9, &Tolerances::default(), None).unwrap();
        let json = report.to_json();
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["spec"]["family"], "parallel_h");
        // echo rebuilds an equivalent spec
        let echo = SpecConfig::from_json(&value["spec"].to_string()).unwrap();
        let rebuilt = echo.build().unwrap();
        assert_eq!(rebuilt.u_domain, spec.u_domain);
    }
}
