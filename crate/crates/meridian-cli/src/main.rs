//! meridian: build meridian surface patches, export sampled grids and run
//! the certification suite.
//!
//! Exit codes: 0 all requested checks pass, 1 a check failed, 2 input or
//! admissibility error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use meridian_core::classify::classify_on_grid;
use meridian_core::config::{CurveConfig, SpecConfig};
use meridian_core::{run_verification, sample_grid, GridResult, MeridianSpec, Tolerances};

#[derive(Parser)]
#[command(name = "meridian", version, about = "Lorentz meridian surfaces in the neutral 4-space: construction, invariants, classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a patch and export the grid (csv, obj or json)
    Generate(RunArgs),
    /// Run the certification suite and emit a verification report
    Verify(RunArgs),
    /// Classify the patch into the theorem families
    Classify(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON spec file; mutually exclusive with --family
    #[arg(long, value_name = "FILE", conflicts_with = "family")]
    spec: Option<PathBuf>,

    /// Inline profile family: flat | constant_k | parallel_h | pnmcv_i | pnmcv_ii | poly
    #[arg(long)]
    family: Option<String>,

    /// Inline profile parameters, e.g. a=1,b=1
    #[arg(long, value_name = "K=V,...", default_value = "", allow_hyphen_values = true)]
    params: String,

    /// Inline curve family: kappa_zero | constant_kappa
    #[arg(long, default_value = "kappa_zero")]
    curve: String,

    /// Inline curve parameters, e.g. a=1,b=1 or kappa0=1
    #[arg(long, value_name = "K=V,...", default_value = "", allow_hyphen_values = true)]
    curve_params: String,

    /// Causal sign of the construction (+1 or -1)
    #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
    epsilon: i32,

    /// Profile domain, e.g. 0,1
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
    u_domain: Option<String>,

    /// Curve domain, e.g. -0.7,0.7
    #[arg(long, value_name = "LO,HI", allow_hyphen_values = true)]
    v_domain: Option<String>,

    /// Grid resolution N or N,M (>= 3 per axis)
    #[arg(long, default_value = "21")]
    grid: String,

    /// Tolerance overrides, e.g. constancy=1e-7,vanishing=1e-8
    #[arg(long, value_name = "NAME=VAL,...", default_value = "")]
    tol: String,

    /// Output path (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Export format for generate
    #[arg(long, default_value = "csv")]
    format: String,

    /// Projection of the four ambient coordinates to 3-space for obj
    #[arg(long, default_value = "x1,x3,x4")]
    project: String,

    /// Classification flag that must hold (flat, constant_k, parallel_h,
    /// pnmcv, cmc, minimal, quasi_minimal)
    #[arg(long)]
    expect: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, mode) = match &cli.command {
        Command::Generate(a) => (a, Mode::Generate),
        Command::Verify(a) => (a, Mode::Verify),
        Command::Classify(a) => (a, Mode::Classify),
    };
    match run(args, mode) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Generate,
    Verify,
    Classify,
}

fn run(args: &RunArgs, mode: Mode) -> anyhow::Result<ExitCode> {
    let config = load_config(args)?;
    let (nu, nv) = parse_grid(&args.grid)?;
    let mut tols = Tolerances::default();
    for (name, value) in parse_kv(&args.tol)? {
        tols.set(&name, value).map_err(|e| anyhow::anyhow!("{e}"))?;
    }

    let spec = config.build().map_err(|e| anyhow::anyhow!("{e}"))?;
    let violations = spec.validate(21);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        anyhow::bail!("spec is not admissible ({} violations)", violations.len());
    }
    if !spec.phi_positive(21) {
        eprintln!("note: phi takes non-positive values on the domain; family derivations assume phi > 0");
    }

    match mode {
        Mode::Generate => {
            let grid = sample_grid(&spec, nu, nv);
            if !grid.failures.is_empty() {
                eprintln!("note: {} degenerate grid points skipped", grid.failures.len());
            }
            let body = match args.format.as_str() {
                "csv" => export_csv(&grid),
                "obj" => export_obj(&grid, &parse_projection(&args.project)?),
                "json" => export_json(&config, &spec, &grid),
                other => anyhow::bail!("unknown format '{other}' (expected csv | obj | json)"),
            };
            write_out(args.out.as_deref(), &body)?;
            Ok(ExitCode::SUCCESS)
        }
        Mode::Verify => {
            let report = run_verification(&spec, nu, nv, &tols, args.expect.as_deref())
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            write_out(args.out.as_deref(), &report.to_json())?;
            Ok(if report.all_passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Mode::Classify => {
            let result =
                classify_on_grid(&spec, nu, nv, &tols).map_err(|e| anyhow::anyhow!("{e}"))?;
            write_out(args.out.as_deref(), &serde_json::to_string_pretty(&result)?)?;
            match &args.expect {
                Some(flag) => match result.flag(flag) {
                    Some(true) => Ok(ExitCode::SUCCESS),
                    Some(false) => {
                        eprintln!("expectation '{flag}' not met (decided: {})", result.decided);
                        Ok(ExitCode::from(1))
                    }
                    None => anyhow::bail!("unknown --expect flag '{flag}'"),
                },
                None => Ok(ExitCode::SUCCESS),
            }
        }
    }
}

fn load_config(args: &RunArgs) -> anyhow::Result<SpecConfig> {
    if let Some(path) = &args.spec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        return SpecConfig::from_json(&text).map_err(|e| anyhow::anyhow!("{e}"));
    }
    let family = args
        .family
        .clone()
        .ok_or_else(|| anyhow::anyhow!("either --spec FILE or --family NAME is required"))?;
    Ok(SpecConfig {
        family,
        epsilon: args.epsilon,
        params: parse_kv(&args.params)?.into_iter().collect(),
        u_domain: parse_domain(args.u_domain.as_deref())?,
        v_domain: parse_domain(args.v_domain.as_deref())?,
        curve: CurveConfig {
            family: args.curve.clone(),
            params: parse_kv(&args.curve_params)?.into_iter().collect(),
            v_domain: None,
        },
    })
}

fn parse_kv(s: &str) -> anyhow::Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("expected key=value, got '{part}'"))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("'{v}' is not a number in '{part}'"))?;
        out.insert(k.trim().to_string(), value);
    }
    Ok(out)
}

fn parse_grid(s: &str) -> anyhow::Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').collect();
    let (nu, nv) = match parts.as_slice() {
        [n] => {
            let n: usize = n.trim().parse()?;
            (n, n)
        }
        [n, m] => (n.trim().parse()?, m.trim().parse()?),
        _ => anyhow::bail!("--grid expects N or N,M"),
    };
    if nu < 3 || nv < 3 {
        anyhow::bail!("grid resolution must be at least 3 per axis, got {nu},{nv}");
    }
    Ok((nu, nv))
}

fn parse_domain(s: Option<&str>) -> anyhow::Result<Option<[f64; 2]>> {
    let Some(s) = s else { return Ok(None) };
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| anyhow::anyhow!("domain expects LO,HI, got '{s}'"))?;
    Ok(Some([lo.trim().parse()?, hi.trim().parse()?]))
}

fn parse_projection(s: &str) -> anyhow::Result<[usize; 3]> {
    let idx = |name: &str| -> anyhow::Result<usize> {
        match name.trim() {
            "x1" => Ok(0),
            "x2" => Ok(1),
            "x3" => Ok(2),
            "x4" => Ok(3),
            other => anyhow::bail!("unknown coordinate '{other}' (expected x1..x4)"),
        }
    };
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        anyhow::bail!("--project expects three coordinates, e.g. x1,x3,x4");
    }
    Ok([idx(parts[0])?, idx(parts[1])?, idx(parts[2])?])
}

/// 17 significant digits, reproducible across runs.
fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn export_csv(grid: &GridResult) -> String {
    let mut out = String::from("u,v,x1,x2,x3,x4,K,H2\n");
    for s in &grid.samples {
        let p = s.point.position;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt(s.u),
            fmt(s.v),
            fmt(p.x1),
            fmt(p.x2),
            fmt(p.x3),
            fmt(p.x4),
            fmt(s.point.report.k),
            fmt(s.point.report.h_norm2)
        ));
    }
    out
}

fn export_obj(grid: &GridResult, proj: &[usize; 3]) -> String {
    let mut out = String::new();
    out.push_str("# meridian surface patch, linear projection of ambient coordinates\n");
    let coords = |p: meridian_core::Vec4| [p.x1, p.x2, p.x3, p.x4];
    for s in &grid.samples {
        let c = coords(s.point.position);
        out.push_str(&format!("v {} {} {}\n", fmt(c[proj[0]]), fmt(c[proj[1]]), fmt(c[proj[2]])));
    }
    // the exporter requires a full grid; degenerate holes break the stride
    if grid.failures.is_empty() {
        let (nu, nv) = (grid.nu, grid.nv);
        let at = |i: usize, k: usize| i * nv + k + 1; // obj indices are 1-based
        for i in 0..nu - 1 {
            for k in 0..nv - 1 {
                out.push_str(&format!("f {} {} {}\n", at(i, k), at(i + 1, k), at(i + 1, k + 1)));
                out.push_str(&format!("f {} {} {}\n", at(i, k), at(i + 1, k + 1), at(i, k + 1)));
            }
        }
    }
    out
}

fn export_json(config: &SpecConfig, spec: &MeridianSpec, grid: &GridResult) -> String {
    let points: Vec<serde_json::Value> = grid
        .samples
        .iter()
        .map(|s| {
            let p = s.point.position;
            serde_json::json!({
                "u": s.u,
                "v": s.v,
                "x": [p.x1, p.x2, p.x3, p.x4],
                "k": s.point.report.k,
                "h2": s.point.report.h_norm2,
            })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "spec": config.resolved(spec),
        "grid": [grid.nu, grid.nv],
        "degenerate_samples": grid.failures.len(),
        "points": points,
    }))
    .expect("grid json serializes")
}

fn write_out(path: Option<&std::path::Path>, body: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, body).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", p.display()))?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            if !body.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}
