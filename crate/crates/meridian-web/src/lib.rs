//! Browser bindings: three operations over JSON strings, thin enough that
//! the whole surface pipeline stays in meridian-core and is tested
//! natively. Build with `wasm-pack build --target web` and serve
//! `www/index.html` next to the generated package.

use meridian_core::classify::classify_on_grid;
use meridian_core::config::SpecConfig;
use meridian_core::{run_verification, sample_grid, Tolerances};
use wasm_bindgen::prelude::wasm_bindgen;

/// Sample a patch on an nu x nv grid: 4-space positions plus the K and
/// <H,H> fields, as JSON.
#[wasm_bindgen]
pub fn sample_surface(spec_json: &str, nu: usize, nv: usize) -> Result<String, String> {
    sample_surface_impl(spec_json, nu, nv)
}

/// Classify a patch into the theorem families, as JSON.
#[wasm_bindgen]
pub fn classify_surface(spec_json: &str) -> Result<String, String> {
    classify_surface_impl(spec_json)
}

/// Run the certification suite, as JSON.
#[wasm_bindgen]
pub fn verify_surface(spec_json: &str) -> Result<String, String> {
    verify_surface_impl(spec_json)
}

/// Canonical spec for a named family, for seeding the demo controls.
#[wasm_bindgen]
pub fn default_spec(family: &str) -> Result<String, String> {
    default_spec_impl(family)
}

fn build(spec_json: &str) -> Result<meridian_core::MeridianSpec, String> {
    let config = SpecConfig::from_json(spec_json).map_err(|e| e.to_string())?;
    let spec = config.build().map_err(|e| e.to_string())?;
    let violations = spec.validate(21);
    if !violations.is_empty() {
        return Err(format!(
            "spec not admissible: {}",
            violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        ));
    }
    Ok(spec)
}

fn sample_surface_impl(spec_json: &str, nu: usize, nv: usize) -> Result<String, String> {
    let nu = nu.clamp(3, 129);
    let nv = nv.clamp(3, 129);
    let spec = build(spec_json)?;
    let grid = sample_grid(&spec, nu, nv);
    if !grid.failures.is_empty() {
        return Err(format!("{} degenerate grid points", grid.failures.len()));
    }
    let mut points = Vec::with_capacity(grid.samples.len());
    let mut k = Vec::with_capacity(grid.samples.len());
    let mut h2 = Vec::with_capacity(grid.samples.len());
    for s in &grid.samples {
        let p = s.point.position;
        points.push([p.x1, p.x2, p.x3, p.x4]);
        k.push(s.point.report.k);
        h2.push(s.point.report.h_norm2);
    }
    let (kmin, kmax, _) = grid.stats(|s| s.point.report.k);
    let (hmin, hmax, _) = grid.stats(|s| s.point.report.h_norm2);
    serde_json::to_string(&serde_json::json!({
        "spec": SpecConfig::resolved_default(&spec),
        "nu": nu,
        "nv": nv,
        "points": points,
        "k": k,
        "h2": h2,
        "k_range": [kmin, kmax],
        "h2_range": [hmin, hmax],
    }))
    .map_err(|e| e.to_string())
}

fn classify_surface_impl(spec_json: &str) -> Result<String, String> {
    let spec = build(spec_json)?;
    let result = classify_on_grid(&spec, 21, 21, &Tolerances::default()).map_err(|e| e.to_string())?;
    serde_json::to_string(&result).map_err(|e| e.to_string())
}

fn verify_surface_impl(spec_json: &str) -> Result<String, String> {
    let spec = build(spec_json)?;
    let report =
        run_verification(&spec, 21, 21, &Tolerances::default(), None).map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

fn default_spec_impl(family: &str) -> Result<String, String> {
    let json = match family {
        "flat" => {
            r#"{"family":"flat","epsilon":-1,"params":{"a":1.0,"b":1.0},"u_domain":[0.0,1.0],
                "curve":{"family":"kappa_zero","params":{"a":1.0,"b":1.0},"v_domain":[-0.7,0.7]}}"#
        }
        "constant_k" => {
            r#"{"family":"constant_k","epsilon":1,"params":{"k0":1.0,"alpha":1.0,"beta":0.0},"u_domain":[0.3,0.9],
                "curve":{"family":"kappa_zero","params":{"a":0.5,"b":-0.5},"v_domain":[0.75,1.2]}}"#
        }
        "parallel_h" => {
            r#"{"family":"parallel_h","epsilon":-1,"params":{"a":1.0,"b":1.0,"f0":1.0},"u_domain":[0.0,1.0],
                "curve":{"family":"kappa_zero","params":{"a":1.0,"b":1.0},"v_domain":[-0.7,0.7]}}"#
        }
        "pnmcv_i" => {
            r#"{"family":"pnmcv_i","epsilon":-1,"params":{"a":1.0,"b":1.0},"u_domain":[0.0,1.0],
                "curve":{"family":"constant_kappa","params":{"kappa0":1.0,"phi0":1.0,"dphi0":0.0},"v_domain":[-0.5,0.5]}}"#
        }
        "pnmcv_ii" => {
            r#"{"family":"pnmcv_ii","epsilon":-1,"params":{"c":2.0,"b":1.0,"f0":1.0},"u_domain":[0.0,1.0],
                "curve":{"family":"constant_kappa","params":{"kappa0":1.0,"phi0":1.0,"dphi0":0.0},"v_domain":[-0.5,0.5]}}"#
        }
        "poly" => {
            r#"{"family":"poly","epsilon":-1,"params":{"c0":1.0,"c1":0.0,"c2":0.0,"c3":1.0},"u_domain":[0.5,1.5],
                "curve":{"family":"constant_kappa","params":{"kappa0":1.0,"phi0":1.0,"dphi0":0.0},"v_domain":[-0.5,0.5]}}"#
        }
        other => return Err(format!("unknown family '{other}'")),
    };
    // normalize through the config type so the page always sees one shape
    let cfg = SpecConfig::from_json(json).map_err(|e| e.to_string())?;
    Ok(cfg.to_json())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_returns_full_grid_with_fields() {
        let spec = default_spec_impl("parallel_h").unwrap();
        let out = sample_surface_impl(&spec, 9, 11).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["points"].as_array().unwrap().len(), 99);
        assert_eq!(v["k"].as_array().unwrap().len(), 99);
        assert_eq!(v["h2"].as_array().unwrap().len(), 99);
        let h2r = v["h2_range"].as_array().unwrap();
        // <H,H> = -a^2/4 = -0.25 throughout
        assert!((h2r[0].as_f64().unwrap() + 0.25).abs() < 1e-9);
        assert!((h2r[1].as_f64().unwrap() + 0.25).abs() < 1e-9);
    }

    #[test]
    fn classify_all_default_families() {
        for (family, decided) in [
            ("flat", "flat"),
            ("constant_k", "constant_k"),
            ("parallel_h", "parallel_h"),
            ("pnmcv_i", "pnmcv_only"),
            ("pnmcv_ii", "pnmcv_only"),
            ("poly", "unclassified"),
        ] {
            let spec = default_spec_impl(family).unwrap();
            let out = classify_surface_impl(&spec).unwrap();
            let v: serde_json::Value = serde_json::from_str(&out).unwrap();
            assert_eq!(v["decided"], decided, "family {family}");
        }
    }

    #[test]
    fn verify_default_family_passes() {
        let spec = default_spec_impl("pnmcv_ii").unwrap();
        let out = verify_surface_impl(&spec).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["all_passed"], true);
    }

    #[test]
    fn bad_input_is_an_error_string() {
        assert!(sample_surface_impl("{", 9, 9).is_err());
        assert!(default_spec_impl("torus").is_err());
        let mismatched = r#"{"family":"flat","epsilon":1,"params":{"a":1.0,"b":1.0},
            "curve":{"family":"kappa_zero","params":{"a":1.0,"b":1.0}}}"#;
        assert!(classify_surface_impl(mismatched).is_err());
    }
}
