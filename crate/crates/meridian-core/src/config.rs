//! JSON spec files: the exchange format between the CLI, the browser demo
//! and the library.
//!
//! ```json
//! {
//!   "family": "parallel_h",
//!   "epsilon": -1,
//!   "params": { "a": 1.0, "b": 1.0, "f0": 1.0 },
//!   "u_domain": [0.0, 1.0],
//!   "v_domain": [-0.7, 0.7],
//!   "curve": { "family": "kappa_zero", "params": { "a": 1.0, "b": 1.0 } }
//! }
//! ```
//!
//! Omitted domains fall back to the family defaults; the resolved echo in
//! a verification report always carries the concrete domains so a run can
//! be reproduced bit for bit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curve::{CurveFamily, GeneratingCurve};
use crate::error::{GeometryError, Result};
use crate::patch::MeridianSpec;
use crate::profile::{ProfileCurve, ProfileFamily};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CurveConfig {
    pub family: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_domain: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SpecConfig {
    pub family: String,
    pub epsilon: i32,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_domain: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_domain: Option<[f64; 2]>,
    pub curve: CurveConfig,
}

fn get(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn require(params: &BTreeMap<String, f64>, key: &str, family: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| GeometryError::BadParam(format!("family '{family}' requires parameter '{key}'")))
}

impl SpecConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s)
            .map_err(|e| GeometryError::BadParam(format!("spec JSON parse error: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec config serializes")
    }

    /// Build the runtime spec: construct the curve first (its domain may
    /// be truncated), then the profile, then pair them.
    pub fn build(&self) -> Result<MeridianSpec> {
        let vdom = self.curve.v_domain.or(self.v_domain).map(|d| (d[0], d[1]));
        let cp = &self.curve.params;
        let curve = match self.curve.family.as_str() {
            "kappa_zero" => GeneratingCurve::kappa_zero(
                get(cp, "a", 1.0),
                get(cp, "b", 1.0),
                self.epsilon,
                vdom,
            )?,
            "constant_kappa" => {
                let kappa0 = require(cp, "kappa0", "constant_kappa")?;
                let phi0 = get(cp, "phi0", if kappa0 != 0.0 { 1.0 / kappa0.abs() } else { 0.5 });
                let dphi0 = get(cp, "dphi0", 0.0);
                GeneratingCurve::constant_kappa(kappa0, phi0, dphi0, self.epsilon, vdom)?
            }
            other => {
                return Err(GeometryError::BadParam(format!(
                    "unknown curve family '{other}' (expected kappa_zero | constant_kappa)"
                )));
            }
        };

        let udom = self.u_domain.map(|d| (d[0], d[1]));
        let p = &self.params;
        let profile = match self.family.as_str() {
            "flat" => ProfileCurve::flat(
                require(p, "a", "flat")?,
                get(p, "b", 0.0),
                get(p, "c", 0.0),
                self.epsilon,
                udom,
            )?,
            "constant_k" => ProfileCurve::constant_k(
                require(p, "k0", "constant_k")?,
                get(p, "alpha", 1.0),
                get(p, "beta", 0.0),
                self.epsilon,
                udom,
            )?,
            "parallel_h" => ProfileCurve::parallel_h(
                require(p, "a", "parallel_h")?,
                get(p, "b", 0.0),
                get(p, "f0", 1.0),
                self.epsilon,
                udom,
            )?,
            "pnmcv_i" => ProfileCurve::pnmcv_i(
                require(p, "a", "pnmcv_i")?,
                get(p, "b", 0.0),
                get(p, "c", 0.0),
                self.epsilon,
                udom,
            )?,
            "pnmcv_ii" => {
                // the c^2 != kappa0^2 admissibility check uses the paired
                // curve's constant curvature
                let kappa0 = get(cp, "kappa0", 0.0);
                ProfileCurve::pnmcv_ii(
                    require(p, "c", "pnmcv_ii")?,
                    get(p, "b", 0.0),
                    kappa0,
                    get(p, "f0", 1.0),
                    self.epsilon,
                    udom,
                )?
            }
            "poly" => {
                let mut coeffs = Vec::new();
                for i in 0.. {
                    match p.get(&format!("c{i}")) {
                        Some(&c) => coeffs.push(c),
                        None => break,
                    }
                }
                if coeffs.is_empty() {
                    return Err(GeometryError::BadParam(
                        "poly family requires coefficients c0, c1, ...".into(),
                    ));
                }
                let dom = udom.ok_or_else(|| {
                    GeometryError::BadParam("poly family requires an explicit u_domain".into())
                })?;
                ProfileCurve::poly(&coeffs, self.epsilon, dom)?
            }
            other => {
                return Err(GeometryError::BadParam(format!(
                    "unknown profile family '{other}' (expected flat | constant_k | parallel_h | pnmcv_i | pnmcv_ii | poly)"
                )));
            }
        };

        MeridianSpec::new(profile, curve)
    }

    /// The resolved config for report echoes: concrete parameters and the
    /// domains the spec actually runs with.
    pub fn resolved(&self, spec: &MeridianSpec) -> SpecConfig {
        SpecConfig {
            family: family_name(spec.profile.family()).into(),
            epsilon: spec.epsilon(),
            params: spec.profile.params().iter().cloned().collect(),
            u_domain: Some([spec.u_domain.0, spec.u_domain.1]),
            v_domain: Some([spec.v_domain.0, spec.v_domain.1]),
            curve: CurveConfig {
                family: curve_family_name(spec.curve.family()).into(),
                params: spec.curve.params().iter().cloned().collect(),
                v_domain: Some([spec.curve.domain().0, spec.curve.domain().1]),
            },
        }
    }
}

pub fn family_name(f: ProfileFamily) -> &'static str {
    match f {
        ProfileFamily::Flat => "flat",
        ProfileFamily::ConstantK => "constant_k",
        ProfileFamily::ParallelH => "parallel_h",
        ProfileFamily::PnmcvI => "pnmcv_i",
        ProfileFamily::PnmcvII => "pnmcv_ii",
        ProfileFamily::Custom => "poly",
    }
}

pub fn curve_family_name(f: CurveFamily) -> &'static str {
    match f {
        CurveFamily::KappaZero => "kappa_zero",
        CurveFamily::ConstantKappa => "constant_kappa",
    }
}
