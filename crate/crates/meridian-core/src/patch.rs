//! The assembled meridian surface patch
//!
//! ```text
//! z(u,v) = f(u) ( phi(v) cosh v e1 + phi(v) sinh v e3
//!                 + (phi^2(v)/2) xi1 + xi2 ) + g(u) xi1
//! ```
//!
//! together with the admissibility validation of the standing assumptions:
//! f > 0, the gauge 2 eps f' g' = 1, matching causal signs on both factors
//! and non-degeneracy of the frame denominators.

use serde::Serialize;

use crate::curve::GeneratingCurve;
use crate::error::{GeometryError, Result};
use crate::jet::{Jet2, PositionJet};
use crate::neutral::Vec4;
use crate::profile::ProfileCurve;

/// Relative non-degeneracy floor for |phid^2 - phi^2| and |f' g'|.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// A meridian surface patch: profile (f, g), generating curve phi and the
/// parameter rectangle.
#[derive(Debug, Clone)]
pub struct MeridianSpec {
    pub profile: ProfileCurve,
    pub curve: GeneratingCurve,
    pub u_domain: (f64, f64),
    pub v_domain: (f64, f64),
}

/// One admissibility failure found by [`MeridianSpec::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// f(u) <= 0 somewhere on the grid.
    PositivityViolation { u: f64, f: f64 },
    /// |2 eps f' g' - 1| beyond tolerance.
    GaugeViolation { u: f64, residual: f64 },
    /// sign(f' g') or sign(phid^2 - phi^2) disagrees with epsilon, or the
    /// profile and curve carry different epsilons.
    SignMismatch { detail: String },
    /// A frame denominator vanishes within tolerance.
    Degenerate { u: f64, v: f64, what: String },
    /// f' vanishes or changes sign inside the domain.
    SingularProfile { u: f64 },
    /// The declared domain exceeds what the parts support.
    DomainExceeded { detail: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::PositivityViolation { u, f } => write!(fm, "f({u}) = {f} <= 0"),
            Violation::GaugeViolation { u, residual } => {
                write!(fm, "gauge residual |2 eps f'g' - 1| = {residual:.3e} at u = {u}")
            }
            Violation::SignMismatch { detail } => write!(fm, "sign mismatch: {detail}"),
            Violation::Degenerate { u, v, what } => {
                write!(fm, "degenerate at (u,v) = ({u},{v}): {what}")
            }
            Violation::SingularProfile { u } => write!(fm, "f' vanishes near u = {u}"),
            Violation::DomainExceeded { detail } => write!(fm, "domain exceeded: {detail}"),
        }
    }
}

impl MeridianSpec {
    /// Pair a profile with a generating curve, taking the parts' own
    /// domains. Fails if the two declare different epsilons.
    pub fn new(profile: ProfileCurve, curve: GeneratingCurve) -> Result<Self> {
        if profile.epsilon() != curve.epsilon() {
            return Err(GeometryError::SignMismatch(format!(
                "profile epsilon {} != curve epsilon {}",
                profile.epsilon(),
                curve.epsilon()
            )));
        }
        let u_domain = profile.domain();
        let v_domain = curve.domain();
        Ok(MeridianSpec { profile, curve, u_domain, v_domain })
    }

    /// Same, with explicit sub-domains.
    pub fn with_domains(
        profile: ProfileCurve,
        curve: GeneratingCurve,
        u_domain: (f64, f64),
        v_domain: (f64, f64),
    ) -> Result<Self> {
        let mut spec = Self::new(profile, curve)?;
        if u_domain.0 < spec.profile.domain().0 - 1e-12
            || u_domain.1 > spec.profile.domain().1 + 1e-12
        {
            return Err(GeometryError::DomainError(format!(
                "u domain [{}, {}] exceeds the profile domain [{}, {}]",
                u_domain.0,
                u_domain.1,
                spec.profile.domain().0,
                spec.profile.domain().1
            )));
        }
        if v_domain.0 < spec.curve.domain().0 - 1e-12 || v_domain.1 > spec.curve.domain().1 + 1e-12
        {
            return Err(GeometryError::DomainError(format!(
                "v domain [{}, {}] exceeds the curve domain [{}, {}]",
                v_domain.0,
                v_domain.1,
                spec.curve.domain().0,
                spec.curve.domain().1
            )));
        }
        spec.u_domain = u_domain;
        spec.v_domain = v_domain;
        Ok(spec)
    }

    pub fn epsilon(&self) -> i32 {
        self.profile.epsilon()
    }

    fn check_domain(&self, u: f64, v: f64) -> Result<()> {
        let su = 1e-9 * (1.0 + self.u_domain.0.abs().max(self.u_domain.1.abs()));
        let sv = 1e-9 * (1.0 + self.v_domain.0.abs().max(self.v_domain.1.abs()));
        if u < self.u_domain.0 - su || u > self.u_domain.1 + su {
            return Err(GeometryError::DomainError(format!(
                "u = {u} outside [{}, {}]",
                self.u_domain.0, self.u_domain.1
            )));
        }
        if v < self.v_domain.0 - sv || v > self.v_domain.1 + sv {
            return Err(GeometryError::DomainError(format!(
                "v = {v} outside [{}, {}]",
                self.v_domain.0, self.v_domain.1
            )));
        }
        Ok(())
    }

    /// Plain point evaluation of the parametrization.
    pub fn position(&self, u: f64, v: f64) -> Result<Vec4> {
        self.check_domain(u, v)?;
        let f = self.profile.f(u);
        let g = self.profile.g(u);
        let phi = self.curve.phi(v);
        let a1 = f * phi * v.cosh();
        let a3 = f * phi * v.sinh();
        let b1 = f * phi * phi * 0.5 + g;
        let b2 = f;
        Ok(Vec4::from_pseudo_coords(a1, a3, b1, b2))
    }

    /// Full 2-jet of the parametrization at (u, v).
    ///
    /// The f- and g-jets are lifted from the profile's stored derivatives;
    /// everything else flows through the jet arithmetic, so the slots are
    /// the analytic partials z_u, z_v, z_uu, z_uv, z_vv.
    pub fn position_jet(&self, u: f64, v: f64) -> Result<PositionJet> {
        self.check_domain(u, v)?;
        let fj = self.profile.f_jet(u);
        let gj = self.profile.g_jet(u);
        let pj = self.curve.phi_jet(v);
        let vj = Jet2::seed_v(v);
        let (ch, sh) = (vj.cosh(), vj.sinh());
        let a1 = fj * pj * ch;
        let a3 = fj * pj * sh;
        let b1 = fj * pj * pj * 0.5 + gj;
        let b2 = fj;
        Ok(PositionJet::from_pseudo(a1, a3, b1, b2))
    }

    /// Check the standing assumptions on an `n` x `n` sample grid.
    /// An empty list means the spec is admissible.
    pub fn validate(&self, n: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        let eps = self.profile.epsilon();
        if eps != self.curve.epsilon() {
            out.push(Violation::SignMismatch {
                detail: format!(
                    "profile epsilon {eps} != curve epsilon {}",
                    self.curve.epsilon()
                ),
            });
            return out;
        }
        if !self.profile.contains(self.u_domain.0) || !self.profile.contains(self.u_domain.1) {
            out.push(Violation::DomainExceeded {
                detail: format!(
                    "u domain [{}, {}] vs profile [{}, {}]",
                    self.u_domain.0,
                    self.u_domain.1,
                    self.profile.domain().0,
                    self.profile.domain().1
                ),
            });
            return out;
        }
        if !self.curve.contains(self.v_domain.0) || !self.curve.contains(self.v_domain.1) {
            out.push(Violation::DomainExceeded {
                detail: format!(
                    "v domain [{}, {}] vs curve [{}, {}]",
                    self.v_domain.0,
                    self.v_domain.1,
                    self.curve.domain().0,
                    self.curve.domain().1
                ),
            });
            return out;
        }
        let n = n.max(3);
        let us: Vec<f64> = (0..n)
            .map(|i| self.u_domain.0 + (self.u_domain.1 - self.u_domain.0) * i as f64 / (n - 1) as f64)
            .collect();
        let vs: Vec<f64> = (0..n)
            .map(|i| self.v_domain.0 + (self.v_domain.1 - self.v_domain.0) * i as f64 / (n - 1) as f64)
            .collect();

        let mut slope_sign = 0.0;
        let mut max_fpgp: f64 = 0.0;
        let profile_samples: Vec<(f64, f64, f64, f64)> = us
            .iter()
            .map(|&u| {
                let (f, fp, gp) = (self.profile.f(u), self.profile.df(u), self.profile.dg(u));
                max_fpgp = max_fpgp.max((fp * gp).abs());
                (u, f, fp, gp)
            })
            .collect();
        for &(u, f, fp, gp) in &profile_samples {
            if !f.is_finite() || f <= 0.0 {
                out.push(Violation::PositivityViolation { u, f });
                continue;
            }
            let gauge = 2.0 * eps as f64 * fp * gp - 1.0;
            if gauge.abs() > 1e-10 {
                out.push(Violation::GaugeViolation { u, residual: gauge.abs() });
            }
            if (fp * gp).signum() != eps as f64 {
                out.push(Violation::SignMismatch {
                    detail: format!("sign(f'g') = {} != epsilon = {eps} at u = {u}", (fp * gp).signum()),
                });
            }
            if (fp * gp).abs() < DEGENERACY_TOL * max_fpgp.max(1e-300) {
                out.push(Violation::Degenerate { u, v: f64::NAN, what: "f' g' ~ 0".into() });
            }
            if slope_sign == 0.0 {
                slope_sign = fp.signum();
            } else if fp.signum() != slope_sign || fp == 0.0 {
                out.push(Violation::SingularProfile { u });
            }
        }

        let mut max_metric: f64 = 0.0;
        let curve_samples: Vec<(f64, f64)> = vs
            .iter()
            .map(|&v| {
                let m = self.curve.metric_factor(v); // eps (phid^2 - phi^2)
                max_metric = max_metric.max(m.abs());
                (v, m)
            })
            .collect();
        for &(v, m) in &curve_samples {
            if m < 0.0 {
                out.push(Violation::SignMismatch {
                    detail: format!(
                        "sign(phid^2 - phi^2) != epsilon = {eps} at v = {v}"
                    ),
                });
            } else if m.abs() < DEGENERACY_TOL * max_metric.max(1e-300) {
                out.push(Violation::Degenerate { u: f64::NAN, v, what: "phid^2 - phi^2 ~ 0".into() });
            }
        }
        out
    }

    /// True when phi > 0 everywhere on the sampled v-domain. Profiles with
    /// phi <= 0 are evaluable but outside what the family derivations
    /// validated; callers may want to surface a note.
    pub fn phi_positive(&self, n: usize) -> bool {
        let n = n.max(3);
        (0..n).all(|i| {
            let v = self.v_domain.0 + (self.v_domain.1 - self.v_domain.0) * i as f64 / (n - 1) as f64;
            self.curve.phi(v) > 0.0
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::GeneratingCurve;
    use crate::jet::finite_difference_jet;
    use crate::profile::ProfileCurve;

    fn flat_spec() -> MeridianSpec {
        let p = ProfileCurve::flat(1.0, 1.0, 0.0, -1, Some((0.0, 1.0))).unwrap();
        let c = GeneratingCurve::kappa_zero(1.0, 1.0, -1, Some((-0.7, 0.7))).unwrap();
        MeridianSpec::new(p, c).unwrap()
    }

    #[test]
    fn fixed_u_traces_scaled_curve() {
        // with f constant in u (locally: evaluate two v's at same u), the
        // point is f * l(v) + g xi1
        let spec = flat_spec();
        let (u, v) = (0.5, 0.3);
        let z = spec.position(u, v).unwrap();
        let f = spec.profile.f(u);
        let g = spec.profile.g(u);
        let phi = spec.curve.phi(v);
        let l = Vec4::E1 * (phi * v.cosh())
            + Vec4::E3 * (phi * v.sinh())
            + Vec4::XI1 * (phi * phi * 0.5)
            + Vec4::XI2;
        let want = l * f + Vec4::XI1 * g;
        assert!((z - want).euclidean_norm() < 1e-14);
    }

    #[test]
    fn tangent_pseudo_components() {
        // z_u's xi2-component is f'(u); z_v has no xi2 component
        let spec = flat_spec();
        let j = spec.position_jet(0.4, 0.2).unwrap();
        let (_, _, _, b2_u) = j.zu().pseudo_coords();
        let (_, _, _, b2_v) = j.zv().pseudo_coords();
        assert!((b2_u - spec.profile.df(0.4)).abs() < 1e-13);
        assert!(b2_v.abs() < 1e-13);
    }

    #[test]
    fn jet_matches_finite_differences() {
        let spec = flat_spec();
        let patch = |u: f64, v: f64| spec.position(u, v);
        for (u, v) in [(0.3, 0.1), (0.7, -0.4), (0.5, 0.55)] {
            let j = spec.position_jet(u, v).unwrap();
            let fd = finite_difference_jet(patch, u, v, 1e-4).unwrap();
            for (a, b) in [
                (j.zu(), fd.zu()),
                (j.zv(), fd.zv()),
                (j.zuu(), fd.zuu()),
                (j.zuv(), fd.zuv()),
                (j.zvv(), fd.zvv()),
            ] {
                assert!((a - b).euclidean_norm() <= 1e-6, "{a:?} vs {b:?} at ({u},{v})");
            }
        }
    }

    #[test]
    fn outside_domain_is_an_error() {
        let spec = flat_spec();
        assert!(matches!(spec.position(2.0, 0.0), Err(GeometryError::DomainError(_))));
        assert!(matches!(spec.position_jet(0.5, 5.0), Err(GeometryError::DomainError(_))));
    }

    #[test]
    fn canonical_spec_is_admissible() {
        let spec = flat_spec();
        assert!(spec.validate(21).is_empty());
        assert!(spec.phi_positive(21));
    }

    #[test]
    fn epsilon_mismatch_is_rejected() {
        let p = ProfileCurve::flat(1.0, 1.0, 0.0, 1, Some((0.0, 1.0))).unwrap();
        let c = GeneratingCurve::kappa_zero(1.0, 1.0, -1, Some((-0.7, 0.7))).unwrap();
        assert!(matches!(
            MeridianSpec::new(p, c),
            Err(GeometryError::SignMismatch(_))
        ));
    }

    #[test]
    fn oversized_domain_is_rejected() {
        let p = ProfileCurve::flat(1.0, 1.0, 0.0, -1, Some((0.0, 1.0))).unwrap();
        let c = GeneratingCurve::kappa_zero(1.0, 1.0, -1, Some((-0.7, 0.7))).unwrap();
        assert!(MeridianSpec::with_domains(p, c, (0.0, 2.0), (-0.5, 0.5)).is_err());
    }
}
