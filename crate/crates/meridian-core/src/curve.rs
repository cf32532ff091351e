//! Generating curves c = l(v) on the lightlike-axis rotational
//! hypersurface, described by the scalar function phi(v) = w^1(v).
//!
//! The curvature of c is
//!
//! ```text
//! kappa(v) = (phi phidd - 2 phid^2 + phi^2) / (eps (phid^2 - phi^2))^{3/2}
//! ```
//!
//! where eps = sign(phid^2 - phi^2) must be constant on the domain.
//! Two families are provided:
//!
//! * kappa = 0: the numerator vanishes iff psi = 1/phi satisfies
//!   psi'' = psi, so phi = 1/(A e^v + B e^{-v}). Then
//!   phid^2 - phi^2 = -4AB/psi^4, hence eps = -sign(AB).
//! * kappa = const: integrated from
//!   phidd = (2 phid^2 - phi^2 + kappa0 (eps(phid^2 - phi^2))^{3/2})/phi.
//!
//! Constant-kappa integrations that would leave the admissible region
//! (phi > 0, eps(phid^2 - phi^2) > 0) are truncated; the achieved domain
//! is recorded on the curve.

use std::sync::Arc;

use crate::error::{GeometryError, Result};
use crate::jet::Jet2;
use crate::ode::{rk4_step, select_step};

/// Which curvature family a generating curve belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveFamily {
    KappaZero,
    ConstantKappa,
}

#[derive(Clone)]
enum CurveForm {
    /// phi = 1/(a e^v + b e^{-v})
    Reciprocal { a: f64, b: f64 },
    /// Node cache of [phi, phid] for the constant-kappa ODE.
    Ode(Arc<CurveTable>),
}

/// Generating curve: phi with derivatives to third order, its curvature
/// kappa, and the sign eps of phid^2 - phi^2 on the domain.
#[derive(Clone)]
pub struct GeneratingCurve {
    family: CurveFamily,
    epsilon: i32,
    domain: (f64, f64),
    params: Vec<(String, f64)>,
    form: CurveForm,
}

impl std::fmt::Debug for GeneratingCurve {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("GeneratingCurve")
            .field("family", &self.family)
            .field("epsilon", &self.epsilon)
            .field("domain", &self.domain)
            .field("params", &self.params)
            .finish()
    }
}

impl GeneratingCurve {
    pub fn family(&self) -> CurveFamily {
        self.family
    }

    pub fn epsilon(&self) -> i32 {
        self.epsilon
    }

    /// Achieved domain (may be shorter than requested for ODE curves).
    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn contains(&self, v: f64) -> bool {
        let slack = 1e-9 * (1.0 + self.domain.1.abs().max(self.domain.0.abs()));
        v >= self.domain.0 - slack && v <= self.domain.1 + slack
    }

    /// phi and its first three derivatives.
    pub fn phi(&self, v: f64) -> f64 {
        self.eval(v).0
    }

    pub fn dphi(&self, v: f64) -> f64 {
        self.eval(v).1
    }

    pub fn d2phi(&self, v: f64) -> f64 {
        self.eval(v).2
    }

    pub fn d3phi(&self, v: f64) -> f64 {
        self.eval(v).3
    }

    fn eval(&self, v: f64) -> (f64, f64, f64, f64) {
        match &self.form {
            CurveForm::Reciprocal { a, b } => {
                let psi = a * v.exp() + b * (-v).exp();
                let dpsi = a * v.exp() - b * (-v).exp();
                // psi'' = psi, psi''' = psi'
                let phi = 1.0 / psi;
                let dphi = -dpsi / (psi * psi);
                let d2phi = (2.0 * dpsi * dpsi - psi * psi) / (psi * psi * psi);
                let d3phi = (5.0 * psi * psi * dpsi - 6.0 * dpsi * dpsi * dpsi)
                    / (psi * psi * psi * psi);
                (phi, dphi, d2phi, d3phi)
            }
            CurveForm::Ode(table) => {
                let [phi, dphi] = table.state(v);
                let d2 = table.rhs_d2(phi, dphi);
                let d3 = table.rhs_d3(phi, dphi, d2);
                (phi, dphi, d2, d3)
            }
        }
    }

    /// eps * (phid^2 - phi^2), positive on the admissible domain.
    pub fn metric_factor(&self, v: f64) -> f64 {
        let (phi, dphi, _, _) = self.eval(v);
        self.epsilon as f64 * (dphi * dphi - phi * phi)
    }

    /// Curvature of the generating curve, computed from phi.
    pub fn kappa(&self, v: f64) -> f64 {
        let (phi, dphi, d2phi, _) = self.eval(v);
        let num = phi * d2phi - 2.0 * dphi * dphi + phi * phi;
        let d = self.epsilon as f64 * (dphi * dphi - phi * phi);
        num / d.powf(1.5)
    }

    /// d kappa / dv, computed from phi up to third order.
    pub fn dkappa(&self, v: f64) -> f64 {
        let (phi, dphi, d2phi, d3phi) = self.eval(v);
        let eps = self.epsilon as f64;
        let num = phi * d2phi - 2.0 * dphi * dphi + phi * phi;
        let dnum = phi * d3phi - 3.0 * dphi * d2phi + 2.0 * phi * dphi;
        let d = eps * (dphi * dphi - phi * phi);
        let dd = eps * 2.0 * (dphi * d2phi - phi * dphi);
        (dnum * d - 1.5 * num * dd) / d.powf(2.5)
    }

    /// v-jet of phi at v.
    pub fn phi_jet(&self, v: f64) -> Jet2 {
        let (phi, dphi, d2phi, _) = self.eval(v);
        Jet2::of_v_function(phi, dphi, d2phi)
    }

    /// v-jet of phi' at v (uses the third derivative).
    pub fn dphi_jet(&self, v: f64) -> Jet2 {
        let (_, dphi, d2phi, d3phi) = self.eval(v);
        Jet2::of_v_function(dphi, d2phi, d3phi)
    }

    /// kappa = 0 family, phi = 1/(a e^v + b e^{-v}).
    ///
    /// The sign of phid^2 - phi^2 is -sign(a b); it is measured at the
    /// domain midpoint and must agree with the requested epsilon.
    pub fn kappa_zero(a: f64, b: f64, epsilon: i32, domain: Option<(f64, f64)>) -> Result<Self> {
        check_epsilon(epsilon)?;
        if a * b == 0.0 {
            return Err(GeometryError::BadParam(format!(
                "kappa_zero requires a*b != 0 (a = {a}, b = {b} makes phid^2 - phi^2 vanish identically)"
            )));
        }
        let domain = domain.unwrap_or_else(|| {
            if a * b < 0.0 {
                // psi has a zero at v* = ln(-b/a)/2; sit to its right
                let root = 0.5 * (-b / a).ln();
                (root + 0.3, root + 1.3)
            } else {
                (-0.7, 0.7)
            }
        });
        check_interval(domain, "curve domain")?;
        if a * b < 0.0 {
            let root = 0.5 * (-b / a).ln();
            if root >= domain.0 - 1e-12 && root <= domain.1 + 1e-12 {
                return Err(GeometryError::BadParam(format!(
                    "a e^v + b e^-v vanishes at v = {root} inside the domain"
                )));
            }
        }
        let curve = GeneratingCurve {
            family: CurveFamily::KappaZero,
            epsilon,
            domain,
            params: vec![("a".into(), a), ("b".into(), b)],
            form: CurveForm::Reciprocal { a, b },
        };
        let mid = 0.5 * (domain.0 + domain.1);
        if curve.metric_factor(mid) <= 0.0 {
            return Err(GeometryError::SignMismatch(format!(
                "kappa_zero(a={a}, b={b}): sign(phid^2 - phi^2) = {} but epsilon = {epsilon}",
                -(a * b).signum()
            )));
        }
        Ok(curve)
    }

    /// Constant-curvature family, integrated from the seed
    /// (phi(v0), phid(v0)) = (phi0, dphi0) at the left end of the domain.
    ///
    /// When the trajectory approaches phi = 0 or phid^2 - phi^2 = 0 the
    /// domain is truncated at the last safe v and recorded.
    pub fn constant_kappa(
        kappa0: f64,
        phi0: f64,
        dphi0: f64,
        epsilon: i32,
        domain: Option<(f64, f64)>,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        let eps = epsilon as f64;
        if !phi0.is_finite() || phi0 <= 0.0 {
            return Err(GeometryError::BadParam(format!("phi0 = {phi0} must be positive")));
        }
        if eps * (dphi0 * dphi0 - phi0 * phi0) <= 0.0 {
            return Err(GeometryError::BadParam(format!(
                "seed (phi0, dphi0) = ({phi0}, {dphi0}) has eps(phid^2 - phi^2) <= 0 for epsilon = {epsilon}"
            )));
        }
        let requested = domain.unwrap_or((0.0, 1.0));
        check_interval(requested, "curve domain")?;
        let rhs = move |_v: f64, y: &[f64; 2]| {
            let (phi, dphi) = (y[0], y[1]);
            let d = eps * (dphi * dphi - phi * phi);
            [dphi, (2.0 * dphi * dphi - phi * phi + kappa0 * d.powf(1.5)) / phi]
        };
        let scale0 = (phi0 * phi0 + dphi0 * dphi0).max(1.0);
        let valid = move |v: f64, y: &[f64; 2]| {
            let (phi, dphi) = (y[0], y[1]);
            if phi < 1e-9 {
                return Some(format!("phi reached {phi} at v = {v}"));
            }
            if phi * phi + dphi * dphi > 1e12 * scale0 {
                return Some(format!("curve state blew up at v = {v}"));
            }
            let d = eps * (dphi * dphi - phi * phi);
            if d < 1e-9 * (phi * phi + dphi * dphi) {
                return Some(format!("phid^2 - phi^2 degenerated at v = {v}"));
            }
            None
        };
        // shrink the right end until the whole integration stays admissible
        let y0 = [phi0, dphi0];
        let mut end = requested.1;
        let mut step = None;
        for _ in 0..60 {
            match select_step(&rhs, requested.0, y0, end, 1e-12, &valid) {
                Ok(h) => {
                    step = Some(h);
                    break;
                }
                Err(GeometryError::StallError { at, .. }) => {
                    let reach = at - requested.0;
                    end = requested.0 + 0.8 * reach;
                    if reach < 1e-6 * (requested.1 - requested.0) {
                        return Err(GeometryError::StallError {
                            at,
                            what: "constant-kappa curve degenerates immediately at the seed".into(),
                        });
                    }
                }
                Err(e) => return Err(e),
            }
        }
        let step = step.ok_or(GeometryError::StallError {
            at: end,
            what: "could not find an admissible integration window".into(),
        })?;
        let achieved = (requested.0, end);
        let n = ((achieved.1 - achieved.0) / step).ceil() as usize;
        let h = (achieved.1 - achieved.0) / n as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(y0);
        let mut y = y0;
        for k in 0..n {
            let v = achieved.0 + h * k as f64;
            y = rk4_step(&rhs, v, y, h);
            if let Some(what) = valid(v + h, &y) {
                return Err(GeometryError::StallError { at: v + h, what });
            }
            nodes.push(y);
        }
        Ok(GeneratingCurve {
            family: CurveFamily::ConstantKappa,
            epsilon,
            domain: achieved,
            params: vec![
                ("kappa0".into(), kappa0),
                ("phi0".into(), phi0),
                ("dphi0".into(), dphi0),
            ],
            form: CurveForm::Ode(Arc::new(CurveTable {
                kappa0,
                eps,
                v0: achieved.0,
                step: h,
                nodes,
            })),
        })
    }
}

fn check_epsilon(epsilon: i32) -> Result<()> {
    if epsilon == 1 || epsilon == -1 {
        Ok(())
    } else {
        Err(GeometryError::BadParam(format!("epsilon must be +1 or -1, got {epsilon}")))
    }
}

fn check_interval(d: (f64, f64), what: &str) -> Result<()> {
    if d.0.is_finite() && d.1.is_finite() && d.0 < d.1 {
        Ok(())
    } else {
        Err(GeometryError::BadParam(format!("{what} [{}, {}] must be a finite nonempty interval", d.0, d.1)))
    }
}

struct CurveTable {
    kappa0: f64,
    eps: f64,
    v0: f64,
    step: f64,
    nodes: Vec<[f64; 2]>,
}

impl CurveTable {
    fn state(&self, v: f64) -> [f64; 2] {
        let idx = (((v - self.v0) / self.step).floor().max(0.0) as usize).min(self.nodes.len() - 1);
        let v_node = self.v0 + self.step * idx as f64;
        let r = v - v_node;
        if r == 0.0 {
            return self.nodes[idx];
        }
        let (kappa0, eps) = (self.kappa0, self.eps);
        let rhs = move |_v: f64, y: &[f64; 2]| {
            let (phi, dphi) = (y[0], y[1]);
            let d = eps * (dphi * dphi - phi * phi);
            [dphi, (2.0 * dphi * dphi - phi * phi + kappa0 * d.powf(1.5)) / phi]
        };
        let mut y = self.nodes[idx];
        let h = r / 2.0;
        let mut t = v_node;
        for _ in 0..2 {
            y = rk4_step(&rhs, t, y, h);
            t += h;
        }
        y
    }

    fn rhs_d2(&self, phi: f64, dphi: f64) -> f64 {
        let d = self.eps * (dphi * dphi - phi * phi);
        (2.0 * dphi * dphi - phi * phi + self.kappa0 * d.powf(1.5)) / phi
    }

    /// phi''' by differentiating the ODE right-hand side.
    fn rhs_d3(&self, phi: f64, dphi: f64, d2phi: f64) -> f64 {
        let eps = self.eps;
        let d = eps * (dphi * dphi - phi * phi);
        let num = 2.0 * dphi * dphi - phi * phi + self.kappa0 * d.powf(1.5);
        let dnum = 4.0 * dphi * d2phi - 2.0 * phi * dphi
            + 3.0 * self.kappa0 * eps * d.sqrt() * (dphi * d2phi - phi * dphi);
        (dnum * phi - num * dphi) / (phi * phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_zero_sech_curve() {
        // (a, b) = (1, 1): phi = 1/(2 cosh v), phid^2 - phi^2 < 0 -> eps = -1
        let c = GeneratingCurve::kappa_zero(1.0, 1.0, -1, Some((-0.7, 0.7))).unwrap();
        for i in 0..=20 {
            let v = -0.7 + 1.4 * i as f64 / 20.0;
            assert!((c.phi(v) - 0.5 / v.cosh()).abs() < 1e-14);
            assert!(c.kappa(v).abs() <= 1e-10, "kappa({v}) = {}", c.kappa(v));
            assert!(c.metric_factor(v) > 0.0);
        }
    }

    #[test]
    fn kappa_zero_epsilon_plus_one() {
        // (a, b) = (1, -1): phi = 1/(2 sinh v) on v > 0, phid^2 - phi^2 > 0
        let c = GeneratingCurve::kappa_zero(1.0, -1.0, 1, Some((0.4, 1.4))).unwrap();
        for i in 0..=20 {
            let v = 0.4 + i as f64 / 20.0;
            assert!((c.phi(v) - 0.5 / v.sinh()).abs() < 1e-14);
            assert!(c.kappa(v).abs() <= 1e-10);
        }
    }

    #[test]
    fn kappa_zero_rejects_degenerate_and_mismatched() {
        // b = 0 -> phi = e^{-v} is lightlike-degenerate
        assert!(matches!(
            GeneratingCurve::kappa_zero(1.0, 0.0, -1, None),
            Err(GeometryError::BadParam(_))
        ));
        // (1,1) has eps = -1; asking for +1 is a sign mismatch
        assert!(matches!(
            GeneratingCurve::kappa_zero(1.0, 1.0, 1, Some((-0.5, 0.5))),
            Err(GeometryError::SignMismatch(_))
        ));
        // root of psi inside the domain
        assert!(matches!(
            GeneratingCurve::kappa_zero(1.0, -1.0, 1, Some((-0.5, 0.5))),
            Err(GeometryError::BadParam(_))
        ));
    }

    #[test]
    fn kappa_zero_psi_substitution_residual() {
        // independent check of the family derivation: psi = 1/phi must
        // satisfy psi'' = psi, and the kappa numerator equals
        // (psi - psi'')/psi^3 = 0
        let c = GeneratingCurve::kappa_zero(0.7, 1.3, -1, Some((-0.6, 0.6))).unwrap();
        for i in 0..=10 {
            let v = -0.6 + 1.2 * i as f64 / 10.0;
            let h = 1e-5;
            let psi = |v: f64| 1.0 / c.phi(v);
            let psidd = (psi(v + h) - 2.0 * psi(v) + psi(v - h)) / (h * h);
            assert!((psidd - psi(v)).abs() < 1e-5);
        }
    }

    #[test]
    fn constant_kappa_constant_solution() {
        // seed (1/k0, 0) with eps = -1 gives phi identically constant and
        // kappa = k0 exactly
        let c = GeneratingCurve::constant_kappa(2.0, 0.5, 0.0, -1, Some((0.0, 1.0))).unwrap();
        assert_eq!(c.domain(), (0.0, 1.0));
        for i in 0..=10 {
            let v = i as f64 / 10.0;
            assert!((c.phi(v) - 0.5).abs() < 1e-13);
            assert!((c.kappa(v) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_kappa_holds_along_generic_trajectory() {
        let c = GeneratingCurve::constant_kappa(1.0, 1.0, 0.5, -1, Some((0.0, 1.0))).unwrap();
        let (v0, v1) = c.domain();
        for i in 0..=20 {
            let v = v0 + (v1 - v0) * i as f64 / 20.0;
            assert!((c.kappa(v) - 1.0).abs() <= 1e-7, "kappa({v}) = {}", c.kappa(v));
        }
    }

    #[test]
    fn constant_kappa_zero_matches_kappa_zero_family() {
        // kappa0 = 0 seeded to match phi = 1/(2 cosh v) at v = -0.5
        let refc = GeneratingCurve::kappa_zero(1.0, 1.0, -1, Some((-0.5, 0.5))).unwrap();
        let c = GeneratingCurve::constant_kappa(
            0.0,
            refc.phi(-0.5),
            refc.dphi(-0.5),
            -1,
            Some((-0.5, 0.5)),
        )
        .unwrap();
        for i in 0..=20 {
            let v = -0.5 + i as f64 / 20.0;
            if !c.contains(v) {
                continue;
            }
            assert!(
                (c.phi(v) - refc.phi(v)).abs() <= 1e-7,
                "phi({v}): {} vs {}",
                c.phi(v),
                refc.phi(v)
            );
        }
    }

    #[test]
    fn constant_kappa_truncates_on_degeneracy() {
        // explosive seed: kappa0 = 5 with eps = +1 blows up quickly; the
        // curve must come back with a shorter domain instead of failing
        let c = GeneratingCurve::constant_kappa(5.0, 1.0, 2.0, 1, Some((0.0, 1.0))).unwrap();
        let (v0, v1) = c.domain();
        assert_eq!(v0, 0.0);
        assert!(v1 < 1.0, "expected truncation, got {v1}");
        let mid = 0.5 * (v0 + v1);
        assert!((c.kappa(mid) - 5.0).abs() < 1e-6, "kappa = {}", c.kappa(mid));
    }

    #[test]
    fn constant_kappa_rejects_bad_seed() {
        assert!(GeneratingCurve::constant_kappa(1.0, -1.0, 0.0, -1, None).is_err());
        // eps = +1 needs |dphi0| > |phi0|
        assert!(GeneratingCurve::constant_kappa(1.0, 1.0, 0.5, 1, None).is_err());
    }

    #[test]
    fn dkappa_matches_finite_difference() {
        let c = GeneratingCurve::constant_kappa(1.5, 1.0, 0.4, -1, Some((0.0, 0.8))).unwrap();
        let (v0, v1) = c.domain();
        let h = 1e-5;
        for i in 1..10 {
            let v = v0 + (v1 - v0) * i as f64 / 10.0;
            if v - h < v0 || v + h > v1 {
                continue;
            }
            let fd = (c.kappa(v + h) - c.kappa(v - h)) / (2.0 * h);
            assert!((c.dkappa(v) - fd).abs() < 1e-6 * fd.abs().max(1.0));
        }
    }

    #[test]
    fn curve_jets_chain() {
        let c = GeneratingCurve::kappa_zero(1.0, 1.0, -1, Some((-0.7, 0.7))).unwrap();
        let v = 0.21;
        let pj = c.phi_jet(v);
        let dj = c.dphi_jet(v);
        assert_eq!(pj.dv, dj.val);
        assert_eq!(pj.dvv, dj.dv);
        // third derivative against finite differences of d2phi
        let h = 1e-5;
        let fd = (c.d2phi(v + h) - c.d2phi(v - h)) / (2.0 * h);
        assert!((dj.dvv - fd).abs() < 1e-6 * fd.abs().max(1.0));
    }

    #[test]
    fn reciprocal_third_derivative_formula() {
        let c = GeneratingCurve::kappa_zero(0.9, 1.2, -1, Some((-0.5, 0.5))).unwrap();
        let h = 1e-4;
        for i in 0..=8 {
            let v = -0.4 + 0.8 * i as f64 / 8.0;
            let fd = (c.d2phi(v + h) - c.d2phi(v - h)) / (2.0 * h);
            assert!((c.d3phi(v) - fd).abs() < 1e-6 * fd.abs().max(1.0));
        }
    }
}
