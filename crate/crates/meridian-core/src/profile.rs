//! Profile curves (f, g) of the meridian construction.
//!
//! A profile is the meridian curve data: f with derivatives up to third
//! order and g fixed by the gauge 2*eps*f'*g' = 1, i.e. g' = eps/(2 f').
//! Each classification theorem corresponds to one family:
//!
//! * flat:        f = a u + b                    (zero Gauss curvature)
//! * constant K:  f'' - eps K f = 0              (cosh/sinh or cos/sin branch)
//! * parallel H:  f f'' + f'^2 = a f f'          (integrated as f' = (a f^2 + b)/(2 f))
//! * pnmcv (i):   f f'' + f'^2 = 0               (f = sqrt(a u + b))
//! * pnmcv (ii):  f f'' + f'^2 = c f'            (integrated as f' = (c f + b)/f)
//!
//! The ODE families are integrated once at construction with RK4 at a
//! Richardson-selected step and cached on a uniform node table; point
//! evaluations re-integrate the short remainder from the nearest node, so
//! every evaluation is deterministic. g is co-integrated for ODE families
//! and obtained by adaptive Simpson quadrature of eps/(2 f') otherwise.
//!
//! f must keep a constant-sign, non-vanishing derivative on the declared
//! domain. The ODE families require a rising seed (f' > 0, reparametrize
//! u -> -u otherwise) and default domains prefer rising branches; the
//! closed-form families also admit a uniformly falling f, which the
//! analysis handles through sign(f').

use std::sync::Arc;

use crate::error::{GeometryError, Result};
use crate::jet::Jet2;
use crate::ode::{adaptive_simpson, rk4_step, select_step};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Which theorem family a profile was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileFamily {
    Flat,
    ConstantK,
    ParallelH,
    PnmcvI,
    PnmcvII,
    Custom,
}

/// Meridian profile: f and its derivatives, g fixed by the gauge.
#[derive(Clone)]
pub struct ProfileCurve {
    family: ProfileFamily,
    epsilon: i32,
    domain: (f64, f64),
    params: Vec<(String, f64)>,
    f: ScalarFn,
    df: ScalarFn,
    d2f: ScalarFn,
    d3f: ScalarFn,
    g: ScalarFn,
    /// Residual of the family's defining ODE at u; None for Custom.
    ode_residual: Option<ScalarFn>,
}

impl std::fmt::Debug for ProfileCurve {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("ProfileCurve")
            .field("family", &self.family)
            .field("epsilon", &self.epsilon)
            .field("domain", &self.domain)
            .field("params", &self.params)
            .finish()
    }
}

/// Relative threshold below which f' counts as vanished.
const SLOPE_TOL: f64 = 1e-10;

impl ProfileCurve {
    pub fn family(&self) -> ProfileFamily {
        self.family
    }

    pub fn epsilon(&self) -> i32 {
        self.epsilon
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn f(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    pub fn df(&self, u: f64) -> f64 {
        (self.df)(u)
    }

    pub fn d2f(&self, u: f64) -> f64 {
        (self.d2f)(u)
    }

    pub fn d3f(&self, u: f64) -> f64 {
        (self.d3f)(u)
    }

    pub fn g(&self, u: f64) -> f64 {
        (self.g)(u)
    }

    /// g' = eps/(2 f'), the gauge relation.
    pub fn dg(&self, u: f64) -> f64 {
        self.epsilon as f64 / (2.0 * self.df(u))
    }

    /// g'' = -eps f''/(2 f'^2), differentiated gauge.
    pub fn d2g(&self, u: f64) -> f64 {
        let fp = self.df(u);
        -self.epsilon as f64 * self.d2f(u) / (2.0 * fp * fp)
    }

    /// g''' = -eps (f''' f' - 2 f''^2)/(2 f'^3).
    pub fn d3g(&self, u: f64) -> f64 {
        let fp = self.df(u);
        let f2 = self.d2f(u);
        let f3 = self.d3f(u);
        -self.epsilon as f64 * (f3 * fp - 2.0 * f2 * f2) / (2.0 * fp * fp * fp)
    }

    /// Sign of f' on the domain (constant by construction).
    pub fn slope_sign(&self) -> f64 {
        self.df(0.5 * (self.domain.0 + self.domain.1)).signum()
    }

    /// u-jet of f at u.
    pub fn f_jet(&self, u: f64) -> Jet2 {
        Jet2::of_u_function(self.f(u), self.df(u), self.d2f(u))
    }

    /// u-jet of f' at u (uses the third derivative).
    pub fn df_jet(&self, u: f64) -> Jet2 {
        Jet2::of_u_function(self.df(u), self.d2f(u), self.d3f(u))
    }

    /// u-jet of g at u.
    pub fn g_jet(&self, u: f64) -> Jet2 {
        Jet2::of_u_function(self.g(u), self.dg(u), self.d2g(u))
    }

    /// u-jet of g' at u.
    pub fn dg_jet(&self, u: f64) -> Jet2 {
        Jet2::of_u_function(self.dg(u), self.d2g(u), self.d3g(u))
    }

    pub fn contains(&self, u: f64) -> bool {
        let slack = 1e-9 * (1.0 + self.domain.1.abs().max(self.domain.0.abs()));
        u >= self.domain.0 - slack && u <= self.domain.1 + slack
    }

    /// Residual of the family's defining ODE at u, if the family has one.
    pub fn family_ode_residual(&self, u: f64) -> Option<f64> {
        self.ode_residual.as_ref().map(|r| r(u))
    }

    fn check_epsilon(epsilon: i32) -> Result<()> {
        if epsilon == 1 || epsilon == -1 {
            Ok(())
        } else {
            Err(GeometryError::BadParam(format!("epsilon must be +1 or -1, got {epsilon}")))
        }
    }

    /// Reject domains on which f is not positive or f' vanishes/changes sign.
    fn scan_admissible(
        f: &ScalarFn,
        df: &ScalarFn,
        domain: (f64, f64),
    ) -> Result<()> {
        if !domain.0.is_finite() || !domain.1.is_finite() || domain.0 >= domain.1 {
            return Err(GeometryError::BadParam(format!(
                "domain [{}, {}] must be a finite nonempty interval",
                domain.0, domain.1
            )));
        }
        let n = 512;
        let mut max_slope: f64 = 0.0;
        let mut slopes = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let u = domain.0 + (domain.1 - domain.0) * i as f64 / n as f64;
            let fv = f(u);
            if !fv.is_finite() || fv <= 0.0 {
                return Err(GeometryError::BadParam(format!(
                    "f(u) = {fv} not positive at u = {u}"
                )));
            }
            let s = df(u);
            max_slope = max_slope.max(s.abs());
            slopes.push((u, s));
        }
        let sign = slopes[slopes.len() / 2].1.signum();
        for (u, s) in slopes {
            if s.abs() < SLOPE_TOL * max_slope.max(1.0) || s.signum() != sign {
                return Err(GeometryError::SingularProfile { at: u });
            }
        }
        Ok(())
    }

    /// f = a u + b with g = eps/(2a) u + c; the only flat family.
    pub fn flat(a: f64, b: f64, c: f64, epsilon: i32, domain: Option<(f64, f64)>) -> Result<Self> {
        Self::check_epsilon(epsilon)?;
        if a == 0.0 {
            return Err(GeometryError::BadParam("flat profile requires a != 0".into()));
        }
        let domain = domain.unwrap_or_else(|| {
            // f spans [1, 1 + |a|] with f' of constant sign
            let lo = (1.0 - b) / a;
            let hi = (1.0 + a.abs() - b) / a;
            (lo.min(hi), lo.max(hi))
        });
        let eps = epsilon as f64;
        let f: ScalarFn = Arc::new(move |u| a * u + b);
        let df: ScalarFn = Arc::new(move |_| a);
        Self::scan_admissible(&f, &df, domain)?;
        Ok(ProfileCurve {
            family: ProfileFamily::Flat,
            epsilon,
            domain,
            params: vec![("a".into(), a), ("b".into(), b), ("c".into(), c)],
            f,
            df,
            d2f: Arc::new(|_| 0.0),
            d3f: Arc::new(|_| 0.0),
            g: Arc::new(move |u| eps / (2.0 * a) * u + c),
            ode_residual: Some(Arc::new(|_| 0.0)),
        })
    }

    /// Solution family of f'' - eps K0 f = 0: hyperbolic branch for
    /// eps*K0 > 0, trigonometric branch for eps*K0 < 0. K0 is the Gauss
    /// curvature the patch realizes.
    pub fn constant_k(
        k0: f64,
        alpha: f64,
        beta: f64,
        epsilon: i32,
        domain: Option<(f64, f64)>,
    ) -> Result<Self> {
        Self::check_epsilon(epsilon)?;
        if k0 == 0.0 {
            return Err(GeometryError::BadParam(
                "constant_k requires K0 != 0; use the flat family for K = 0".into(),
            ));
        }
        if alpha == 0.0 && beta == 0.0 {
            return Err(GeometryError::BadParam("constant_k requires (alpha, beta) != (0, 0)".into()));
        }
        let eps = epsilon as f64;
        let omega = k0.abs().sqrt();
        let hyperbolic = eps * k0 > 0.0;
        let w2 = if hyperbolic { omega * omega } else { -omega * omega }; // f'' = w2 f
        let (f, df): (ScalarFn, ScalarFn) = if hyperbolic {
            (
                Arc::new(move |u| alpha * (omega * u).cosh() + beta * (omega * u).sinh()),
                Arc::new(move |u| omega * (alpha * (omega * u).sinh() + beta * (omega * u).cosh())),
            )
        } else {
            (
                Arc::new(move |u| alpha * (omega * u).cos() + beta * (omega * u).sin()),
                Arc::new(move |u| omega * (-alpha * (omega * u).sin() + beta * (omega * u).cos())),
            )
        };
        let domain = match domain {
            Some(d) => d,
            None => default_domain_by_scan(&f, &df, omega, hyperbolic)?,
        };
        Self::scan_admissible(&f, &df, domain)?;
        let d2f: ScalarFn = {
            let f = f.clone();
            Arc::new(move |u| w2 * f(u))
        };
        let d3f: ScalarFn = {
            let df = df.clone();
            Arc::new(move |u| w2 * df(u))
        };
        let g = quadrature_g(df.clone(), eps, domain.0, 0.0);
        let residual: ScalarFn = {
            let (f, d2f) = (f.clone(), d2f.clone());
            Arc::new(move |u| d2f(u) - eps * k0 * f(u))
        };
        Ok(ProfileCurve {
            family: ProfileFamily::ConstantK,
            epsilon,
            domain,
            params: vec![("k0".into(), k0), ("alpha".into(), alpha), ("beta".into(), beta)],
            f,
            df,
            d2f,
            d3f,
            g,
            ode_residual: Some(residual),
        })
    }

    /// CMC family: f' = (a f^2 + b)/(2 f), equivalently
    /// f f'' + f'^2 = a f f'. Must be paired with a kappa = 0 curve.
    pub fn parallel_h(
        a: f64,
        b: f64,
        f0: f64,
        epsilon: i32,
        domain: Option<(f64, f64)>,
    ) -> Result<Self> {
        Self::check_epsilon(epsilon)?;
        if a == 0.0 {
            return Err(GeometryError::BadParam(
                "parallel_h requires a != 0 (a = 0 gives the minimal surface H = 0)".into(),
            ));
        }
        let phi = PhiOde::ParallelH { a, b };
        let domain = domain.unwrap_or((0.0, 1.0));
        let table = OdeProfileTable::build(phi, f0, epsilon, domain)?;
        let residual: ScalarFn = {
            let t = table.clone();
            Arc::new(move |u| {
                let f = t.f(u);
                let fp = t.phi.phi(f);
                let f2 = t.phi.dphi(f) * fp;
                f * f2 + fp * fp - a * f * fp
            })
        };
        Ok(Self::from_table(
            ProfileFamily::ParallelH,
            epsilon,
            domain,
            vec![("a".into(), a), ("b".into(), b), ("f0".into(), f0)],
            table,
            Some(residual),
        ))
    }

    /// PNMCV case (i): f = sqrt(a u + b), so that f f'' + f'^2 = 0
    /// identically. Must be paired with a curve whose kappa never vanishes.
    pub fn pnmcv_i(a: f64, b: f64, c: f64, epsilon: i32, domain: Option<(f64, f64)>) -> Result<Self> {
        Self::check_epsilon(epsilon)?;
        if a == 0.0 {
            return Err(GeometryError::BadParam("pnmcv_i requires a != 0".into()));
        }
        let domain = domain.unwrap_or_else(|| {
            // a u + b spans [1, 2]
            let lo = (1.0 - b) / a;
            let hi = (2.0 - b) / a;
            (lo.min(hi), lo.max(hi))
        });
        let w = move |u: f64| a * u + b;
        if w(domain.0) <= 0.0 || w(domain.1) <= 0.0 {
            return Err(GeometryError::BadParam(format!(
                "pnmcv_i domain [{}, {}] admits a*u + b <= 0",
                domain.0, domain.1
            )));
        }
        let eps = epsilon as f64;
        let f: ScalarFn = Arc::new(move |u| w(u).sqrt());
        let df: ScalarFn = Arc::new(move |u| 0.5 * a / w(u).sqrt());
        Self::scan_admissible(&f, &df, domain)?;
        let d2f: ScalarFn = Arc::new(move |u| -0.25 * a * a / w(u).powf(1.5));
        let d3f: ScalarFn = Arc::new(move |u| 0.375 * a * a * a / w(u).powf(2.5));
        // g' = eps/(2 f') = eps sqrt(a u + b)/a
        let g: ScalarFn = Arc::new(move |u| eps * 2.0 / (3.0 * a * a) * w(u).powf(1.5) + c);
        let residual: ScalarFn = {
            let (f, df, d2f) = (f.clone(), df.clone(), d2f.clone());
            Arc::new(move |u| f(u) * d2f(u) + df(u) * df(u))
        };
        Ok(ProfileCurve {
            family: ProfileFamily::PnmcvI,
            epsilon,
            domain,
            params: vec![("a".into(), a), ("b".into(), b), ("c".into(), c)],
            f,
            df,
            d2f,
            d3f,
            g,
            ode_residual: Some(residual),
        })
    }

    /// PNMCV case (ii): f' = (c f + b)/f, so that f f'' + f'^2 = c f'.
    /// `kappa0` is the constant curvature of the curve it will be paired
    /// with; the theorem requires c^2 != kappa0^2.
    pub fn pnmcv_ii(
        c: f64,
        b: f64,
        kappa0: f64,
        f0: f64,
        epsilon: i32,
        domain: Option<(f64, f64)>,
    ) -> Result<Self> {
        Self::check_epsilon(epsilon)?;
        if c == 0.0 {
            return Err(GeometryError::BadParam("pnmcv_ii requires c != 0".into()));
        }
        if c * c == kappa0 * kappa0 {
            return Err(GeometryError::BadParam(format!(
                "pnmcv_ii requires c^2 != kappa0^2, got c = {c}, kappa0 = {kappa0} (H would be lightlike)"
            )));
        }
        let phi = PhiOde::PnmcvII { c, b };
        let domain = domain.unwrap_or((0.0, 1.0));
        let table = OdeProfileTable::build(phi, f0, epsilon, domain)?;
        let residual: ScalarFn = {
            let t = table.clone();
            Arc::new(move |u| {
                let f = t.f(u);
                let fp = t.phi.phi(f);
                let f2 = t.phi.dphi(f) * fp;
                f * f2 + fp * fp - c * fp
            })
        };
        Ok(Self::from_table(
            ProfileFamily::PnmcvII,
            epsilon,
            domain,
            vec![("c".into(), c), ("b".into(), b), ("kappa0".into(), kappa0), ("f0".into(), f0)],
            table,
            Some(residual),
        ))
    }

    /// Polynomial profile f = sum coeffs\[i\] u^i, for probing surfaces
    /// outside the theorem families.
    pub fn poly(coeffs: &[f64], epsilon: i32, domain: (f64, f64)) -> Result<Self> {
        Self::check_epsilon(epsilon)?;
        if coeffs.iter().all(|&c| c == 0.0) {
            return Err(GeometryError::BadParam("poly profile has all-zero coefficients".into()));
        }
        fn eval(cs: &[f64], u: f64) -> f64 {
            cs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
        }
        fn deriv(cs: &[f64]) -> Vec<f64> {
            cs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
        }
        let c0 = coeffs.to_vec();
        let c1 = deriv(&c0);
        let c2 = deriv(&c1);
        let c3 = deriv(&c2);
        let f: ScalarFn = Arc::new(move |u| eval(&c0, u));
        let df: ScalarFn = Arc::new(move |u| eval(&c1, u));
        Self::scan_admissible(&f, &df, domain)?;
        let params = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (format!("c{i}"), c))
            .collect();
        let g = quadrature_g(df.clone(), epsilon as f64, domain.0, 0.0);
        Ok(ProfileCurve {
            family: ProfileFamily::Custom,
            epsilon,
            domain,
            params,
            f,
            df,
            d2f: Arc::new(move |u| eval(&c2, u)),
            d3f: Arc::new(move |u| eval(&c3, u)),
            g,
            ode_residual: None,
        })
    }

    /// Arbitrary profile from user closures; g is gauge-derived by
    /// quadrature. The closures must be consistent derivatives of f.
    pub fn custom(
        f: ScalarFn,
        df: ScalarFn,
        d2f: ScalarFn,
        d3f: ScalarFn,
        epsilon: i32,
        domain: (f64, f64),
    ) -> Result<Self> {
        Self::check_epsilon(epsilon)?;
        Self::scan_admissible(&f, &df, domain)?;
        let g = quadrature_g(df.clone(), epsilon as f64, domain.0, 0.0);
        Ok(ProfileCurve {
            family: ProfileFamily::Custom,
            epsilon,
            domain,
            params: vec![],
            f,
            df,
            d2f,
            d3f,
            g,
            ode_residual: None,
        })
    }

    fn from_table(
        family: ProfileFamily,
        epsilon: i32,
        domain: (f64, f64),
        params: Vec<(String, f64)>,
        table: Arc<OdeProfileTable>,
        ode_residual: Option<ScalarFn>,
    ) -> Self {
        let (t_f, t_df, t_d2, t_d3, t_g) =
            (table.clone(), table.clone(), table.clone(), table.clone(), table);
        ProfileCurve {
            family,
            epsilon,
            domain,
            params,
            f: Arc::new(move |u| t_f.f(u)),
            df: Arc::new(move |u| {
                let f = t_df.f(u);
                t_df.phi.phi(f)
            }),
            d2f: Arc::new(move |u| {
                let f = t_d2.f(u);
                t_d2.phi.dphi(f) * t_d2.phi.phi(f)
            }),
            d3f: Arc::new(move |u| {
                // f''' = phi''(f) f'^2 + phi'(f) f''
                let f = t_d3.f(u);
                let fp = t_d3.phi.phi(f);
                let f2 = t_d3.phi.dphi(f) * fp;
                t_d3.phi.d2phi(f) * fp * fp + t_d3.phi.dphi(f) * f2
            }),
            g: Arc::new(move |u| t_g.g(u)),
            ode_residual,
        }
    }
}

/// Gauge quadrature: g(u) = g0 + int_{u0}^{u} eps/(2 f'(t)) dt.
///
/// This is the generic route ([`adaptive_simpson`] at 1e-10 relative);
/// families with a closed-form g use that instead.
pub fn quadrature_g(df: ScalarFn, eps: f64, u0: f64, g0: f64) -> ScalarFn {
    Arc::new(move |u| {
        let df = df.clone();
        g0 + adaptive_simpson(&move |t| eps / (2.0 * df(t)), u0, u, 1e-10)
    })
}

/// Standalone gauge solver: checks f' does not vanish on the domain, then
/// returns (g, g') with g anchored at g(domain.0) = g0.
pub fn gauge_g(
    df: ScalarFn,
    epsilon: i32,
    domain: (f64, f64),
    g0: f64,
) -> Result<(ScalarFn, ScalarFn)> {
    let n = 512;
    let mut max_slope: f64 = 0.0;
    let mut vals = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let u = domain.0 + (domain.1 - domain.0) * i as f64 / n as f64;
        let s = df(u);
        max_slope = max_slope.max(s.abs());
        vals.push((u, s));
    }
    for (u, s) in vals {
        if s.abs() < SLOPE_TOL * max_slope.max(1.0) {
            return Err(GeometryError::SingularProfile { at: u });
        }
    }
    let eps = epsilon as f64;
    let g = quadrature_g(df.clone(), eps, domain.0, g0);
    let dg: ScalarFn = Arc::new(move |u| eps / (2.0 * df(u)));
    Ok((g, dg))
}

/// Split a requested domain at the zeros of f', returning the admissible
/// sub-intervals (f > 0, f' bounded away from zero) with a small inset.
pub fn split_domain(f: &ScalarFn, df: &ScalarFn, domain: (f64, f64)) -> Vec<(f64, f64)> {
    let n = 2048;
    let h = (domain.1 - domain.0) / n as f64;
    let mut max_slope: f64 = 0.0;
    let samples: Vec<(f64, f64, f64)> = (0..=n)
        .map(|i| {
            let u = domain.0 + h * i as f64;
            let (fv, s) = (f(u), df(u));
            max_slope = max_slope.max(s.abs());
            (u, fv, s)
        })
        .collect();
    let ok = |&(_, fv, s): &(f64, f64, f64)| fv > 0.0 && s.abs() > 1e-3 * max_slope.max(1.0);
    let mut out = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for (i, smp) in samples.iter().enumerate() {
        let sign_break = run
            .map(|(s0, _)| samples[s0].2.signum() != smp.2.signum())
            .unwrap_or(false);
        if ok(smp) && !sign_break {
            run = Some(run.map(|(s0, _)| (s0, i)).unwrap_or((i, i)));
        } else {
            if let Some((s0, s1)) = run.take() {
                if s1 > s0 + 8 {
                    out.push((samples[s0].0, samples[s1].0));
                }
            }
            if ok(smp) {
                run = Some((i, i));
            }
        }
    }
    if let Some((s0, s1)) = run {
        if s1 > s0 + 8 {
            out.push((samples[s0].0, samples[s1].0));
        }
    }
    // inset 2% from each end so the scan margins are respected downstream
    out.into_iter()
        .map(|(a, b)| {
            let w = b - a;
            (a + 0.02 * w, b - 0.02 * w)
        })
        .collect()
}

fn default_domain_by_scan(
    f: &ScalarFn,
    df: &ScalarFn,
    omega: f64,
    hyperbolic: bool,
) -> Result<(f64, f64)> {
    let span = if hyperbolic { 2.0 / omega } else { 0.995 * std::f64::consts::PI / omega };
    let pieces = split_domain(f, df, (-span, span));
    // prefer a rising branch, fall back to any admissible piece
    let best = pieces
        .iter()
        .filter(|&&(a, b)| df(0.5 * (a + b)) > 0.0)
        .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
        .or_else(|| pieces.iter().max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0))));
    let (a, b) = best.copied().ok_or_else(|| {
        GeometryError::BadParam("no admissible default domain (f > 0, f' != 0) found".into())
    })?;
    // keep to the middle of the run (away from f = 0 and f' = 0) and cap
    // the length so curvature scales stay O(1)
    let (a, b) = (a + 0.25 * (b - a), b - 0.25 * (b - a));
    let cap = 1.5 / omega;
    if b - a > cap {
        let mid = 0.5 * (a + b);
        Ok((mid - 0.5 * cap, mid + 0.5 * cap))
    } else {
        Ok((a, b))
    }
}

/// Right-hand sides f' = phi(f) of the ODE families.
#[derive(Debug, Clone, Copy)]
enum PhiOde {
    ParallelH { a: f64, b: f64 },
    PnmcvII { c: f64, b: f64 },
}

impl PhiOde {
    fn phi(self, t: f64) -> f64 {
        match self {
            PhiOde::ParallelH { a, b } => (a * t * t + b) / (2.0 * t),
            PhiOde::PnmcvII { c, b } => (c * t + b) / t,
        }
    }

    fn dphi(self, t: f64) -> f64 {
        match self {
            PhiOde::ParallelH { a, b } => 0.5 * a - 0.5 * b / (t * t),
            PhiOde::PnmcvII { b, .. } => -b / (t * t),
        }
    }

    fn d2phi(self, t: f64) -> f64 {
        match self {
            PhiOde::ParallelH { b, .. } => b / (t * t * t),
            PhiOde::PnmcvII { b, .. } => 2.0 * b / (t * t * t),
        }
    }
}

/// Uniform node cache of the co-integrated state [f, g].
struct OdeProfileTable {
    phi: PhiOde,
    eps: f64,
    u0: f64,
    step: f64,
    nodes: Vec<[f64; 2]>,
}

impl OdeProfileTable {
    fn build(phi: PhiOde, f0: f64, epsilon: i32, domain: (f64, f64)) -> Result<Arc<Self>> {
        if !f0.is_finite() || f0 <= 0.0 {
            return Err(GeometryError::BadParam(format!("initial value f0 = {f0} must be positive")));
        }
        if phi.phi(f0) == 0.0 {
            return Err(GeometryError::BadParam(format!(
                "initial slope f'(u0) = phi({f0}) vanishes; the gauge cannot hold"
            )));
        }
        if phi.phi(f0) < 0.0 {
            return Err(GeometryError::BadParam(format!(
                "initial slope phi({f0}) = {} is negative; reparametrize u -> -u",
                phi.phi(f0)
            )));
        }
        if !domain.0.is_finite() || !domain.1.is_finite() || domain.0 >= domain.1 {
            return Err(GeometryError::BadParam("profile domain must be a finite nonempty interval".into()));
        }
        let eps = epsilon as f64;
        let rhs = move |_u: f64, y: &[f64; 2]| [phi.phi(y[0]), eps / (2.0 * phi.phi(y[0]))];
        let slope0 = phi.phi(f0).abs();
        let valid = move |u: f64, y: &[f64; 2]| {
            if y[0] < 1e-12 {
                return Some(format!("f reached {} at u = {u}", y[0]));
            }
            if y[0] > 1e12 {
                return Some(format!("f blew up to {} at u = {u}", y[0]));
            }
            let s = phi.phi(y[0]);
            if s.abs() < 1e-8 * slope0.max(1.0) {
                return Some(format!("f' = {s} vanished at u = {u} (singular value of f)"));
            }
            None
        };
        // anchor at domain.0 and pick one step for the whole domain
        let y0 = [f0, 0.0];
        let step = select_step(&rhs, domain.0, y0, domain.1, 1e-12, &valid)?;
        let n = ((domain.1 - domain.0) / step).ceil() as usize;
        let h = (domain.1 - domain.0) / n as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(y0);
        let mut y = y0;
        for k in 0..n {
            let u = domain.0 + h * k as f64;
            y = rk4_step(&rhs, u, y, h);
            if let Some(what) = valid(u + h, &y) {
                return Err(GeometryError::StallError { at: u + h, what });
            }
            nodes.push(y);
        }
        Ok(Arc::new(OdeProfileTable { phi, eps, u0: domain.0, step: h, nodes }))
    }

    fn state(&self, u: f64) -> [f64; 2] {
        let idx = (((u - self.u0) / self.step).floor().max(0.0) as usize).min(self.nodes.len() - 1);
        let u_node = self.u0 + self.step * idx as f64;
        let r = u - u_node;
        if r == 0.0 {
            return self.nodes[idx];
        }
        let (phi, eps) = (self.phi, self.eps);
        let rhs = move |_u: f64, y: &[f64; 2]| [phi.phi(y[0]), eps / (2.0 * phi.phi(y[0]))];
        let mut y = self.nodes[idx];
        let h = r / 2.0;
        let mut t = u_node;
        for _ in 0..2 {
            y = rk4_step(&rhs, t, y, h);
            t += h;
        }
        y
    }

    fn f(&self, u: f64) -> f64 {
        self.state(u)[0]
    }

    fn g(&self, u: f64) -> f64 {
        self.state(u)[1]
    }
}
