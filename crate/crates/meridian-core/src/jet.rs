//! Second-order forward-mode differentiation in two variables.
//!
//! A [`Jet2`] carries a value together with all partial derivatives up to
//! order two at a point (u, v). Arithmetic propagates derivatives by the
//! chain and Leibniz rules, so every slot of a composite expression is the
//! analytic derivative, exact to machine precision. This is what makes
//! tangents, second derivatives and curvatures of a parametrized patch
//! cheap and trustworthy; an independent central-difference evaluation
//! ([`finite_difference_jet`]) serves as the cross-check.
//!
//! The mixed-partial slots are written in a swap-symmetric form (grouping
//! the `du*dv` cross terms) so that exchanging the roles of u and v
//! reproduces `duv` bit for bit.

use crate::error::{GeometryError, Result};
use crate::neutral::Vec4;

/// Value and partials up to order two at a point (u, v).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub val: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub duv: f64,
    pub dvv: f64,
}

impl Jet2 {
    pub const fn new(val: f64, du: f64, dv: f64, duu: f64, duv: f64, dvv: f64) -> Self {
        Jet2 { val, du, dv, duu, duv, dvv }
    }

    /// Constant with all derivative slots zero.
    pub const fn constant(val: f64) -> Self {
        Jet2::new(val, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// Seed for the u variable: du = 1, everything else 0.
    pub const fn seed_u(u0: f64) -> Self {
        Jet2::new(u0, 1.0, 0.0, 0.0, 0.0, 0.0)
    }

    /// Seed for the v variable: dv = 1, everything else 0.
    pub const fn seed_v(v0: f64) -> Self {
        Jet2::new(v0, 0.0, 1.0, 0.0, 0.0, 0.0)
    }

    /// Jet of a univariate function of u with known value and derivatives.
    pub const fn of_u_function(val: f64, d1: f64, d2: f64) -> Self {
        Jet2::new(val, d1, 0.0, d2, 0.0, 0.0)
    }

    /// Jet of a univariate function of v with known value and derivatives.
    pub const fn of_v_function(val: f64, d1: f64, d2: f64) -> Self {
        Jet2::new(val, 0.0, d1, 0.0, 0.0, d2)
    }

    /// Chain rule for a scalar function g with g(x) = f0, g'(x) = f1,
    /// g''(x) = f2 evaluated at x = self.val.
    fn lift(self, f0: f64, f1: f64, f2: f64) -> Self {
        Jet2 {
            val: f0,
            du: f1 * self.du,
            dv: f1 * self.dv,
            duu: f2 * (self.du * self.du) + f1 * self.duu,
            duv: f2 * (self.du * self.dv) + f1 * self.duv,
            dvv: f2 * (self.dv * self.dv) + f1 * self.dvv,
        }
    }

    pub fn cosh(self) -> Self {
        let (c, s) = (self.val.cosh(), self.val.sinh());
        self.lift(c, s, c)
    }

    pub fn sinh(self) -> Self {
        let (c, s) = (self.val.cosh(), self.val.sinh());
        self.lift(s, c, s)
    }

    pub fn exp(self) -> Self {
        let e = self.val.exp();
        self.lift(e, e, e)
    }

    pub fn cos(self) -> Self {
        let (c, s) = (self.val.cos(), self.val.sin());
        self.lift(c, -s, -c)
    }

    pub fn sin(self) -> Self {
        let (c, s) = (self.val.cos(), self.val.sin());
        self.lift(s, c, -s)
    }

    /// sqrt with the domain guard the surface pipeline relies on.
    pub fn sqrt(self) -> Result<Self> {
        if self.val <= 0.0 {
            return Err(GeometryError::DomainError(format!(
                "sqrt of non-positive jet value {}",
                self.val
            )));
        }
        let r = self.val.sqrt();
        Ok(self.lift(r, 0.5 / r, -0.25 / (r * self.val)))
    }

    /// Real power with positive base.
    pub fn powf(self, p: f64) -> Result<Self> {
        if self.val <= 0.0 {
            return Err(GeometryError::DomainError(format!(
                "powf of non-positive jet value {}",
                self.val
            )));
        }
        let f0 = self.val.powf(p);
        Ok(self.lift(f0, p * f0 / self.val, p * (p - 1.0) * f0 / (self.val * self.val)))
    }

    /// Integer power by repeated multiplication.
    pub fn powi(self, n: u32) -> Self {
        let mut acc = Jet2::constant(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }

    /// 1/self, guarded against a vanishing denominator.
    pub fn recip(self) -> Result<Self> {
        if self.val.abs() < 1e-300 {
            return Err(GeometryError::DomainError(
                "division by jet value below 1e-300".into(),
            ));
        }
        let inv = 1.0 / self.val;
        Ok(self.lift(inv, -inv * inv, 2.0 * inv * inv * inv))
    }

    /// self/rhs, guarded against a vanishing denominator.
    pub fn try_div(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs.recip()?)
    }
}

impl std::ops::Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            val: self.val + o.val,
            du: self.du + o.du,
            dv: self.dv + o.dv,
            duu: self.duu + o.duu,
            duv: self.duv + o.duv,
            dvv: self.dvv + o.dvv,
        }
    }
}

impl std::ops::Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        Jet2 {
            val: self.val - o.val,
            du: self.du - o.du,
            dv: self.dv - o.dv,
            duu: self.duu - o.duu,
            duv: self.duv - o.duv,
            dvv: self.dvv - o.dvv,
        }
    }
}

impl std::ops::Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            val: self.val * o.val,
            du: self.du * o.val + self.val * o.du,
            dv: self.dv * o.val + self.val * o.dv,
            duu: self.duu * o.val + 2.0 * (self.du * o.du) + self.val * o.duu,
            duv: self.duv * o.val + (self.du * o.dv + self.dv * o.du) + self.val * o.duv,
            dvv: self.dvv * o.val + 2.0 * (self.dv * o.dv) + self.val * o.dvv,
        }
    }
}

impl std::ops::Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self * Jet2::constant(-1.0)
    }
}

impl std::ops::Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, s: f64) -> Jet2 {
        self + Jet2::constant(s)
    }
}

impl std::ops::Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, s: f64) -> Jet2 {
        self - Jet2::constant(s)
    }
}

impl std::ops::Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, s: f64) -> Jet2 {
        self * Jet2::constant(s)
    }
}

impl std::ops::Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, s: f64) -> Jet2 {
        self * Jet2::constant(1.0 / s)
    }
}

/// Jets of the four ambient coordinates of a parametrization at (u, v).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionJet {
    pub x: [Jet2; 4],
}

impl PositionJet {
    pub fn new(x1: Jet2, x2: Jet2, x3: Jet2, x4: Jet2) -> Self {
        PositionJet { x: [x1, x2, x3, x4] }
    }

    /// Assemble from pseudo-basis coefficient jets:
    /// z = a1 e1 + a3 e3 + b1 xi1 + b2 xi2.
    pub fn from_pseudo(a1: Jet2, a3: Jet2, b1: Jet2, b2: Jet2) -> Self {
        let s = crate::neutral::FRAC_1_SQRT_2;
        PositionJet::new(a1, (b1 - b2) * s, a3, (b1 + b2) * s)
    }

    fn slot(&self, pick: impl Fn(&Jet2) -> f64) -> Vec4 {
        Vec4::new(pick(&self.x[0]), pick(&self.x[1]), pick(&self.x[2]), pick(&self.x[3]))
    }

    /// The surface point z(u, v).
    pub fn point(&self) -> Vec4 {
        self.slot(|j| j.val)
    }

    /// First partials z_u, z_v.
    pub fn zu(&self) -> Vec4 {
        self.slot(|j| j.du)
    }

    pub fn zv(&self) -> Vec4 {
        self.slot(|j| j.dv)
    }

    /// Second partials.
    pub fn zuu(&self) -> Vec4 {
        self.slot(|j| j.duu)
    }

    pub fn zuv(&self) -> Vec4 {
        self.slot(|j| j.duv)
    }

    pub fn zvv(&self) -> Vec4 {
        self.slot(|j| j.dvv)
    }
}

/// Default step for the central-difference oracle.
pub const FD_DEFAULT_STEP: f64 = 1e-4;

/// Central-difference estimate of a full 2-jet of a patch, O(h^2) accurate.
///
/// This is the independent oracle for every jet-based derivative in the
/// crate; it never touches the jet arithmetic.
pub fn finite_difference_jet<F>(patch: F, u: f64, v: f64, h: f64) -> Result<PositionJet>
where
    F: Fn(f64, f64) -> Result<Vec4>,
{
    if !h.is_finite() || h <= 0.0 {
        return Err(GeometryError::DomainError(format!("finite difference step h = {h} must be positive")));
    }
    let c = patch(u, v)?;
    let pu = patch(u + h, v)?;
    let mu = patch(u - h, v)?;
    let pv = patch(u, v + h)?;
    let mv = patch(u, v - h)?;
    let pp = patch(u + h, v + h)?;
    let pm = patch(u + h, v - h)?;
    let mp = patch(u - h, v + h)?;
    let mm = patch(u - h, v - h)?;

    let comp = |sel: &dyn Fn(Vec4) -> f64| {
        let (c, pu, mu, pv, mv) = (sel(c), sel(pu), sel(mu), sel(pv), sel(mv));
        let (pp, pm, mp, mm) = (sel(pp), sel(pm), sel(mp), sel(mm));
        Jet2 {
            val: c,
            du: (pu - mu) / (2.0 * h),
            dv: (pv - mv) / (2.0 * h),
            duu: (pu - 2.0 * c + mu) / (h * h),
            dvv: (pv - 2.0 * c + mv) / (h * h),
            duv: (pp - pm - mp + mm) / (4.0 * h * h),
        }
    };
    Ok(PositionJet::new(
        comp(&|p: Vec4| p.x1),
        comp(&|p: Vec4| p.x2),
        comp(&|p: Vec4| p.x3),
        comp(&|p: Vec4| p.x4),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seeds() {
        assert_eq!(Jet2::seed_u(2.0), Jet2::new(2.0, 1.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(Jet2::seed_v(0.0), Jet2::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0));
        assert_eq!(Jet2::seed_u(-1.0).val, -1.0);
    }

    #[test]
    fn square_of_u() {
        let j = Jet2::seed_u(3.0) * Jet2::seed_u(3.0);
        assert_eq!(j.val, 9.0);
        assert_eq!(j.du, 6.0);
        assert_eq!(j.duu, 2.0);
        assert_eq!((j.dv, j.duv, j.dvv), (0.0, 0.0, 0.0));
    }

    #[test]
    fn cosh_at_zero() {
        let j = Jet2::seed_v(0.0).cosh();
        assert_eq!(j.val, 1.0);
        assert_eq!(j.dv, 0.0);
        assert_eq!(j.dvv, 1.0);
    }

    #[test]
    fn sqrt_of_four() {
        let j = Jet2::seed_u(4.0).sqrt().unwrap();
        assert_eq!(j.val, 2.0);
        assert_eq!(j.du, 0.25);
        assert!((j.duu - (-1.0 / 32.0)).abs() < 1e-15);

        // first-derivative cross-check against central differences
        let h = 1e-5;
        let fd = (((4.0f64 + h).sqrt()) - ((4.0f64 - h).sqrt())) / (2.0 * h);
        assert!((j.du - fd).abs() <= 1e-8);
    }

    #[test]
    fn sqrt_rejects_non_positive() {
        assert!(Jet2::seed_u(0.0).sqrt().is_err());
        assert!(Jet2::seed_u(-1.0).sqrt().is_err());
    }

    #[test]
    fn powf_matches_analytic_derivatives() {
        // d/du u^{3/2} = 1.5 u^{1/2}, d2 = 0.75 u^{-1/2}
        let j = Jet2::seed_u(4.0).powf(1.5).unwrap();
        assert!((j.val - 8.0).abs() < 1e-14);
        assert!((j.du - 3.0).abs() < 1e-14);
        assert!((j.duu - 0.375).abs() < 1e-14);
        assert!(Jet2::seed_u(-1.0).powf(0.5).is_err());
    }

    #[test]
    fn recip_guards_tiny_denominator() {
        assert!(Jet2::constant(0.0).recip().is_err());
        let j = Jet2::seed_u(2.0).recip().unwrap();
        assert_eq!(j.val, 0.5);
        assert_eq!(j.du, -0.25);
        assert_eq!(j.duu, 0.25);
    }

    // Symbolic partials of the test composites, hand-derived.
    //
    // c1(u,v) = exp(a u) * cosh(b v)
    // c2(u,v) = sqrt(1 + u^2 + v^2)
    // c3(u,v) = sinh(u v)
    // c4(u,v) = polynomial  p(u,v) = sum c_ij u^i v^j, i+j <= 3
    struct Partials {
        val: f64,
        du: f64,
        dv: f64,
        duu: f64,
        duv: f64,
        dvv: f64,
    }

    fn c1_sym(a: f64, b: f64, u: f64, v: f64) -> Partials {
        let e = (a * u).exp();
        let (c, s) = ((b * v).cosh(), (b * v).sinh());
        Partials {
            val: e * c,
            du: a * e * c,
            dv: b * e * s,
            duu: a * a * e * c,
            duv: a * b * e * s,
            dvv: b * b * e * c,
        }
    }

    fn c2_sym(u: f64, v: f64) -> Partials {
        let w = 1.0 + u * u + v * v;
        let r = w.sqrt();
        Partials {
            val: r,
            du: u / r,
            dv: v / r,
            duu: (w - u * u) / (w * r),
            duv: -u * v / (w * r),
            dvv: (w - v * v) / (w * r),
        }
    }

    fn c3_sym(u: f64, v: f64) -> Partials {
        let (c, s) = ((u * v).cosh(), (u * v).sinh());
        Partials {
            val: s,
            du: v * c,
            dv: u * c,
            duu: v * v * s,
            duv: c + u * v * s,
            dvv: u * u * s,
        }
    }

    fn assert_matches(j: Jet2, p: Partials, tol: f64, what: &str) {
        for (got, want, slot) in [
            (j.val, p.val, "val"),
            (j.du, p.du, "du"),
            (j.dv, p.dv, "dv"),
            (j.duu, p.duu, "duu"),
            (j.duv, p.duv, "duv"),
            (j.dvv, p.dvv, "dvv"),
        ] {
            let scale = want.abs().max(1.0);
            assert!(
                (got - want).abs() <= tol * scale,
                "{what}.{slot}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn random_composites_match_symbolic_partials() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let (u, v) = (rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let (a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let (ju, jv) = (Jet2::seed_u(u), Jet2::seed_v(v));

            let c1 = (ju * a).exp() * (jv * b).cosh();
            assert_matches(c1, c1_sym(a, b, u, v), 1e-8, "exp*cosh");

            let c2 = (ju * ju + jv * jv + 1.0).sqrt().unwrap();
            assert_matches(c2, c2_sym(u, v), 1e-8, "sqrt(1+u^2+v^2)");

            let c3 = (ju * jv).sinh();
            assert_matches(c3, c3_sym(u, v), 1e-8, "sinh(uv)");

            // cubic polynomial with random coefficients, symbolic partials
            // accumulated term by term
            let mut jp = Jet2::constant(0.0);
            let mut sym = Partials { val: 0.0, du: 0.0, dv: 0.0, duu: 0.0, duv: 0.0, dvv: 0.0 };
            for i in 0..4usize {
                for k in 0..(4 - i) {
                    let c: f64 = rng.random_range(-2.0..2.0);
                    jp = jp + ju.powi(i as u32) * jv.powi(k as u32) * c;
                    let (fi, fk) = (i as f64, k as f64);
                    let upi = |p: i32| if i as i32 - p < 0 { 0.0 } else { u.powi(i as i32 - p) };
                    let vpk = |p: i32| if k as i32 - p < 0 { 0.0 } else { v.powi(k as i32 - p) };
                    sym.val += c * upi(0) * vpk(0);
                    sym.du += c * fi * upi(1) * vpk(0);
                    sym.dv += c * fk * upi(0) * vpk(1);
                    sym.duu += c * fi * (fi - 1.0) * upi(2) * vpk(0);
                    sym.duv += c * fi * fk * upi(1) * vpk(1);
                    sym.dvv += c * fk * (fk - 1.0) * upi(0) * vpk(2);
                }
            }
            assert_matches(jp, sym, 1e-12, "cubic polynomial");
        }
    }

    #[test]
    fn mixed_partials_symmetric_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let (s, t) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let f = |x: Jet2, y: Jet2| (x * y).sinh() + (x * x - y) * (y * 0.5).exp();
            let a = f(Jet2::seed_u(s), Jet2::seed_v(t));
            let b = f(Jet2::seed_v(s), Jet2::seed_u(t)); // u and v roles exchanged
            assert_eq!(a.duv, b.duv, "duv must be swap-symmetric bit for bit");
            assert_eq!(a.du, b.dv);
            assert_eq!(a.duu, b.dvv);
        }
    }

    #[test]
    fn fd_jet_of_linear_patch() {
        let patch = |u: f64, v: f64| Ok(Vec4::new(u, v, 0.0, 0.0));
        let j = finite_difference_jet(patch, 0.3, -0.2, 1e-4).unwrap();
        assert!((j.zu() - Vec4::new(1.0, 0.0, 0.0, 0.0)).euclidean_norm() < 1e-9);
        assert!((j.zv() - Vec4::new(0.0, 1.0, 0.0, 0.0)).euclidean_norm() < 1e-9);
        assert!(j.zuu().euclidean_norm() < 1e-7);
    }

    #[test]
    fn fd_jet_rejects_bad_step() {
        let patch = |u: f64, v: f64| Ok(Vec4::new(u, v, 0.0, 0.0));
        assert!(finite_difference_jet(patch, 0.0, 0.0, 0.0).is_err());
        assert!(finite_difference_jet(patch, 0.0, 0.0, -1e-3).is_err());
    }
}
