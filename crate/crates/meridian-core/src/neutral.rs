//! Indefinite linear algebra of the ambient 4-space.
//!
//! The ambient space carries the neutral metric of signature (+,+,-,-):
//!
//! ```text
//! <u, v> = u1 v1 + u2 v2 - u3 v3 - u4 v4
//! ```
//!
//! Besides the orthonormal basis {e1, e2, e3, e4} we work in the
//! pseudo-orthonormal basis {e1, e3, xi1, xi2} with
//! xi1 = (e2 + e4)/sqrt(2), xi2 = (-e2 + e4)/sqrt(2), so that
//! <xi1,xi1> = <xi2,xi2> = 0 and <xi1,xi2> = -1. The xi's are the
//! lightlike directions the whole construction is built around.

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};

pub const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A point or vector of the ambient space in rectangular coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec4 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

/// Causal character of a vector under the neutral metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Lightlike,
    Zero,
}

/// Default absolute tolerance on <v,v> for causal classification.
pub const CAUSAL_TOL: f64 = 1e-9;

impl Vec4 {
    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Vec4 { x1, x2, x3, x4 }
    }

    pub const ZERO: Vec4 = Vec4::new(0.0, 0.0, 0.0, 0.0);
    pub const E1: Vec4 = Vec4::new(1.0, 0.0, 0.0, 0.0);
    pub const E2: Vec4 = Vec4::new(0.0, 1.0, 0.0, 0.0);
    pub const E3: Vec4 = Vec4::new(0.0, 0.0, 1.0, 0.0);
    pub const E4: Vec4 = Vec4::new(0.0, 0.0, 0.0, 1.0);
    /// xi1 = (e2 + e4)/sqrt(2), lightlike.
    pub const XI1: Vec4 = Vec4::new(0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2);
    /// xi2 = (-e2 + e4)/sqrt(2), lightlike, <xi1,xi2> = -1.
    pub const XI2: Vec4 = Vec4::new(0.0, -FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2);

    /// Indefinite inner product of signature (+,+,-,-).
    pub fn inner(self, other: Vec4) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2 - self.x3 * other.x3 - self.x4 * other.x4
    }

    /// <v,v>, the (sign-carrying) squared norm.
    pub fn norm2(self) -> f64 {
        self.inner(self)
    }

    /// Euclidean magnitude, used only for degeneracy/zero detection.
    pub fn euclidean_norm(self) -> f64 {
        (self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3 + self.x4 * self.x4).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite() && self.x3.is_finite() && self.x4.is_finite()
    }

    /// Classify by the sign of <v,v> against an absolute tolerance.
    pub fn causal_character(self, tol: f64) -> CausalCharacter {
        let q = self.norm2();
        if q > tol {
            CausalCharacter::Spacelike
        } else if q < -tol {
            CausalCharacter::Timelike
        } else if self.euclidean_norm() > tol {
            CausalCharacter::Lightlike
        } else {
            CausalCharacter::Zero
        }
    }

    /// Coordinates (a1, a3, b1, b2) in the pseudo-orthonormal basis:
    /// v = a1 e1 + a3 e3 + b1 xi1 + b2 xi2.
    pub fn pseudo_coords(self) -> (f64, f64, f64, f64) {
        // b1 - b2 = sqrt(2) x2, b1 + b2 = sqrt(2) x4.
        let b1 = (self.x2 + self.x4) * FRAC_1_SQRT_2;
        let b2 = (self.x4 - self.x2) * FRAC_1_SQRT_2;
        (self.x1, self.x3, b1, b2)
    }

    /// Inverse of [`pseudo_coords`](Self::pseudo_coords).
    pub fn from_pseudo_coords(a1: f64, a3: f64, b1: f64, b2: f64) -> Vec4 {
        Vec4::E1 * a1 + Vec4::E3 * a3 + Vec4::XI1 * b1 + Vec4::XI2 * b2
    }
}

impl std::ops::Add for Vec4 {
    type Output = Vec4;
    fn add(self, o: Vec4) -> Vec4 {
        Vec4::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3, self.x4 + o.x4)
    }
}

impl std::ops::Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, o: Vec4) -> Vec4 {
        Vec4::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3, self.x4 - o.x4)
    }
}

impl std::ops::Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, s: f64) -> Vec4 {
        Vec4::new(self.x1 * s, self.x2 * s, self.x3 * s, self.x4 * s)
    }
}

impl std::ops::Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        self * -1.0
    }
}

/// Indefinite Gram-Schmidt.
///
/// Orthogonalizes `vs` under the neutral inner product and normalizes each
/// output to self-inner-product ±1, reporting the sign. Fails with
/// [`GeometryError::DegenerateFrame`] when an intermediate vector is
/// lightlike within `tol` (relative to its Euclidean magnitude), since such
/// a vector admits no unit normalization.
pub fn gram_schmidt_indefinite(vs: &[Vec4], tol: f64) -> Result<Vec<(Vec4, i32)>> {
    let mut out: Vec<(Vec4, i32)> = Vec::with_capacity(vs.len());
    for (index, &v) in vs.iter().enumerate() {
        let mut w = v;
        for &(u, sign) in &out {
            // u is normalized to <u,u> = sign, so the projection coefficient
            // is sign * <w,u>.
            w = w - u * (sign as f64 * w.inner(u));
        }
        let q = w.norm2();
        let scale = w.euclidean_norm().max(1.0);
        if q.abs() < tol * scale * scale {
            return Err(GeometryError::DegenerateFrame { index, norm2: q });
        }
        let sign = if q > 0.0 { 1 } else { -1 };
        out.push((w * (1.0 / q.abs().sqrt()), sign));
    }
    Ok(out)
}
