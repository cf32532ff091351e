//! Local invariants of a meridian patch: moving frame, fundamental forms,
//! Gauss curvature, mean curvature vector, shape operators and the normal
//! connection.
//!
//! The tangent frame is X = z_u / sqrt(2 eps f' g'), Y = z_v / (f
//! sqrt(eps(phid^2 - phi^2))) with <X,X> = -eps, <Y,Y> = eps, and the
//! normal frame is
//!
//! ```text
//! n1 = sqrt(eps f'/(2 g')) ( phi cosh v e1 + phi sinh v e3
//!        + (f' phi^2 - 2 g')/(2 f') xi1 + xi2 )
//! n2 = (phid sinh v + phi cosh v) e1 + (phid cosh v + phi sinh v) e3
//!        + phi^2 xi1, normalized by sqrt(eps(phid^2 - phi^2))
//! ```
//!
//! with <n1,n1> = eps, <n2,n2> = -eps. Gauss curvature comes from the
//! Gauss-equation contraction of the second fundamental form; the closed
//! forms K = eps f''/f and the mean-curvature components under the gauge
//! are provided as independent oracles. The normal connection is obtained
//! by differentiating jets of the closed-form frame, never by a third jet
//! order of the position.
//!
//! Sign rigor: sqrt(eps f'/(2g')) = |f'| under the gauge, so a profile
//! with f' < 0 flips the n1-components of h(X,X) and H by sigma =
//! sign(f'). K and all vanishing/constancy conditions are sigma-free;
//! closed forms below carry sigma explicitly.

use serde::Serialize;

use crate::error::{GeometryError, Result};
use crate::jet::{Jet2, PositionJet};
use crate::neutral::{gram_schmidt_indefinite, Vec4};
use crate::patch::{MeridianSpec, DEGENERACY_TOL};

/// Pseudo-orthonormal tangent/normal frame at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingFrame {
    pub x: Vec4,
    pub y: Vec4,
    pub n1: Vec4,
    pub n2: Vec4,
    pub epsilon: i32,
}

impl MovingFrame {
    /// Largest deviation among the ten inner-product constraints
    /// (three tangent, three normal, four mixed).
    pub fn orthonormality_residual(&self) -> f64 {
        let e = self.epsilon as f64;
        [
            (self.x.inner(self.x) + e).abs(),
            (self.y.inner(self.y) - e).abs(),
            self.x.inner(self.y).abs(),
            (self.n1.inner(self.n1) - e).abs(),
            (self.n2.inner(self.n2) + e).abs(),
            self.n1.inner(self.n2).abs(),
            self.x.inner(self.n1).abs(),
            self.x.inner(self.n2).abs(),
            self.y.inner(self.n1).abs(),
            self.y.inner(self.n2).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Coefficients of a normal vector in the (n1, n2) basis.
    pub fn normal_components(&self, w: Vec4) -> [f64; 2] {
        let e = self.epsilon as f64;
        [e * w.inner(self.n1), -e * w.inner(self.n2)]
    }
}

/// First fundamental form E, F, G and the second-form coefficients in the
/// (n1, n2) basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    /// h(X,X), h(X,Y), h(Y,Y) components along (n1, n2).
    pub h11: [f64; 2],
    pub h12: [f64; 2],
    pub h22: [f64; 2],
}

/// Everything pointwise the classification consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub k: f64,
    pub h: Vec4,
    /// H = h_components\[0\] n1 + h_components\[1\] n2.
    pub h_components: [f64; 2],
    /// <H, H> = eps (h1^2 - h2^2).
    pub h_norm2: f64,
    /// Normal-connection coefficients of D_X n_i, D_Y n_i in (n1, n2).
    pub dx_n1: [f64; 2],
    pub dx_n2: [f64; 2],
    pub dy_n1: [f64; 2],
    pub dy_n2: [f64; 2],
    /// D_X H and D_Y H components (closed form).
    pub dx_h: [f64; 2],
    pub dy_h: [f64; 2],
    /// Curvature of the meridian u-line and of the generating curve.
    pub kappa_m: f64,
    pub kappa: f64,
}

/// First fundamental form coefficients E = <z_u,z_u>, F = <z_u,z_v>,
/// G = <z_v,z_v>.
pub fn first_form(j: &PositionJet) -> (f64, f64, f64) {
    let (zu, zv) = (j.zu(), j.zv());
    (zu.inner(zu), zu.inner(zv), zv.inner(zv))
}

/// Frame denominators at a point, checked against the degeneracy floor.
struct PointScales {
    fp: f64,
    gp: f64,
    /// sqrt(2 eps f' g'), the X normalizer.
    s: f64,
    /// f sqrt(eps(phid^2 - phi^2)), the Y normalizer.
    t: f64,
    /// eps (phid^2 - phi^2) > 0.
    metric: f64,
}

fn point_scales(spec: &MeridianSpec, u: f64, v: f64) -> Result<PointScales> {
    let eps = spec.epsilon() as f64;
    let f = spec.profile.f(u);
    let fp = spec.profile.df(u);
    let gp = spec.profile.dg(u);
    let fpgp = fp * gp;
    if fpgp.abs() < DEGENERACY_TOL * (fp.abs().max(1.0) * gp.abs().max(1.0)) {
        return Err(GeometryError::DegeneratePoint { u, v, what: format!("f' g' = {fpgp} ~ 0") });
    }
    if (eps * fpgp) <= 0.0 {
        return Err(GeometryError::SignMismatch(format!(
            "sign(f'g') = {} but epsilon = {} at u = {u}",
            fpgp.signum(),
            spec.epsilon()
        )));
    }
    let metric = spec.curve.metric_factor(v);
    let phi = spec.curve.phi(v);
    let dphi = spec.curve.dphi(v);
    if metric.abs() < DEGENERACY_TOL * (phi * phi + dphi * dphi) {
        return Err(GeometryError::DegeneratePoint {
            u,
            v,
            what: format!("phid^2 - phi^2 = {} ~ 0", metric * eps),
        });
    }
    if metric < 0.0 {
        return Err(GeometryError::SignMismatch(format!(
            "sign(phid^2 - phi^2) != epsilon = {} at v = {v}",
            spec.epsilon()
        )));
    }
    Ok(PointScales { fp, gp, s: (2.0 * eps * fpgp).sqrt(), t: f * metric.sqrt(), metric })
}

/// The canonical explicit frame at (u, v).
pub fn meridian_frame(spec: &MeridianSpec, j: &PositionJet, u: f64, v: f64) -> Result<MovingFrame> {
    let eps = spec.epsilon() as f64;
    let sc = point_scales(spec, u, v)?;
    let x = j.zu() * (1.0 / sc.s);
    let y = j.zv() * (1.0 / sc.t);

    let phi = spec.curve.phi(v);
    let dphi = spec.curve.dphi(v);
    let p2 = eps * sc.fp / (2.0 * sc.gp);
    if p2 <= 0.0 {
        return Err(GeometryError::DegeneratePoint {
            u,
            v,
            what: format!("eps f'/(2g') = {p2} not positive"),
        });
    }
    let p = p2.sqrt();
    let q = (sc.fp * phi * phi - 2.0 * sc.gp) / (2.0 * sc.fp);
    let n1 = Vec4::from_pseudo_coords(phi * v.cosh(), phi * v.sinh(), q, 1.0) * p;

    let r = 1.0 / sc.metric.sqrt();
    let n2 = Vec4::from_pseudo_coords(
        dphi * v.sinh() + phi * v.cosh(),
        dphi * v.cosh() + phi * v.sinh(),
        phi * phi,
        0.0,
    ) * r;

    Ok(MovingFrame { x, y, n1, n2, epsilon: spec.epsilon() })
}

/// Second fundamental form from the position jet and a frame.
pub fn second_form(j: &PositionJet, frame: &MovingFrame) -> Result<FundamentalForms> {
    let (e, f, g) = first_form(j);
    let eps = frame.epsilon as f64;
    let s2 = -eps * e; // = 2 eps f' g' > 0
    let t2 = eps * g; // = f^2 eps (phid^2 - phi^2) > 0
    if s2 <= 0.0 || t2 <= 0.0 {
        return Err(GeometryError::DegeneratePoint {
            u: f64::NAN,
            v: f64::NAN,
            what: format!("first form not Lorentzian: E = {e}, G = {g} for eps = {eps}"),
        });
    }
    let st = (s2 * t2).sqrt();
    let comp = |w: Vec4, scale: f64| -> [f64; 2] {
        [eps * w.inner(frame.n1) / scale, -eps * w.inner(frame.n2) / scale]
    };
    Ok(FundamentalForms {
        e,
        f,
        g,
        h11: comp(j.zuu(), s2),
        h12: comp(j.zuv(), st),
        h22: comp(j.zvv(), t2),
    })
}

/// Gauss curvature by the Gauss-equation contraction
/// K = -( <h(X,X), h(Y,Y)> - <h(X,Y), h(X,Y)> ).
pub fn gauss_curvature(ff: &FundamentalForms, epsilon: i32) -> f64 {
    let e = epsilon as f64;
    let inner = |a: [f64; 2], b: [f64; 2]| e * (a[0] * b[0] - a[1] * b[1]);
    -(inner(ff.h11, ff.h22) - inner(ff.h12, ff.h12))
}

/// Mean curvature vector H = (1/2)(-eps h(X,X) + eps h(Y,Y)) recombined in
/// ambient coordinates; returns (H, (n1, n2) components, <H,H>).
pub fn mean_curvature(ff: &FundamentalForms, frame: &MovingFrame) -> (Vec4, [f64; 2], f64) {
    let e = frame.epsilon as f64;
    let h1 = 0.5 * e * (ff.h22[0] - ff.h11[0]);
    let h2 = 0.5 * e * (ff.h22[1] - ff.h11[1]);
    let h = frame.n1 * h1 + frame.n2 * h2;
    (h, [h1, h2], e * (h1 * h1 - h2 * h2))
}

/// Matrix of the shape operator A_{n_which} in the (X, Y) basis,
/// defined by <A_xi V, W> = <h(V,W), xi>. Row-major: entry \[i\]\[j\] is the
/// i-th component of the image of the j-th basis vector.
pub fn shape_operator(ff: &FundamentalForms, which: usize) -> [[f64; 2]; 2] {
    match which {
        1 => [[-ff.h11[0], -ff.h12[0]], [ff.h12[0], ff.h22[0]]],
        2 => [[ff.h11[1], ff.h12[1]], [-ff.h12[1], -ff.h22[1]]],
        _ => panic!("shape operator index must be 1 or 2"),
    }
}

/// Ambient derivatives and normal-connection coefficients of the normal
/// frame, from jets of its closed form.
#[derive(Debug, Clone, Copy)]
pub struct NormalBundle {
    pub n1: Vec4,
    pub n2: Vec4,
    pub nabla_x_n1: Vec4,
    pub nabla_x_n2: Vec4,
    pub nabla_y_n1: Vec4,
    pub nabla_y_n2: Vec4,
    pub dx_n1: [f64; 2],
    pub dx_n2: [f64; 2],
    pub dy_n1: [f64; 2],
    pub dy_n2: [f64; 2],
}

/// Differentiate n1(u,v), n2(u,v) along X and Y and project onto the
/// normal bundle. All four coefficient pairs vanish for meridian patches.
pub fn normal_connection(spec: &MeridianSpec, u: f64, v: f64) -> Result<NormalBundle> {
    let eps = spec.epsilon() as f64;
    let sc = point_scales(spec, u, v)?;

    let fpj = spec.profile.df_jet(u);
    let gpj = spec.profile.dg_jet(u);
    let phij = spec.curve.phi_jet(v);
    let dphij = spec.curve.dphi_jet(v);
    let vj = Jet2::seed_v(v);
    let (ch, sh) = (vj.cosh(), vj.sinh());

    let p = (fpj * eps).try_div(gpj * 2.0)?.sqrt()?;
    let q = phij * phij * 0.5 - gpj.try_div(fpj)?;
    let n1j = PositionJet::from_pseudo(p * phij * ch, p * phij * sh, p * q, p);

    let r = ((dphij * dphij - phij * phij) * eps).sqrt()?.recip()?;
    let n2j = PositionJet::from_pseudo(
        r * (dphij * sh + phij * ch),
        r * (dphij * ch + phij * sh),
        r * phij * phij,
        Jet2::constant(0.0),
    );

    let (n1, n2) = (n1j.point(), n2j.point());
    let nabla_x_n1 = n1j.zu() * (1.0 / sc.s);
    let nabla_x_n2 = n2j.zu() * (1.0 / sc.s);
    let nabla_y_n1 = n1j.zv() * (1.0 / sc.t);
    let nabla_y_n2 = n2j.zv() * (1.0 / sc.t);

    let proj = |w: Vec4| [eps * w.inner(n1), -eps * w.inner(n2)];
    Ok(NormalBundle {
        n1,
        n2,
        nabla_x_n1,
        nabla_x_n2,
        nabla_y_n1,
        nabla_y_n2,
        dx_n1: proj(nabla_x_n1),
        dx_n2: proj(nabla_x_n2),
        dy_n1: proj(nabla_y_n1),
        dy_n2: proj(nabla_y_n2),
    })
}

/// Closed-form D_X H and D_Y H components from (f, f', f'', f''', kappa,
/// kappad): D_X H = -(eps sigma/2) W' n1 + (kappa f'/(2 f^2)) n2 and
/// D_Y H = -kappad/(2 f^2 sqrt(eps(phid^2 - phi^2))) n2, with
/// W = (f f'' + f'^2)/(f f').
pub fn mean_curvature_derivatives(spec: &MeridianSpec, u: f64, v: f64) -> ([f64; 2], [f64; 2]) {
    let eps = spec.epsilon() as f64;
    let f = spec.profile.f(u);
    let fp = spec.profile.df(u);
    let f2 = spec.profile.d2f(u);
    let f3 = spec.profile.d3f(u);
    let sigma = fp.signum();
    let kappa = spec.curve.kappa(v);
    let dkappa = spec.curve.dkappa(v);
    let metric = spec.curve.metric_factor(v);

    let num = f * f2 + fp * fp;
    let dnum = f * f3 + 3.0 * fp * f2;
    let den = f * fp;
    let dden = fp * fp + f * f2;
    let w_prime = (dnum * den - num * dden) / (den * den);

    let dx_h = [-0.5 * eps * sigma * w_prime, kappa * fp / (2.0 * f * f)];
    let dy_h = [0.0, -dkappa / (2.0 * f * f * metric.sqrt())];
    (dx_h, dy_h)
}

/// Closed-form Gauss curvature under the gauge: K = eps f''/f.
pub fn gauss_curvature_closed(spec: &MeridianSpec, u: f64) -> f64 {
    spec.epsilon() as f64 * spec.profile.d2f(u) / spec.profile.f(u)
}

/// Curvature of the meridian u-line,
/// kappa_m = eps (f'' g' - g'' f') / (2 eps f' g')^{3/2} (= f''/f' under
/// the gauge).
pub fn meridian_curvature(spec: &MeridianSpec, u: f64) -> f64 {
    let eps = spec.epsilon() as f64;
    let fp = spec.profile.df(u);
    let f2 = spec.profile.d2f(u);
    let gp = spec.profile.dg(u);
    let g2 = spec.profile.d2g(u);
    eps * (f2 * gp - g2 * fp) / (2.0 * eps * fp * gp).powf(1.5)
}

/// Closed-form mean curvature components under the gauge:
/// h1 = -eps sigma (f f'' + f'^2)/(2 f f'), h2 = -kappa/(2 f).
pub fn mean_curvature_closed(spec: &MeridianSpec, u: f64, v: f64) -> [f64; 2] {
    let eps = spec.epsilon() as f64;
    let f = spec.profile.f(u);
    let fp = spec.profile.df(u);
    let f2 = spec.profile.d2f(u);
    let sigma = fp.signum();
    [
        -eps * sigma * (f * f2 + fp * fp) / (2.0 * f * fp),
        -spec.curve.kappa(v) / (2.0 * f),
    ]
}

/// Everything pointwise, bundled.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub position: Vec4,
    pub frame: MovingFrame,
    pub forms: FundamentalForms,
    pub report: CurvatureReport,
}

/// Run the full pipeline at one parameter point.
pub fn analyze(spec: &MeridianSpec, u: f64, v: f64) -> Result<SurfacePoint> {
    let j = spec.position_jet(u, v)?;
    let frame = meridian_frame(spec, &j, u, v)?;
    let forms = second_form(&j, &frame)?;
    let k = gauss_curvature(&forms, frame.epsilon);
    let (h, h_components, h_norm2) = mean_curvature(&forms, &frame);
    let nb = normal_connection(spec, u, v)?;
    let (dx_h, dy_h) = mean_curvature_derivatives(spec, u, v);
    Ok(SurfacePoint {
        position: j.point(),
        frame,
        forms,
        report: CurvatureReport {
            k,
            h,
            h_components,
            h_norm2,
            dx_n1: nb.dx_n1,
            dx_n2: nb.dx_n2,
            dy_n1: nb.dy_n1,
            dy_n2: nb.dy_n2,
            dx_h,
            dy_h,
            kappa_m: meridian_curvature(spec, u),
            kappa: spec.curve.kappa(v),
        },
    })
}

/// Cross-check frame: orthonormalize {z_u, z_v, c1, c2} for the first
/// ambient-basis completion that is nondegenerate and return the two
/// normal outputs, oriented so that <out_i, reference_i> > 0.
pub fn generic_normal_pair(
    j: &PositionJet,
    reference: (Vec4, Vec4),
    tol: f64,
) -> Result<(Vec4, Vec4)> {
    let candidates = [
        [Vec4::E1, Vec4::E2],
        [Vec4::E1, Vec4::E4],
        [Vec4::E2, Vec4::E3],
        [Vec4::E3, Vec4::E4],
        [Vec4::E1, Vec4::E3],
        [Vec4::E2, Vec4::E4],
    ];
    let mut last_err = None;
    for cand in candidates {
        match gram_schmidt_indefinite(&[j.zu(), j.zv(), cand[0], cand[1]], tol) {
            Ok(out) => {
                let orient = |w: Vec4, reference: Vec4| {
                    if w.inner(reference) > 0.0 {
                        w
                    } else {
                        -w
                    }
                };
                // match each output to the reference normal it overlaps most
                let (a, b) = (out[2].0, out[3].0);
                let (r1, r2) = reference;
                if a.inner(r1).abs() >= b.inner(r1).abs() {
                    return Ok((orient(a, r1), orient(b, r2)));
                }
                return Ok((orient(b, r1), orient(a, r2)));
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(GeometryError::DegenerateFrame { index: 0, norm2: 0.0 }))
}
