//! Uniform sampling of a patch with per-point invariants.

use crate::error::GeometryError;
use crate::patch::MeridianSpec;
use crate::surface::{analyze, SurfacePoint};

/// One valid sample with its parameters.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceSample {
    pub u: f64,
    pub v: f64,
    pub point: SurfacePoint,
}

/// Grid evaluation result: valid samples plus the degenerate points that
/// were excluded (reported, not silently skipped).
#[derive(Debug)]
pub struct GridResult {
    pub nu: usize,
    pub nv: usize,
    pub samples: Vec<SurfaceSample>,
    pub failures: Vec<(f64, f64, GeometryError)>,
}

impl GridResult {
    pub fn valid_fraction(&self) -> f64 {
        let total = self.samples.len() + self.failures.len();
        if total == 0 {
            0.0
        } else {
            self.samples.len() as f64 / total as f64
        }
    }

    /// Fold a per-sample scalar into (min, max, mean).
    pub fn stats(&self, f: impl Fn(&SurfaceSample) -> f64) -> (f64, f64, f64) {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for s in &self.samples {
            let x = f(s);
            min = min.min(x);
            max = max.max(x);
            sum += x;
        }
        (min, max, sum / self.samples.len().max(1) as f64)
    }

    pub fn max_abs(&self, f: impl Fn(&SurfaceSample) -> f64) -> f64 {
        self.samples.iter().map(|s| f(s).abs()).fold(0.0, f64::max)
    }

    pub fn spread(&self, f: impl Fn(&SurfaceSample) -> f64) -> f64 {
        let (min, max, _) = self.stats(f);
        max - min
    }
}

/// Evaluate the full pipeline on an inclusive nu x nv uniform grid.
pub fn sample_grid(spec: &MeridianSpec, nu: usize, nv: usize) -> GridResult {
    let nu = nu.max(2);
    let nv = nv.max(2);
    let (u0, u1) = spec.u_domain;
    let (v0, v1) = spec.v_domain;
    let mut samples = Vec::with_capacity(nu * nv);
    let mut failures = Vec::new();
    for i in 0..nu {
        let u = u0 + (u1 - u0) * i as f64 / (nu - 1) as f64;
        for k in 0..nv {
            let v = v0 + (v1 - v0) * k as f64 / (nv - 1) as f64;
            match analyze(spec, u, v) {
                Ok(point) => samples.push(SurfaceSample { u, v, point }),
                Err(e) => failures.push((u, v, e)),
            }
        }
    }
    GridResult { nu, nv, samples, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::GeneratingCurve;
    use crate::profile::ProfileCurve;

    #[test]
    fn full_grid_on_admissible_spec() {
        let p = ProfileCurve::flat(1.0, 1.0, 0.0, -1, Some((0.0, 1.0))).unwrap();
        let c = GeneratingCurve::kappa_zero(1.0, 1.0, -1, Some((-0.7, 0.7))).unwrap();
        let spec = MeridianSpec::new(p, c).unwrap();
        let grid = sample_grid(&spec, 21, 21);
        assert_eq!(grid.samples.len(), 441);
        assert!(grid.failures.is_empty());
        assert!((grid.valid_fraction() - 1.0).abs() < 1e-15);
        let (kmin, kmax, _) = grid.stats(|s| s.point.report.k);
        assert!(kmin.abs() < 1e-10 && kmax.abs() < 1e-10);
    }
}
