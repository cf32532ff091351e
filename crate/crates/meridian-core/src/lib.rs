//! Lorentz meridian surfaces on rotational hypersurfaces with lightlike
//! axis in the pseudo-Euclidean 4-space of signature (+,+,-,-).
//!
//! The crate builds the one-parameter systems of meridians
//!
//! ```text
//! z(u,v) = f(u) l(v) + g(u) xi1,
//! l(v) = phi(v) cosh v e1 + phi(v) sinh v e3 + (phi^2/2) xi1 + xi2,
//! ```
//!
//! computes their full local invariants (moving frame, fundamental forms,
//! Gauss curvature, mean curvature vector, shape operators, normal
//! connection) with exact 2-jet differentiation, and numerically certifies
//! the classification of the flat, constant-Gauss-curvature, parallel-H
//! and parallel-normalized-H families.

pub mod classify;
pub mod config;
pub mod curve;
pub mod error;
pub mod grid;
pub mod jet;
pub mod neutral;
pub mod ode;
pub mod patch;
pub mod profile;
pub mod surface;
pub mod verify;

pub use classify::{
    check_constant_k, check_flat, check_parallel_h, check_pnmcv, check_separation, classify,
    classify_on_grid, hyperplane_check, ClassificationResult, DecidedClass, Tolerances,
};
pub use config::SpecConfig;
pub use curve::{CurveFamily, GeneratingCurve};
pub use error::{GeometryError, Result};
pub use grid::{sample_grid, GridResult, SurfaceSample};
pub use jet::{finite_difference_jet, Jet2, PositionJet};
pub use neutral::{gram_schmidt_indefinite, CausalCharacter, Vec4};
pub use patch::{MeridianSpec, Violation};
pub use profile::{gauge_g, split_domain, ProfileCurve, ProfileFamily};
pub use surface::{CurvatureReport, FundamentalForms, MovingFrame};
pub use verify::{jet_fd_residual, run_verification, CheckRecord, SummaryStats, VerificationReport};
