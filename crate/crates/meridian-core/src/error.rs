use thiserror::Error;

/// Errors surfaced by construction, evaluation and classification.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeometryError {
    /// An intermediate Gram-Schmidt vector is (numerically) lightlike and
    /// cannot be normalized to self-inner-product ±1.
    #[error("degenerate frame: intermediate vector {index} has |<w,w>| = {norm2:.3e} < tol")]
    DegenerateFrame { index: usize, norm2: f64 },

    /// A surface point where the frame denominators vanish.
    #[error("degenerate point at (u,v)=({u},{v}): {what}")]
    DegeneratePoint { u: f64, v: f64, what: String },

    /// The two sign conditions sign(f'g') and sign(phidot^2 - phi^2)
    /// disagree with the declared epsilon.
    #[error("sign mismatch: {0}")]
    SignMismatch(String),

    /// Evaluation outside the declared parameter domain, or an invalid
    /// numeric argument (non-positive sqrt, vanishing denominator, h <= 0).
    #[error("domain error: {0}")]
    DomainError(String),

    /// A family constructor received parameters outside its admissible set.
    #[error("bad parameter: {0}")]
    BadParam(String),

    /// ODE integration stopped before covering the requested domain.
    #[error("integration stalled at u={at}: {what}")]
    StallError { at: f64, what: String },

    /// f' vanishes inside the requested domain; the gauge 2*eps*f'*g' = 1
    /// cannot hold across the zero.
    #[error("singular profile: f' vanishes near u={at}")]
    SingularProfile { at: f64 },

    /// <H,H> vanishes somewhere on the sample grid; the normalized mean
    /// curvature direction is undefined there.
    #[error("degenerate mean curvature: |<H,H>| = {min_norm2:.3e} below tol on the grid")]
    DegenerateH { min_norm2: f64 },
}

pub type Result<T> = std::result::Result<T, GeometryError>;
