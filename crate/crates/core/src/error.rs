use thiserror::Error;

/// Errors produced by field evaluation, trajectory integration and the
/// downstream diagnostics.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A coordinate left the field's domain. Names the violated bound.
    #[error("out of domain: {coordinate} = {value} violates {bound}")]
    OutOfDomain {
        coordinate: &'static str,
        value: f64,
        bound: String,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Axial velocity lost positivity where a z-parametrization was required.
    #[error("unilateral flow violated: v_z = {v_z} at (r = {r}, z = {z}, t = {t})")]
    UnilateralViolation { v_z: f64, r: f64, z: f64, t: f64 },

    /// Speed dropped below the stagnation floor.
    #[error("stagnation: |u| = {speed} below floor {floor} at t = {t}")]
    Stagnation { speed: f64, floor: f64, t: f64 },

    /// A trajectory reached the axis (R <= 0).
    #[error("trajectory reached the axis at t = {t}")]
    AxisHit { t: f64 },

    /// Curvature below the floor: the Frenet frame is not defined.
    #[error("frame undefined: curvature {kappa} below floor {floor} at s = {s}")]
    FrameUndefined { kappa: f64, floor: f64, s: f64 },

    /// Streamline labeling lost monotonicity (streamline crossing).
    #[error("streamline map degenerate: d(Rbar)/d(rbar0) = {slope} at (rbar0 = {rbar0}, z = {z})")]
    MapNotMonotone { slope: f64, rbar0: f64, z: f64 },

    /// A radial inversion query fell outside the covered band.
    #[error("radius {r} outside map range [{lo}, {hi}] at z = {z}")]
    OutOfMapRange { r: f64, lo: f64, hi: f64, z: f64 },

    /// Closest-point projection found two candidate feet inside the tube.
    #[error("normal-coordinate projection ambiguous: feet at s = {s1} and s = {s2}")]
    AmbiguousProjection { s1: f64, s2: f64 },

    #[error("point outside the tube of validity (1 - kappa*rbar = {value})")]
    OutsideTube { value: f64 },

    /// Pressure identities require a certified exact Euler field.
    #[error("field '{name}' is not a certified exact Euler solution")]
    Uncertified { name: String },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("ODE integration exceeded {max_steps} steps at t = {t}")]
    MaxSteps { max_steps: usize, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
