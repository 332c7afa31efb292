//! Numerical realization of boundary maps for the geodesic flow on compact
//! hyperbolic surfaces of genus g >= 2.
//!
//! The surface is presented by a regular (8g-4)-sided fundamental polygon in
//! the unit disk whose side-pairing transformations generate the covering
//! group. On the boundary circle this yields a family of piecewise Möbius
//! maps, one per choice of partition points, whose two-dimensional natural
//! extensions have attractors with finite rectangular structure. The crate
//! computes those attractors, codes geodesics arithmetically and
//! geometrically, verifies the conjugacy between the curvilinear and
//! rectilinear dynamics, detects Markov partitions, tests duality between
//! partitions, and evaluates the invariant measure and entropy.
//!
//! Circle points are stored as angles in `[0, 2*pi)`; all interval logic is
//! cyclic-arc arithmetic from [`moebius`]. Indices of sides, vertices, and
//! partition points are 1-based and wrap modulo `8g-4`, matching the
//! conventions used throughout the module documentation.

pub mod boundary;
pub mod coding;
pub mod duality;
pub mod markov;
pub mod measure;
pub mod moebius;
pub mod surface;

use std::sync::OnceLock;

/// Matrix normalization tolerance: `|a|^2 - |b|^2` must stay within this of 1.
pub const EPS_MAT: f64 = 1e-10;

const DEFAULT_EPS_ANGLE: f64 = 1e-9;

/// Angular equality tolerance. Defaults to 1e-9; the environment variable
/// `GEODESIC_CODER_TOL` overrides it (read once per process).
pub fn angular_tolerance() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("GEODESIC_CODER_TOL")
            .ok()
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(DEFAULT_EPS_ANGLE)
    })
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix determinant deviates from 1 beyond tolerance")]
    DegenerateMap,
    #[error("map is not hyperbolic ({0:?})")]
    NotHyperbolic(moebius::TraceClass),
    #[error("boundary triples have opposite cyclic orientation")]
    OrientationMismatch,
    #[error("boundary-triple solve is numerically singular: {0}")]
    NumericallySingular(String),
    #[error("map is a rotation and has no isometric circle")]
    IsRotation,
    #[error("group relation failed during construction: {0}")]
    RelationFailure(String),
    #[error("index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("geodesic misses the fundamental polygon")]
    NoIntersection,
    #[error("invalid partition: {0}")]
    InvalidPattern(String),
    #[error("fixed point left its admissible interval at index {0}")]
    FixedPointNotInInterval(usize),
    #[error("point is not in the attractor")]
    NotInAttractor,
    #[error("reduction did not finish within {0} steps")]
    MaxStepsExceeded(usize),
    #[error("numeric attractor did not stabilize: {0}")]
    NoFiniteStructure(String),
    #[error("transition structure is not Markov: {0}")]
    NotMarkov(String),
    #[error("rectangle touches the diagonal")]
    TouchesDiagonal,
    #[error("point lies in neither the curvilinear nor the rectilinear domain")]
    Unclassifiable,
    #[error("geodesic is not reduced")]
    NotReduced,
}

pub type Result<T> = std::result::Result<T, Error>;
