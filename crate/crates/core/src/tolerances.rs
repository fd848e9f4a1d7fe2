//! Numerical tolerances shared across modules.

/// Components with modulus below this are skipped when picking the gauge component.
pub const GAUGE_EPS: f64 = 1e-9;
/// Norm below which a vector is treated as zero.
pub const ZERO_NORM: f64 = 1e-12;
/// Allowed `|<w, z>|` for a vector to count as horizontal.
pub const HORIZONTAL: f64 = 1e-10;
/// Smallest singular value accepted for a set of tangent vectors.
pub const RANK: f64 = 1e-8;
/// Orthonormality defect accepted for frames.
pub const ORTHONORMAL: f64 = 1e-10;
/// Smallest singular value of an immersion differential accepted at a node.
pub const IMMERSION_RANK: f64 = 1e-6;
/// Largest distance allowed between adjacent grid nodes.
pub const ADJACENT_DISTANCE: f64 = 0.5;
