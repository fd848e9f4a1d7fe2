//! Independent references: random tensors, Richardson extrapolation, the
//! sphere radius ODE and the inequality falsification harness.

pub mod falsify;
pub mod richardson;
pub mod sampling;
pub mod sphere;

pub use richardson::{error_order, richardson, Extrapolation, ObservedOrder};
pub use sphere::{patch_mean_curvature, sphere_radius_reference, RadiusTable, RadiusTrajectory, TableSpec};
pub use falsify::{
    falsify, falsify_catalog, falsify_many, CatalogReport, Counterexample, FalsificationReport, InequalityId, SampleSpec,
};
