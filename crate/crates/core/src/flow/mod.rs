//! Mean curvature flow of discrete immersions: explicit time stepping along
//! geodesics, per-step monitors and outcome classification.

pub mod config;
pub mod monitor;
pub mod run;
pub mod state;

pub use config::FlowConfig;
pub use monitor::{
    diameter_estimate, evolution_residual, evolution_residual_scaled, mean_distance, monitors, ricci_lower_bound,
    MonitorRecord,
};
pub use run::{
    blowup_trend_holds, random_unitary, run, run_with, write_trajectory_csv, Classification, Event, EventKind,
    EventLog, RunOutput, StopReason,
};
pub use state::{adaptive_dt, step, FlowState, MAX_RETRIES};
