use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a flow run. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConfig {
    /// Fraction of the stability bound used as time step, in `(0, 1]`.
    pub dt_safety: f64,
    /// Round each time step down to a power of two.
    pub quantize_dt: bool,
    pub max_steps: usize,
    /// Stop once this time is reached.
    pub max_time: Option<f64>,
    /// Exponent of `f_sigma`, in `(0, 1)`.
    pub sigma: f64,
    /// `eps` of the threshold `W` and the margin `U`.
    pub eps: f64,
    /// Diameter monitor parameter; defaults to `0.5 sqrt(eps) / (8 n pi)`.
    pub eta: Option<f64>,
    /// Stop when `max |h|^2` exceeds this value.
    pub blowup_h2: f64,
    /// Stop when `max |h|^2` falls below this value.
    pub decay_h2: f64,
    /// Stop when the mean distance to `center` falls below this value.
    pub min_radius: Option<f64>,
    /// Reference point for the mean radius monitor, as `(re, im)` pairs.
    pub center: Option<Vec<[f64; 2]>>,
    /// Record monitors every this many steps.
    pub monitor_every: usize,
    /// Evaluate the evolution residual every this many steps; 0 disables it.
    pub residual_every: usize,
    /// Emit a snapshot every this many steps; 0 disables snapshots.
    pub snapshot_every: usize,
    /// Seed of a random unitary applied to the initial data; `None` keeps the chart.
    pub chart_seed: Option<u64>,
    /// Run even if the initial data fails the pinching check.
    pub waive_pinching: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt_safety: 0.1,
            quantize_dt: false,
            max_steps: 20_000,
            max_time: None,
            sigma: 0.01,
            eps: 1e-2,
            eta: None,
            blowup_h2: 1e3,
            decay_h2: 1e-8,
            min_radius: None,
            center: None,
            monitor_every: 1,
            residual_every: 0,
            snapshot_every: 0,
            chart_seed: None,
            waive_pinching: false,
        }
    }
}

impl FlowConfig {
    /// Largest admissible `eta` for dimension `n`.
    pub fn eta_bound(&self, n: usize) -> f64 {
        self.eps.sqrt() / (8.0 * n as f64 * PI)
    }

    pub fn eta_for(&self, n: usize) -> f64 {
        self.eta.unwrap_or(0.5 * self.eta_bound(n))
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return bad(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad(format!("sigma must lie in (0, 1), got {}", self.sigma));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return bad(format!("eps must lie in (0, 1), got {}", self.eps));
        }
        let eta = self.eta_for(n);
        if !(eta > 0.0 && eta < self.eta_bound(n)) {
            return bad(format!("eta must lie in (0, {:e}), got {eta}", self.eta_bound(n)));
        }
        if !(self.blowup_h2 > self.decay_h2 && self.decay_h2 >= 0.0) {
            return bad(format!("need 0 <= decay_h2 < blowup_h2, got {} and {}", self.decay_h2, self.blowup_h2));
        }
        if self.max_steps == 0 || self.monitor_every == 0 {
            return bad("max_steps and monitor_every must be positive".into());
        }
        if let Some(t) = self.max_time {
            if !(t > 0.0) {
                return bad(format!("max_time must be positive, got {t}"));
            }
        }
        if self.min_radius.is_some() && self.center.is_none() {
            return bad("min_radius needs a center".into());
        }
        Ok(())
    }
}
