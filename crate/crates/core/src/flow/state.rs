use rayon::prelude::*;

use super::config::FlowConfig;
use crate::ambient::{herm, horizontal_part, retract, CVec, Tangent, C64};
use crate::error::{Error, Result};
use crate::immersion::{extract_mean_curvature, DiscreteImmersion, MeanCurvatureField};
use crate::tensor::frame::real_dot;

/// Number of times a rejected step is retried with half the time step.
pub const MAX_RETRIES: usize = 8;

/// A discrete immersion at time `t` with its cached mean curvature field.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub immersion: DiscreteImmersion,
    pub t: f64,
    pub step: u64,
    pub geometry: MeanCurvatureField,
    /// Shortest grid edge, as a geodesic length.
    pub spacing: f64,
    /// Velocity used at every node: the mean curvature vector, copied inward
    /// from the nearest centred-stencil node where a stencil is one-sided.
    pub velocity: Vec<CVec>,
}

impl FlowState {
    pub fn new(immersion: DiscreteImmersion, t: f64, step: u64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("time must be nonnegative, got {t}")));
        }
        let geometry = extract_mean_curvature(&immersion)?;
        let spacing = immersion.min_adjacent_distance();
        let velocity = closed_velocity(&immersion, &geometry);
        Ok(Self { immersion, t, step, geometry, spacing, velocity })
    }

    pub fn max_norm_h2(&self) -> f64 {
        self.geometry.max_norm_h2()
    }
}

/// Mean curvature vectors, with one-sided stencil nodes taking the value of
/// the nearest centred node, moved to their own normal space.
fn closed_velocity(im: &DiscreteImmersion, field: &MeanCurvatureField) -> Vec<CVec> {
    let topo = im.topology();
    (0..im.len())
        .into_par_iter()
        .map(|k| {
            if field.full_stencil[k] {
                return field.local[k].mean.clone();
            }
            let src = topo.flat_index(&topo.nearest_full_stencil(&topo.multi_index(k)));
            let h = &field.local[src].mean;
            let size = h.norm();
            if size == 0.0 {
                return h.clone();
            }
            let z = im.nodes()[k].coords();
            let p = herm(im.nodes()[src].coords(), z);
            let phase = if p.norm() > 0.0 { p.conj() / p.norm() } else { C64::new(1.0, 0.0) };
            let mut v = horizontal_part(z, &(h * phase));
            let l = &field.local[k];
            let n = l.tangents.len();
            let tang: Vec<f64> = l.tangents.iter().map(|t| real_dot(&v, t)).collect();
            for c in 0..n {
                let coef: f64 = (0..n).map(|b| l.metric_inv[(c, b)] * tang[b]).sum();
                v -= &l.tangents[c] * C64::new(coef, 0.0);
            }
            let moved = v.norm();
            if moved > 0.0 {
                v * C64::new(size / moved, 0.0)
            } else {
                v
            }
        })
        .collect()
}

/// `dt_safety * min(spacing^2, 1 / (max |h|^2 + n))`, optionally rounded down
/// to a power of two.
pub fn adaptive_dt(state: &FlowState, cfg: &FlowConfig) -> f64 {
    let n = state.immersion.dims().n as f64;
    let raw = cfg.dt_safety * (state.spacing * state.spacing).min(1.0 / (state.max_norm_h2() + n));
    if cfg.quantize_dt {
        2f64.powi(raw.log2().floor() as i32)
    } else {
        raw
    }
}

/// Moves every node along its velocity for time `dt` and re-extracts the geometry.
pub fn step(state: &FlowState, dt: f64) -> Result<FlowState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    advance(state, dt)
}

/// Same as [`step`] with a signed time step.
pub(crate) fn advance(state: &FlowState, dt: f64) -> Result<FlowState> {
    let nodes = state
        .immersion
        .nodes()
        .par_iter()
        .zip(&state.velocity)
        .map(|(p, v)| retract(p, &Tangent::from_horizontal_unchecked(v.clone()), dt))
        .collect::<Result<Vec<_>>>()?;
    let im = state.immersion.with_nodes(nodes)?;
    FlowState::new(im, state.t + dt, state.step + 1)
}
