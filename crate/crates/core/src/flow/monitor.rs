use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::Serialize;

use super::config::FlowConfig;
use super::state::FlowState;
use crate::ambient::{distance_unchecked, CVec, C64};
use crate::error::{Error, Result};
use crate::immersion::{frame_nodes, laplacian, normal_gradient_norm2, DiscreteImmersion};
use crate::pinching::{f_sigma, CaseTag, PinchingCase};
use crate::tensor::reaction_terms;

/// Scalar monitors of one flow state, taken over nodes with centred stencils.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitorRecord {
    pub step: u64,
    pub t: f64,
    pub dt: f64,
    pub max_h2: f64,
    pub min_mean2: f64,
    pub max_mean2: f64,
    /// `min |H|^2 / max |H|^2`.
    pub mean_ratio: f64,
    /// Largest pinching margin `U`; negative while the pinching holds.
    pub max_u: Option<f64>,
    pub max_f_sigma: Option<f64>,
    /// `|h°|^2 (|H|^2 + 1)^(sigma - 1) e^(eps t / 2)`.
    pub max_scaled_traceless: f64,
    /// Smallest lower bound for the Ricci curvature.
    pub min_ricci: f64,
    pub diameter: f64,
    /// `(2 eta |H|_max)^-1`.
    pub myers_bound: Option<f64>,
    pub max_grad_mean: f64,
    /// `|h|^2 < (1/(n-1) - eps') |H|^2 + L` with `max |H|^2 > 2nL/eps'`.
    pub hypothesis_pinching: bool,
    /// `|nabla H| < 2 eta^2 max |H|^2`.
    pub hypothesis_gradient: bool,
    pub residual: Option<f64>,
    pub mean_radius: Option<f64>,
    pub case: Option<CaseTag>,
}

impl MonitorRecord {
    /// Both hypotheses of the diameter estimate hold.
    pub fn hypotheses_hold(&self) -> bool {
        self.hypothesis_pinching && self.hypothesis_gradient
    }
}

/// Double-sweep Dijkstra estimate of the intrinsic diameter on the grid graph,
/// with geodesic edge lengths.
pub fn diameter_estimate(im: &DiscreteImmersion) -> f64 {
    let topo = im.topology();
    let mut g = UnGraph::<(), f64>::with_capacity(im.len(), im.len() * 8);
    for _ in 0..im.len() {
        g.add_node(());
    }
    for k in 0..im.len() {
        for nb in topo.neighbours(&topo.multi_index(k)) {
            if nb > k {
                let d = distance_unchecked(im.nodes()[k].coords(), im.nodes()[nb].coords());
                g.add_edge(NodeIndex::new(k), NodeIndex::new(nb), d);
            }
        }
    }
    let farthest = |from: usize| -> (usize, f64) {
        let dist = dijkstra(&g, NodeIndex::new(from), None, |e| *e.weight());
        let mut best = (from, 0.0);
        for k in 0..im.len() {
            if let Some(&d) = dist.get(&NodeIndex::new(k)) {
                if d > best.1 {
                    best = (k, d);
                }
            }
        }
        best
    };
    let (a, _) = farthest(0);
    farthest(a).1
}

/// `(n-1)/n (n + 2|H|^2/n - |h|^2 - (n-2)/sqrt(n(n-1)) |H| |h°|)`.
pub fn ricci_lower_bound(n: usize, h2: f64, mean2: f64) -> f64 {
    let nf = n as f64;
    let traceless2 = (h2 - mean2 / nf).max(0.0);
    (nf - 1.0) / nf
        * (nf + 2.0 * mean2 / nf - h2 - (nf - 2.0) / (nf * (nf - 1.0)).sqrt() * mean2.sqrt() * traceless2.sqrt())
}

/// Mean distance from `center` to the nodes with centred stencils.
pub fn mean_distance(state: &FlowState, center: &[[f64; 2]]) -> Result<f64> {
    let size = state.immersion.dims().m + 1;
    if center.len() != size {
        return Err(Error::Config(format!("center has {} coordinates, need {size}", center.len())));
    }
    let c = CVec::from_iterator(center.len(), center.iter().map(|p| C64::new(p[0], p[1])));
    let c = crate::ambient::normalize_point(c)?;
    let (mut sum, mut count) = (0.0, 0usize);
    for (p, &full) in state.immersion.nodes().iter().zip(&state.geometry.full_stencil) {
        if full {
            sum += distance_unchecked(c.coords(), p.coords());
            count += 1;
        }
    }
    Ok(sum / count.max(1) as f64)
}

/// Computes every monitor except the evolution residual.
pub fn monitors(state: &FlowState, cfg: &FlowConfig, dt: f64) -> Result<MonitorRecord> {
    let dims = state.immersion.dims();
    let n = dims.n;
    let nf = n as f64;
    let case = PinchingCase::new(n, dims.q, cfg.eps).ok();
    let eta = cfg.eta_for(n);
    let geo = &state.geometry;
    let means: Vec<CVec> = geo.local.iter().map(|l| l.mean.clone()).collect();
    let grad_mean = normal_gradient_norm2(&state.immersion, &geo.local, &means)?;

    let mut max_h2 = 0.0f64;
    let mut min_mean2 = f64::INFINITY;
    let mut max_mean2 = 0.0f64;
    let mut max_u: Option<f64> = None;
    let mut max_f: Option<f64> = None;
    let mut max_scaled = 0.0f64;
    let mut min_ricci = f64::INFINITY;
    let mut max_grad = 0.0f64;
    let eps_r = cfg.eps.min(0.5 / (nf * (nf - 1.0)));
    let mut excess = 0.0f64;
    for (k, l) in geo.local.iter().enumerate() {
        if !geo.full_stencil[k] {
            continue;
        }
        let (h2, m2) = (l.norm_h2, l.mean2);
        let traceless2 = (h2 - m2 / nf).max(0.0);
        max_h2 = max_h2.max(h2);
        min_mean2 = min_mean2.min(m2);
        max_mean2 = max_mean2.max(m2);
        if let Some(c) = &case {
            let u = c.margin_u(traceless2, m2)?;
            max_u = Some(max_u.map_or(u, |x| x.max(u)));
            let w = c.threshold_w(m2)?;
            if w > 0.0 {
                let f = f_sigma(traceless2, w, cfg.sigma)?;
                max_f = Some(max_f.map_or(f, |x| x.max(f)));
            }
        }
        max_scaled = max_scaled.max(traceless2 * (m2 + 1.0).powf(cfg.sigma - 1.0) * (cfg.eps * state.t / 2.0).exp());
        min_ricci = min_ricci.min(ricci_lower_bound(n, h2, m2));
        max_grad = max_grad.max(grad_mean[k].sqrt());
        excess = excess.max(h2 - (1.0 / (nf - 1.0) - eps_r) * m2);
    }
    let big_l = excess.max(0.0) * (1.0 + 1e-9) + 1e-12;
    let h_max = max_mean2.sqrt();
    let mean_radius = match &cfg.center {
        Some(c) => Some(mean_distance(state, c)?),
        None => None,
    };
    Ok(MonitorRecord {
        step: state.step,
        t: state.t,
        dt,
        max_h2,
        min_mean2,
        max_mean2,
        mean_ratio: if max_mean2 > 0.0 { min_mean2 / max_mean2 } else { 1.0 },
        max_u,
        max_f_sigma: max_f,
        max_scaled_traceless: max_scaled,
        min_ricci,
        diameter: diameter_estimate(&state.immersion),
        myers_bound: if h_max > 0.0 { Some(1.0 / (2.0 * eta * h_max)) } else { None },
        max_grad_mean: max_grad,
        hypothesis_pinching: max_mean2 > 2.0 * nf * big_l / eps_r,
        hypothesis_gradient: max_grad < 2.0 * eta * eta * max_mean2,
        residual: None,
        mean_radius,
        case: case.map(|c| c.tag),
    })
}

/// Largest deviation, over nodes with centred stencils, of the central time
/// difference of `|H|^2` from `Delta|H|^2 - 2|nabla H|^2 + 2n|H|^2 + 2R_2 + 6S_2`.
pub fn evolution_residual(prev: &FlowState, cur: &FlowState, next: &FlowState) -> Result<f64> {
    evolution_residual_scaled(prev, cur, next, 1.0)
}

/// [`evolution_residual`] with `R_2` multiplied by `r2_scale`.
pub fn evolution_residual_scaled(prev: &FlowState, cur: &FlowState, next: &FlowState, r2_scale: f64) -> Result<f64> {
    let dt0 = cur.t - prev.t;
    let dt1 = next.t - cur.t;
    if !(dt0 > 0.0) || (dt1 - dt0).abs() > 1e-12 * dt0 {
        return Err(Error::Domain(format!("residual needs equal positive steps, got {dt0:e} and {dt1:e}")));
    }
    if prev.immersion.len() != cur.immersion.len() || next.immersion.len() != cur.immersion.len() {
        return Err(Error::DimensionMismatch("states on different grids".into()));
    }
    let n = cur.immersion.dims().n as f64;
    let geo = &cur.geometry;
    let mean2: Vec<f64> = geo.local.iter().map(|l| l.mean2).collect();
    let lap = laplacian(&cur.immersion, &geo.local, &mean2)?;
    let means: Vec<CVec> = geo.local.iter().map(|l| l.mean.clone()).collect();
    let grad = normal_gradient_norm2(&cur.immersion, &geo.local, &means)?;
    let framed = frame_nodes(&cur.immersion, &geo.local)?;
    let mut worst = 0.0f64;
    for k in 0..cur.immersion.len() {
        if !geo.full_stencil[k] {
            continue;
        }
        let (frame, sff) = &framed[k];
        let rt = reaction_terms(sff, frame.structure())?;
        let rhs = lap[k] - 2.0 * grad[k] + 2.0 * n * mean2[k] + 2.0 * r2_scale * rt.r2 + 6.0 * rt.s2;
        let dtime = (next.geometry.local[k].mean2 - prev.geometry.local[k].mean2) / (2.0 * dt0);
        worst = worst.max((dtime - rhs).abs());
    }
    Ok(worst)
}
