use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::geometry::{flat_coords, local_from_lifts};
use super::grid::{Axis, GridTopology, TopologyKind};
use super::DiscreteImmersion;
use crate::ambient::{horizontal_part, retract, CVec, Dimensions, Tangent, C64};
use crate::error::{Error, Result};

/// Width of the excluded band around each chart pole, in grid steps.
pub const POLE_STEPS: usize = 4;

/// Largest perturbation amplitude, a tenth of the injectivity radius `pi/2`.
pub const MAX_PERTURBATION: f64 = 0.1 * FRAC_PI_2;

/// Step of a clamped angle axis of `count` nodes on `[0, range]` with
/// `POLE_STEPS` steps removed at both ends.
fn pole_free_axis(count: usize, range: f64) -> Axis {
    let step = range / (count + 2 * POLE_STEPS - 1) as f64;
    Axis::clamped(count, POLE_STEPS as f64 * step, range - POLE_STEPS as f64 * step)
}

/// Point `(mu_1 e^{i xi_1}, ..., mu_k e^{i xi_k})` of the unit sphere in `C^k`,
/// where `mu` lies on the positive orthant of `S^{k-1}` in hyperspherical angles `eta`.
fn torus_fibred(eta: &[f64], xi: &[f64]) -> Vec<C64> {
    let k = eta.len() + 1;
    let mut mu = vec![1.0; k];
    let mut s = 1.0;
    for (j, &e) in eta.iter().enumerate() {
        mu[j] = s * e.cos();
        s *= e.sin();
    }
    mu[k - 1] = s;
    mu.iter()
        .zip(xi)
        .map(|(&r, &t)| C64::from_polar(r, t))
        .collect()
}

/// Distance sphere of radius `r` about `[1 : 0 : ... : 0]` in `CP^m`.
///
/// Chart coordinates are `m - 1` clamped angles followed by `m` periodic phases.
pub fn sphere_chart(m: usize, r: f64, u: &[f64]) -> CVec {
    let w = torus_fibred(&u[..m - 1], &u[m - 1..]);
    let mut z = Vec::with_capacity(m + 1);
    z.push(C64::new(r.cos(), 0.0));
    z.extend(w.into_iter().map(|c| c * r.sin()));
    CVec::from_vec(z)
}

/// Distance sphere of radius `r` on a `resolution^(2m-1)` grid.
///
/// `r` must stay more than `POLE_STEPS` chart steps away from `0` and `pi/2`.
pub fn build_geodesic_sphere(m: usize, r: f64, resolution: usize) -> Result<DiscreteImmersion> {
    let dims = Dimensions::new(m, 2 * m - 1)?;
    let mut axes: Vec<Axis> = (0..m - 1).map(|_| pole_free_axis(resolution, FRAC_PI_2)).collect();
    axes.extend((0..m).map(|_| Axis::periodic(resolution, 0.0, 2.0 * PI)));
    let step = if m > 1 { axes[0].spacing } else { 2.0 * PI / resolution as f64 };
    let guard = POLE_STEPS as f64 * step;
    if !(r > 0.0 && r < FRAC_PI_2) || r.min(FRAC_PI_2 - r) <= guard {
        return Err(Error::Domain(format!(
            "radius {r} must stay {guard:.3} away from 0 and pi/2 at resolution {resolution}"
        )));
    }
    let topo = GridTopology::new(TopologyKind::ProductAngles, axes)?;
    DiscreteImmersion::from_chart(topo, dims, |u| sphere_chart(m, r, u))
}

/// A `9^(2m-1)` patch of the distance sphere of radius `r` centred at
/// `eta = pi/4`, `xi = 0`, with every axis clamped and chart step `step`.
pub fn build_sphere_patch(m: usize, r: f64, step: f64) -> Result<DiscreteImmersion> {
    let dims = Dimensions::new(m, 2 * m - 1)?;
    if !(r > 0.0 && r < FRAC_PI_2) {
        return Err(Error::Domain(format!("radius {r} outside (0, pi/2)")));
    }
    if !(step > 0.0 && step < 0.05) {
        return Err(Error::Domain(format!("patch step {step} outside (0, 0.05)")));
    }
    let half = 4.0 * step;
    let mut axes: Vec<Axis> = (0..m - 1).map(|_| Axis::clamped(9, FRAC_PI_4 - half, FRAC_PI_4 + half)).collect();
    axes.extend((0..m).map(|_| Axis::clamped(9, -half, half)));
    let topo = GridTopology::new(TopologyKind::ProductAngles, axes)?;
    DiscreteImmersion::from_chart(topo, dims, |u| sphere_chart(m, r, u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TotallyGeodesicKind {
    /// Real projective space `RP^n`, the real points of `CP^m`.
    #[serde(rename = "RP_n")]
    RealProjective,
    /// Linear subspace `CP^{n/2}`.
    #[serde(rename = "CP_half_n")]
    ComplexProjective,
}

/// Totally real `RP^n` or complex `CP^{n/2}` inside `CP^m` on a `resolution^n` grid.
pub fn build_totally_geodesic(
    kind: TotallyGeodesicKind,
    dims: Dimensions,
    resolution: usize,
) -> Result<DiscreteImmersion> {
    let (n, m) = (dims.n, dims.m);
    match kind {
        TotallyGeodesicKind::RealProjective => {
            if n > m {
                return Err(Error::InvalidDimensions(format!("RP^{n} does not fit in CP^{m}")));
            }
            let mut axes: Vec<Axis> = (0..n - 1).map(|_| pole_free_axis(resolution, PI)).collect();
            axes.push(Axis::periodic(resolution, 0.0, 2.0 * PI));
            let topo = GridTopology::new(TopologyKind::ProductAngles, axes)?;
            DiscreteImmersion::from_chart(topo, dims, |u| {
                let mut z = vec![C64::new(0.0, 0.0); m + 1];
                let mut s = 1.0;
                for (j, &t) in u.iter().enumerate() {
                    z[j] = C64::new(s * t.cos(), 0.0);
                    s *= t.sin();
                }
                z[n] = C64::new(s, 0.0);
                CVec::from_vec(z)
            })
        }
        TotallyGeodesicKind::ComplexProjective => {
            if n % 2 != 0 {
                return Err(Error::InvalidDimensions(format!("CP^(n/2) needs even n, got {n}")));
            }
            let k = n / 2;
            if k >= m {
                return Err(Error::InvalidDimensions(format!("CP^{k} is not a proper subspace of CP^{m}")));
            }
            let mut axes: Vec<Axis> = (0..k).map(|_| pole_free_axis(resolution, FRAC_PI_2)).collect();
            axes.extend((0..k).map(|_| Axis::periodic(resolution, 0.0, 2.0 * PI)));
            let topo = GridTopology::new(TopologyKind::ProductAngles, axes)?;
            DiscreteImmersion::from_chart(topo, dims, |u| {
                let mut xi = vec![0.0];
                xi.extend_from_slice(&u[k..]);
                let mut z = torus_fibred(&u[..k], &xi);
                z.resize(m + 1, C64::new(0.0, 0.0));
                CVec::from_vec(z)
            })
        }
    }
}

/// Clifford torus `|z_0| = ... = |z_m|` in `CP^m` on a periodic `resolution^m` lattice.
pub fn build_clifford_torus(m: usize, resolution: usize) -> Result<DiscreteImmersion> {
    if m < 2 {
        return Err(Error::InvalidDimensions(format!("Clifford torus needs m >= 2, got {m}")));
    }
    let dims = Dimensions::new(m, m)?;
    let axes = (0..m).map(|_| Axis::periodic(resolution, 0.0, 2.0 * PI)).collect();
    let topo = GridTopology::new(TopologyKind::TorusLattice, axes)?;
    DiscreteImmersion::from_chart(topo, dims, |u| {
        let mut z = vec![C64::new(1.0, 0.0)];
        z.extend(u.iter().map(|&t| C64::from_polar(1.0, t)));
        CVec::from_vec(z)
    })
}

/// Low-frequency normal perturbation field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    /// Largest wavenumber per axis of the scalar profile.
    pub max_wavenumber: u32,
    /// Number of cosine terms in the scalar profile.
    pub terms: usize,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self { max_wavenumber: 1, terms: 3 }
    }
}

/// Moves every node by at most `amplitude` along a smooth normal field.
///
/// The field is the normal part of `z -> A z` for a random complex matrix `A`,
/// times a random trigonometric profile in the chart coordinates, scaled so its
/// largest value is one. The same seed gives the same output.
pub fn perturb(
    im: &DiscreteImmersion,
    amplitude: f64,
    spec: &PerturbationSpec,
    seed: u64,
) -> Result<DiscreteImmersion> {
    if !(0.0..=MAX_PERTURBATION).contains(&amplitude) {
        return Err(Error::Domain(format!(
            "amplitude {amplitude} outside [0, {MAX_PERTURBATION:.4}]"
        )));
    }
    if spec.terms == 0 {
        return Err(Error::Config("perturbation needs at least one term".into()));
    }
    if amplitude == 0.0 {
        return Ok(im.clone());
    }
    let topo = im.topology();
    let size = im.dims().m + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<C64> = (0..size * size)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let kmax = spec.max_wavenumber as i64;
    let terms: Vec<(f64, Vec<f64>, f64)> = (0..spec.terms)
        .map(|_| {
            let amp = rng.gen_range(0.5..1.0);
            let waves = (0..topo.dim()).map(|_| rng.gen_range(-kmax..=kmax) as f64).collect();
            let phase = rng.gen_range(0.0..2.0 * PI);
            (amp, waves, phase)
        })
        .collect();
    let local = local_from_lifts(im, &flat_coords(im))?;
    let mut fields = Vec::with_capacity(im.len());
    for (k, (p, geo)) in im.nodes().iter().zip(&local).enumerate() {
        let z = p.coords();
        let az = CVec::from_fn(size, |i, _| (0..size).map(|j| a[i * size + j] * z[j]).sum());
        let mut v = horizontal_part(z, &az);
        let n = topo.dim();
        let proj: Vec<f64> = geo.tangents.iter().map(|t| crate::tensor::frame::real_dot(&v, t)).collect();
        for c in 0..n {
            let coef: f64 = (0..n).map(|d| geo.metric_inv[(c, d)] * proj[d]).sum();
            v -= &geo.tangents[c] * C64::new(coef, 0.0);
        }
        let idx = topo.multi_index(k);
        let angles: Vec<f64> = idx
            .iter()
            .zip(&topo.axes)
            .map(|(&i, ax)| {
                if ax.periodic {
                    2.0 * PI * i as f64 / ax.count as f64
                } else {
                    PI * i as f64 / (ax.count - 1) as f64
                }
            })
            .collect();
        let profile: f64 = terms
            .iter()
            .map(|(amp, waves, phase)| {
                amp * (waves.iter().zip(&angles).map(|(w, t)| w * t).sum::<f64>() + phase).cos()
            })
            .sum();
        fields.push(v * C64::new(profile, 0.0));
    }
    let largest = fields.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(largest > 0.0) {
        return Err(Error::DegenerateImmersion("perturbation field vanishes".into()));
    }
    let nodes = im
        .nodes()
        .iter()
        .zip(fields)
        .map(|(p, v)| retract(p, &Tangent::from_horizontal_unchecked(v), amplitude / largest))
        .collect::<Result<Vec<_>>>()?;
    let out = im.with_nodes(nodes).map_err(|e| {
        Error::DegenerateImmersion(format!("perturbation of amplitude {amplitude} rejected: {e}"))
    })?;
    local_from_lifts(&out, &flat_coords(&out)).map_err(|e| {
        Error::DegenerateImmersion(format!("perturbation of amplitude {amplitude} rejected: {e}"))
    })?;
    Ok(out)
}
