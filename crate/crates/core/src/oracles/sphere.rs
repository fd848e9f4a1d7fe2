//! Radius of a distance sphere under mean curvature flow, from a table of
//! extracted mean curvatures and an adaptive Dormand-Prince integrator.

use rayon::prelude::*;
use serde::Serialize;

use super::richardson::{richardson, ObservedOrder};
use crate::ambient::{CVec, C64};
use crate::error::{Error, Result};
use crate::immersion::{build_sphere_patch, extract_mean_curvature};
use crate::tensor::frame::real_dot;

/// Radii and patch steps of a mean curvature table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableSpec {
    pub m: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Number of tabulated radii, at least 4.
    pub count: usize,
    /// Coarsest patch step; the finer levels use half and a quarter of it.
    pub step: f64,
}

impl TableSpec {
    pub fn new(m: usize) -> Self {
        Self { m, r_min: 0.08, r_max: std::f64::consts::FRAC_PI_2 - 0.08, count: 161, step: 0.04 }
    }
}

/// Mean curvature of a patch at its centre node: `|H|` and the radial
/// component `<H, d/dr>`, the normal speed of the sphere.
pub fn patch_mean_curvature(m: usize, r: f64, step: f64) -> Result<(f64, f64)> {
    let im = build_sphere_patch(m, r, step)?;
    let field = extract_mean_curvature(&im)?;
    let topo = im.topology();
    let centre = topo.flat_index(&vec![4; topo.dim()]);
    let z = im.nodes()[centre].coords();
    let (c, s) = (r.cos(), r.sin());
    let radial = CVec::from_iterator(
        z.len(),
        z.iter().enumerate().map(|(k, w)| if k == 0 { C64::new(-s, 0.0) } else { w * (c / s) }),
    );
    let h = &field.local[centre].mean;
    Ok((field.local[centre].mean2.sqrt(), real_dot(h, &radial)))
}

/// Tabulated, Richardson-extrapolated `|H|(r)` and radial speed `v(r)`, with
/// clamped cubic splines through both.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusTable {
    pub spec: TableSpec,
    pub radii: Vec<f64>,
    pub mean_norm: Vec<f64>,
    pub speed: Vec<f64>,
    pub mean_norm_order: Vec<ObservedOrder>,
    #[serde(skip)]
    mean_spline: Spline,
    #[serde(skip)]
    speed_spline: Spline,
}

impl RadiusTable {
    pub fn build(spec: TableSpec) -> Result<Self> {
        if spec.count < 4 || !(spec.r_min > 0.0 && spec.r_max < std::f64::consts::FRAC_PI_2 && spec.r_min < spec.r_max)
        {
            return Err(Error::Domain(format!("bad table range [{}, {}] x {}", spec.r_min, spec.r_max, spec.count)));
        }
        let h = (spec.r_max - spec.r_min) / (spec.count - 1) as f64;
        let radii: Vec<f64> = (0..spec.count).map(|k| spec.r_min + h * k as f64).collect();
        let rows = radii
            .par_iter()
            .map(|&r| {
                let a = patch_mean_curvature(spec.m, r, spec.step)?;
                let b = patch_mean_curvature(spec.m, r, spec.step / 2.0)?;
                let c = patch_mean_curvature(spec.m, r, spec.step / 4.0)?;
                Ok((richardson(a.0, b.0, c.0), richardson(a.1, b.1, c.1)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mean_norm: Vec<f64> = rows.iter().map(|r| r.0.value).collect();
        let speed: Vec<f64> = rows.iter().map(|r| r.1.value).collect();
        let mean_norm_order = rows.iter().map(|r| r.0.order).collect();
        // |H| has a kink where H changes direction; the signed value is smooth.
        let signed: Vec<f64> = mean_norm.iter().zip(&speed).map(|(m, v)| m.copysign(*v)).collect();
        Ok(Self {
            spec,
            mean_spline: Spline::new(spec.r_min, h, &signed),
            speed_spline: Spline::new(spec.r_min, h, &speed),
            radii,
            mean_norm,
            speed,
            mean_norm_order,
        })
    }

    fn check(&self, r: f64) -> Result<()> {
        if r >= self.spec.r_min && r <= self.spec.r_max {
            Ok(())
        } else {
            Err(Error::Domain(format!("radius {r} outside table [{}, {}]", self.spec.r_min, self.spec.r_max)))
        }
    }

    pub fn mean_norm_at(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.mean_spline.eval(r).abs())
    }

    /// `dr/dt` of the flowing sphere at radius `r`.
    pub fn speed_at(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.speed_spline.eval(r))
    }
}

/// Cubic spline on a uniform grid with end slopes from one-sided
/// fourth-order differences.
#[derive(Debug, Clone, Default)]
struct Spline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
}

impl Spline {
    fn new(x0: f64, h: f64, y: &[f64]) -> Self {
        let n = y.len();
        let d0 = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4.min(n - 1)]) / (12.0 * h);
        let dn = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n.saturating_sub(5)])
            / (12.0 * h);
        // Tridiagonal system for the second derivatives (Thomas algorithm).
        let mut diag = vec![4.0; n];
        let mut rhs = vec![0.0; n];
        diag[0] = 2.0;
        diag[n - 1] = 2.0;
        rhs[0] = 6.0 * ((y[1] - y[0]) / h - d0) / h;
        rhs[n - 1] = 6.0 * (dn - (y[n - 1] - y[n - 2]) / h) / h;
        for i in 1..n - 1 {
            rhs[i] = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
        }
        for i in 1..n {
            let w = 1.0 / diag[i - 1];
            diag[i] -= w;
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - m[i + 1]) / diag[i];
        }
        Self { x0, h, y: y.to_vec(), m }
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.y.len();
        let k = (((x - self.x0) / self.h).floor().max(0.0) as usize).min(n - 2);
        let a = self.x0 + self.h * (k + 1) as f64 - x;
        let b = x - self.x0 - self.h * k as f64;
        let h = self.h;
        (self.m[k] * a.powi(3) + self.m[k + 1] * b.powi(3)) / (6.0 * h)
            + (self.y[k] / h - self.m[k] * h / 6.0) * a
            + (self.y[k + 1] / h - self.m[k + 1] * h / 6.0) * b
    }
}

/// Radius trajectory sampled on the requested times.
#[derive(Debug, Clone, Serialize)]
pub struct RadiusTrajectory {
    /// Requested times reached before the radius left the range.
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    /// Time at which the radius reached `stop_radius`.
    pub extinction_time: Option<f64>,
    /// Time at which the radius left the table from above.
    pub exit_time: Option<f64>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Tolerances of the radius integrator.
pub const ODE_RTOL: f64 = 1e-10;
pub const ODE_ATOL: f64 = 1e-10;

// Dormand-Prince 5(4) tableau; the nodes are not needed for autonomous equations.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// One Dormand-Prince step of `dy/dt = f(y)`: fifth-order value and the
/// scaled error estimate. `Err` when a stage leaves the domain of `f`.
fn dp_step(f: &dyn Fn(f64) -> Result<f64>, y: f64, h: f64) -> Result<(f64, f64)> {
    let mut k = [0.0; 7];
    for s in 0..7 {
        let ys = y + h * (0..s).map(|j| A[s][j] * k[j]).sum::<f64>();
        k[s] = f(ys)?;
    }
    let y5 = y + h * (0..7).map(|s| B5[s] * k[s]).sum::<f64>();
    let y4 = y + h * (0..7).map(|s| B4[s] * k[s]).sum::<f64>();
    let err = (y5 - y4).abs() / (ODE_ATOL + ODE_RTOL * y.abs().max(y5.abs()));
    Ok((y5, err))
}

/// Integrates `dr/dt = v(r)` from `r0` and samples `r` at `t_grid`, stopping
/// when `r` falls to `stop_radius` or leaves the table.
pub fn sphere_radius_reference(table: &RadiusTable, r0: f64, t_grid: &[f64], stop_radius: f64) -> Result<RadiusTrajectory> {
    if !(r0 > 0.1 && r0 < std::f64::consts::FRAC_PI_2 - 0.1) {
        return Err(Error::Domain(format!("initial radius {r0} outside (0.1, pi/2 - 0.1)")));
    }
    if !(stop_radius >= table.spec.r_min && stop_radius < r0) {
        return Err(Error::Domain(format!("stop radius {stop_radius} must lie in [{}, {r0})", table.spec.r_min)));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) || t_grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Domain("time grid must be nonnegative and increasing".into()));
    }
    let upper = table.spec.r_max;
    let f = |r: f64| table.speed_at(r);
    let inside = |r: f64| r > stop_radius && r < upper;
    let mut out = RadiusTrajectory {
        t: Vec::new(),
        r: Vec::new(),
        extinction_time: None,
        exit_time: None,
        accepted_steps: 0,
        rejected_steps: 0,
    };
    let (mut t, mut r) = (0.0, r0);
    let mut h = 1e-4 * (1.0 / f(r0)?.abs().max(1.0));
    for &target in t_grid {
        while t < target {
            let hh = h.min(target - t);
            let trial = dp_step(&f, r, hh);
            let (next, err) = match trial {
                Ok(v) => v,
                Err(_) => (f64::NAN, f64::INFINITY),
            };
            if err <= 1.0 && inside(next) {
                t = if hh == target - t { target } else { t + hh };
                r = next;
                out.accepted_steps += 1;
                h = hh * (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
            } else if err <= 1.0 || (err.is_infinite() && hh < 1e-12) {
                // The step leaves the range: locate the crossing by bisection.
                let (mut lo, mut hi) = (0.0, hh);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    match dp_step(&f, r, mid) {
                        Ok((v, _)) if inside(v) => lo = mid,
                        _ => hi = mid,
                    }
                    if hi - lo <= 1e-15 * (t + hh) {
                        break;
                    }
                }
                let crossing = t + 0.5 * (lo + hi);
                if dp_step(&f, r, hi).is_ok_and(|(v, _)| v >= upper) {
                    out.exit_time = Some(crossing);
                } else {
                    out.extinction_time = Some(crossing);
                }
                return Ok(out);
            } else {
                out.rejected_steps += 1;
                h = hh * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
        out.t.push(target);
        out.r.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn table() -> RadiusTable {
        RadiusTable::build(TableSpec { count: 41, ..TableSpec::new(2) }).unwrap()
    }

    #[test]
    fn spline_reproduces_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.3 * x.powi(3);
        let y: Vec<f64> = (0..12).map(|k| f(0.1 * k as f64)).collect();
        let s = Spline::new(0.0, 0.1, &y);
        for x in [0.0, 0.033, 0.5, 0.777, 1.1] {
            assert!((s.eval(x) - f(x)).abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn integrator_matches_exponential_decay() {
        let f = |y: f64| Ok(-2.0 * y);
        let (mut y, mut t, h) = (1.0, 0.0, 0.01);
        while t < 1.0 - 1e-12 {
            y = dp_step(&f, y, h).unwrap().0;
            t += h;
        }
        assert!((y - (-2.0f64).exp()).abs() < 1e-11);
    }

    #[test]
    fn interpolation_matches_direct_extrapolation() {
        let t = RadiusTable::build(TableSpec::new(2)).unwrap();
        // 1.03 and 1.05 sit on either side of the radius where H changes direction.
        for r in [0.3, 0.71, 1.0, 1.03, 1.05, 1.3] {
            let s = t.spec.step;
            let v: Vec<f64> = [s, s / 2.0, s / 4.0].iter().map(|&h| patch_mean_curvature(2, r, h).unwrap().0).collect();
            let direct = richardson(v[0], v[1], v[2]).value;
            let table = t.mean_norm_at(r).unwrap();
            assert!((table - direct).abs() <= 1e-7 * (1.0 + direct), "{r}: {table} vs {direct}");
        }
    }

    #[test]
    fn symmetric_radius_has_mean_curvature_two() {
        let (norm, speed) = patch_mean_curvature(2, FRAC_PI_4, 0.01).unwrap();
        assert!((norm - 2.0).abs() < 1e-3, "{norm}");
        assert!(speed < 0.0);
        let t = table();
        assert!((t.mean_norm_at(FRAC_PI_4).unwrap() - 2.0).abs() < 1e-3);
    }

    #[test]
    fn small_spheres_shrink_and_trajectory_ignores_grid() {
        let t = table();
        for &r in t.radii.iter().filter(|&&r| r < 1.0) {
            assert!(t.speed_at(r).unwrap() < 0.0);
        }
        let coarse: Vec<f64> = (1..=10).map(|k| 0.005 * k as f64).collect();
        let fine: Vec<f64> = (1..=100).map(|k| 0.0005 * k as f64).collect();
        let a = sphere_radius_reference(&t, 0.6, &coarse, 0.25).unwrap();
        let b = sphere_radius_reference(&t, 0.6, &fine, 0.25).unwrap();
        for (k, r) in a.r.iter().enumerate() {
            assert!((r - b.r[10 * k + 9]).abs() <= 1e-8, "{r} {}", b.r[10 * k + 9]);
        }
        assert!(a.r.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn extinction_time_is_located() {
        let t = table();
        let grid: Vec<f64> = (1..=400).map(|k| 0.001 * k as f64).collect();
        let traj = sphere_radius_reference(&t, 0.6, &grid, 0.25).unwrap();
        let te = traj.extinction_time.expect("reaches the stop radius");
        assert!(traj.t.last().unwrap() <= &te);
        assert!(*traj.r.last().unwrap() > 0.25);
        assert!(sphere_radius_reference(&t, 0.05, &grid, 0.25).is_err());
    }
}
