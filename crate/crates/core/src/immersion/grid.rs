use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest node count accepted per axis.
pub const MIN_AXIS_NODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TopologyKind {
    /// Angle coordinates, each periodic or clamped to a closed interval.
    ProductAngles,
    /// All axes periodic.
    TorusLattice,
}

/// One chart coordinate sampled at `start + i * spacing`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub count: usize,
    pub periodic: bool,
    pub start: f64,
    pub spacing: f64,
}

impl Axis {
    /// `count` nodes covering a full period `[start, start + period)`.
    pub fn periodic(count: usize, start: f64, period: f64) -> Self {
        Self { count, periodic: true, start, spacing: period / count as f64 }
    }

    /// `count` nodes on the closed interval `[lo, hi]`.
    pub fn clamped(count: usize, lo: f64, hi: f64) -> Self {
        Self { count, periodic: false, start: lo, spacing: (hi - lo) / (count as f64 - 1.0) }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.start + i as f64 * self.spacing
    }
}

/// Structured grid; nodes are stored row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTopology {
    pub kind: TopologyKind,
    pub axes: Vec<Axis>,
}

impl GridTopology {
    pub fn new(kind: TopologyKind, axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::UnsupportedTopology("grid without axes".into()));
        }
        for (a, axis) in axes.iter().enumerate() {
            if axis.count < MIN_AXIS_NODES {
                return Err(Error::UnsupportedTopology(format!(
                    "axis {a} has {} nodes, need at least {MIN_AXIS_NODES}",
                    axis.count
                )));
            }
            if !(axis.spacing > 0.0) || !axis.spacing.is_finite() || !axis.start.is_finite() {
                return Err(Error::UnsupportedTopology(format!(
                    "axis {a} has spacing {}",
                    axis.spacing
                )));
            }
        }
        if kind == TopologyKind::TorusLattice && axes.iter().any(|a| !a.periodic) {
            return Err(Error::UnsupportedTopology("torus lattice with a clamped axis".into()));
        }
        Ok(Self { kind, axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.axes[a + 1].count;
        }
        s
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.axes[a].count;
            flat /= self.axes[a].count;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(self.strides()).map(|(i, s)| i * s).sum()
    }

    pub fn coords(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.axes).map(|(&i, a)| a.coord(i)).collect()
    }

    /// Index reached from `i` by `offset` steps along `axis`, or `None` past a clamped end.
    pub fn shift(&self, axis: usize, i: usize, offset: isize) -> Option<usize> {
        let ax = &self.axes[axis];
        let count = ax.count as isize;
        let j = i as isize + offset;
        if ax.periodic {
            Some(j.rem_euclid(count) as usize)
        } else if (0..count).contains(&j) {
            Some(j as usize)
        } else {
            None
        }
    }

    /// Whether every axis has a centered five-point stencil at `idx`.
    pub fn is_full_stencil(&self, idx: &[usize]) -> bool {
        idx.iter()
            .zip(&self.axes)
            .all(|(&i, a)| a.periodic || (i >= 2 && i + 2 < a.count))
    }

    /// Nearest node with a full stencil, moving only along clamped axes.
    pub fn nearest_full_stencil(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter()
            .zip(&self.axes)
            .map(|(&i, a)| if a.periodic { i } else { i.clamp(2, a.count - 3) })
            .collect()
    }

    /// Grid neighbours differing by at most one step on every axis, each
    /// listed once, in a fixed order.
    pub fn neighbours(&self, idx: &[usize]) -> Vec<usize> {
        let d = self.dim();
        let mut out = Vec::with_capacity(3usize.pow(d as u32) - 1);
        let mut offsets = vec![-1isize; d];
        loop {
            if offsets.iter().any(|&o| o != 0) {
                let mut target = Vec::with_capacity(d);
                let mut ok = true;
                for a in 0..d {
                    match self.shift(a, idx[a], offsets[a]) {
                        Some(j) => target.push(j),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    let flat = self.flat_index(&target);
                    if flat != self.flat_index(idx) && !out.contains(&flat) {
                        out.push(flat);
                    }
                }
            }
            let mut a = 0;
            loop {
                if a == d {
                    return out;
                }
                offsets[a] += 1;
                if offsets[a] <= 1 {
                    break;
                }
                offsets[a] = -1;
                a += 1;
            }
        }
    }

    /// Finite-difference stencil along `axis` at position `i`.
    pub fn stencil(&self, axis: usize, i: usize) -> AxisStencil {
        let ax = &self.axes[axis];
        let offsets: Vec<isize> = if ax.periodic || (i >= 2 && i + 2 < ax.count) {
            (-2..=2).collect()
        } else {
            let start = (i as isize - 2).clamp(0, ax.count as isize - 6);
            (start..start + 6).map(|j| j - i as isize).collect()
        };
        let xs: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
        let w = fornberg_weights(0.0, &xs, 2);
        let h = ax.spacing;
        AxisStencil {
            d1: w[1].iter().map(|c| c / h).collect(),
            d2: w[2].iter().map(|c| c / (h * h)).collect(),
            offsets,
        }
    }
}

/// Offsets along one axis with first- and second-derivative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisStencil {
    pub offsets: Vec<isize>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

/// Weights `w[k][j]` such that `f^(k)(x0) ~ sum_j w[k][j] f(xs[j])` for `k <= max_order`
/// (Fornberg's recursion).
pub fn fornberg_weights(x0: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let npts = xs.len();
    let mut c = vec![vec![0.0; npts]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..npts {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn central_weights() {
        let w = fornberg_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for j in 0..5 {
            assert_relative_eq!(w[1][j], d1[j], epsilon = 1e-14);
            assert_relative_eq!(w[2][j], d2[j], epsilon = 1e-14);
        }
    }

    #[test]
    fn one_sided_weights_are_exact_on_polynomials() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let w = fornberg_weights(0.0, &xs, 2);
        for p in 0..5 {
            let d1: f64 = xs.iter().zip(&w[1]).map(|(x, c)| c * x.powi(p)).sum();
            let d2: f64 = xs.iter().zip(&w[2]).map(|(x, c)| c * x.powi(p)).sum();
            assert_relative_eq!(d1, if p == 1 { 1.0 } else { 0.0 }, epsilon = 1e-11);
            assert_relative_eq!(d2, if p == 2 { 2.0 } else { 0.0 }, epsilon = 1e-11);
        }
    }

    #[test]
    fn indexing_round_trip_and_neighbours() {
        let g = GridTopology::new(
            TopologyKind::ProductAngles,
            vec![Axis::clamped(8, 0.0, 1.0), Axis::periodic(9, 0.0, 1.0), Axis::periodic(10, 0.0, 1.0)],
        )
        .unwrap();
        for flat in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        assert_eq!(g.neighbours(&[3, 4, 5]).len(), 26);
        assert_eq!(g.neighbours(&[0, 4, 5]).len(), 17);
        assert!(!g.is_full_stencil(&[1, 0, 0]));
        assert_eq!(g.nearest_full_stencil(&[7, 0, 9]), vec![5, 0, 9]);
        let s = g.stencil(0, 0);
        assert_eq!(s.offsets, vec![0, 1, 2, 3, 4, 5]);
        let s = g.stencil(0, 7);
        assert_eq!(s.offsets, vec![-5, -4, -3, -2, -1, 0]);
    }

    #[test]
    fn rejects_small_axes() {
        assert!(GridTopology::new(TopologyKind::TorusLattice, vec![Axis::periodic(4, 0.0, 1.0)]).is_err());
        assert!(GridTopology::new(TopologyKind::TorusLattice, vec![Axis::clamped(9, 0.0, 1.0)]).is_err());
    }
}
