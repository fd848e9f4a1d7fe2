//! Discretized immersed submanifolds of `CP^m` on structured grids and
//! finite-difference extraction of their extrinsic geometry.

pub mod builders;
pub mod geometry;
pub mod grid;
pub mod snapshot;

pub use builders::{
    build_clifford_torus, build_geodesic_sphere, build_sphere_patch, build_totally_geodesic, perturb,
    sphere_chart, PerturbationSpec, TotallyGeodesicKind,
};
pub use geometry::{
    extract_geometry, extract_mean_curvature, frame_nodes, laplacian, mean_curvature_norms, normal_gradient_norm2, GeometryField,
    LocalGeometry, MeanCurvatureField, NodeGeometry,
};
pub use grid::{Axis, AxisStencil, GridTopology, TopologyKind};

use crate::ambient::{distance_unchecked, normalize_point, CVec, CpPoint, Dimensions};
use crate::error::{Error, Result};
use crate::tolerances;

/// Nodes of an immersion `M^n -> CP^m` sampled on a structured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteImmersion {
    topology: GridTopology,
    dims: Dimensions,
    nodes: Vec<CpPoint>,
}

impl DiscreteImmersion {
    /// Checks the node count, the ambient dimension of every node and that
    /// adjacent nodes stay within the resolution limit.
    pub fn new(topology: GridTopology, dims: Dimensions, nodes: Vec<CpPoint>) -> Result<Self> {
        if topology.dim() != dims.n {
            return Err(Error::DimensionMismatch(format!(
                "{}-dimensional grid for n = {}",
                topology.dim(),
                dims.n
            )));
        }
        if nodes.len() != topology.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} nodes on a grid of {} points",
                nodes.len(),
                topology.len()
            )));
        }
        if let Some(k) = nodes.iter().position(|p| p.m() != dims.m) {
            return Err(Error::DimensionMismatch(format!("node {k} lies in CP^{}", nodes[k].m())));
        }
        let im = Self { topology, dims, nodes };
        let (worst, at) = im.max_adjacent_distance();
        if worst > tolerances::ADJACENT_DISTANCE {
            return Err(Error::DegenerateImmersion(format!(
                "adjacent nodes at distance {worst:.3} near node {at}"
            )));
        }
        Ok(im)
    }

    /// Samples `chart` at every grid node.
    pub fn from_chart(
        topology: GridTopology,
        dims: Dimensions,
        chart: impl Fn(&[f64]) -> CVec,
    ) -> Result<Self> {
        let nodes = (0..topology.len())
            .map(|k| normalize_point(chart(&topology.coords(&topology.multi_index(k)))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(topology, dims, nodes)
    }

    pub fn topology(&self) -> &GridTopology {
        &self.topology
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn nodes(&self) -> &[CpPoint] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Replaces the nodes, re-running the validity checks.
    pub fn with_nodes(&self, nodes: Vec<CpPoint>) -> Result<Self> {
        Self::new(self.topology.clone(), self.dims, nodes)
    }

    /// Largest distance between nodes one step apart along an axis, and where.
    pub fn max_adjacent_distance(&self) -> (f64, usize) {
        let mut worst = 0.0;
        let mut at = 0;
        for k in 0..self.nodes.len() {
            let idx = self.topology.multi_index(k);
            for a in 0..self.topology.dim() {
                if let Some(j) = self.topology.shift(a, idx[a], 1) {
                    let mut nb = idx.clone();
                    nb[a] = j;
                    let d = distance_unchecked(
                        self.nodes[k].coords(),
                        self.nodes[self.topology.flat_index(&nb)].coords(),
                    );
                    if d > worst {
                        worst = d;
                        at = k;
                    }
                }
            }
        }
        (worst, at)
    }

    /// Smallest distance between nodes one step apart along an axis.
    pub fn min_adjacent_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for k in 0..self.nodes.len() {
            let idx = self.topology.multi_index(k);
            for a in 0..self.topology.dim() {
                if let Some(j) = self.topology.shift(a, idx[a], 1) {
                    let mut nb = idx.clone();
                    nb[a] = j;
                    let d = distance_unchecked(
                        self.nodes[k].coords(),
                        self.nodes[self.topology.flat_index(&nb)].coords(),
                    );
                    best = best.min(d);
                }
            }
        }
        best
    }
}
