use nalgebra::DMatrix;
use rayon::prelude::*;

use super::grid::{AxisStencil, GridTopology};
use super::DiscreteImmersion;
use crate::ambient::{CVec, Tangent, C64};
use crate::error::{Error, Result};
use crate::tensor::frame::real_dot;
use crate::tensor::{build_adapted_frame, sff_invariants, AdaptedFrame, GradientSff, Sff, SffInvariants};
use crate::tolerances;

/// Stencils for every axis and position.
pub(crate) struct Stencils {
    per_axis: Vec<Vec<AxisStencil>>,
}

impl Stencils {
    pub(crate) fn new(topo: &GridTopology) -> Self {
        let per_axis = (0..topo.dim())
            .map(|a| (0..topo.axes[a].count).map(|i| topo.stencil(a, i)).collect())
            .collect();
        Self { per_axis }
    }

    pub(crate) fn get(&self, axis: usize, i: usize) -> &AxisStencil {
        &self.per_axis[axis][i]
    }
}

/// Phase that rotates `z` so that `<z, base>` is real and positive.
#[inline]
fn alignment(z: &[C64], base: &[C64]) -> C64 {
    let mut p = C64::new(0.0, 0.0);
    for (a, b) in z.iter().zip(base) {
        p += a * b.conj();
    }
    let norm2 = p.re * p.re + p.im * p.im;
    if norm2 > 0.0 {
        p.conj() / norm2.sqrt()
    } else {
        C64::new(1.0, 0.0)
    }
}

#[inline]
fn hdot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

#[inline]
fn rdot(u: &[C64], v: &[C64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

fn horizontal(v: &mut [C64], z: &[C64]) {
    let c = hdot(v, z);
    v.iter_mut().zip(z).for_each(|(x, y)| *x -= c * y);
}

#[inline]
fn axpy(target: &mut [C64], w: C64, x: &[C64]) {
    target.iter_mut().zip(x).for_each(|(t, v)| *t += w * v);
}

fn node_slice(coords: &[C64], len: usize, k: usize) -> &[C64] {
    &coords[k * len..(k + 1) * len]
}

/// First and second chart derivatives of the phase-aligned lift at a node,
/// stored as `d1[a * len..]` and `d2[(a * n + b) * len..]`.
struct Jet {
    d1: Vec<C64>,
    d2: Vec<C64>,
}

fn jet(topo: &GridTopology, st: &Stencils, coords: &[C64], len: usize, c: usize) -> Jet {
    let n = topo.dim();
    let idx = topo.multi_index(c);
    let strides = topo.strides();
    let y0 = node_slice(coords, len, c);
    let zero = C64::new(0.0, 0.0);
    let mut d1 = vec![zero; n * len];
    let mut d2 = vec![zero; n * n * len];
    // (flat offset, first-derivative weight, second-derivative weight) per axis
    let deltas: Vec<Vec<(isize, f64, f64)>> = (0..n)
        .map(|a| {
            let s = st.get(a, idx[a]);
            s.offsets
                .iter()
                .enumerate()
                .map(|(j, &off)| {
                    let to = topo.shift(a, idx[a], off).expect("stencil stays on the grid");
                    ((to as isize - idx[a] as isize) * strides[a] as isize, s.d1[j], s.d2[j])
                })
                .collect()
        })
        .collect();
    let at = |delta: isize| node_slice(coords, len, (c as isize + delta) as usize);
    for a in 0..n {
        for &(da, w1, w2) in &deltas[a] {
            let z = at(da);
            let ph = alignment(z, y0);
            if w1 != 0.0 {
                axpy(&mut d1[a * len..(a + 1) * len], ph * w1, z);
            }
            if w2 != 0.0 {
                let ab = a * n + a;
                axpy(&mut d2[ab * len..(ab + 1) * len], ph * w2, z);
            }
        }
        for b in a + 1..n {
            let ab = a * n + b;
            for &(da, wa, _) in &deltas[a] {
                if wa == 0.0 {
                    continue;
                }
                for &(db, wb, _) in &deltas[b] {
                    if wb == 0.0 {
                        continue;
                    }
                    let z = at(da + db);
                    axpy(&mut d2[ab * len..(ab + 1) * len], alignment(z, y0) * (wa * wb), z);
                }
            }
            let ba = b * n + a;
            d2.copy_within(ab * len..(ab + 1) * len, ba * len);
        }
    }
    Jet { d1, d2 }
}

/// Pointwise geometry computed directly from chart derivatives, without frames.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    /// Horizontal lifts of the coordinate vectors `d/du_a`.
    pub tangents: Vec<CVec>,
    /// Induced metric `g_ab`.
    pub metric: DMatrix<f64>,
    pub metric_inv: DMatrix<f64>,
    christoffel: Vec<f64>,
    normal_second: Vec<C64>,
    /// Lift of the mean curvature vector.
    pub mean: CVec,
    pub mean2: f64,
    pub norm_h2: f64,
}

impl LocalGeometry {
    fn dim(&self) -> usize {
        self.tangents.len()
    }

    /// Christoffel symbol `Gamma^c_ab` of the induced metric in chart coordinates.
    pub fn christoffel(&self, c: usize, a: usize, b: usize) -> f64 {
        let n = self.dim();
        self.christoffel[(c * n + a) * n + b]
    }

    /// Lift of `h(d/du_a, d/du_b)`.
    pub fn normal_second(&self, a: usize, b: usize) -> &[C64] {
        let n = self.dim();
        let len = self.mean.len();
        let ab = a * n + b;
        &self.normal_second[ab * len..(ab + 1) * len]
    }
}

fn local_geometry(
    topo: &GridTopology,
    st: &Stencils,
    coords: &[C64],
    len: usize,
    c: usize,
) -> Result<LocalGeometry> {
    let n = topo.dim();
    let y0 = node_slice(coords, len, c);
    let Jet { mut d1, mut d2 } = jet(topo, st, coords, len, c);
    d1.chunks_mut(len).for_each(|v| horizontal(v, y0));
    d2.chunks_mut(len).for_each(|v| horizontal(v, y0));
    let t = |a: usize| &d1[a * len..(a + 1) * len];
    let metric = DMatrix::from_fn(n, n, |a, b| rdot(t(a), t(b)));
    let degenerate = |sigma: f64| {
        Error::DegenerateImmersion(format!("differential has singular value {sigma:e} at node {c}"))
    };
    let metric_inv = match metric.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => return Err(degenerate(metric.symmetric_eigenvalues().min().max(0.0).sqrt())),
    };
    // 1 / trace(g^-1) bounds the smallest eigenvalue of g from below.
    if !(1.0 / metric_inv.trace() > tolerances::IMMERSION_RANK.powi(2)) {
        let sigma = metric.symmetric_eigenvalues().min().max(0.0).sqrt();
        if !(sigma > tolerances::IMMERSION_RANK) {
            return Err(degenerate(sigma));
        }
    }
    let mut christoffel = vec![0.0; n * n * n];
    let mut normal = d2;
    let mut tang = vec![0.0; n];
    for a in 0..n {
        for b in a..n {
            let ab = a * n + b;
            let v = &mut normal[ab * len..(ab + 1) * len];
            for (d, x) in tang.iter_mut().enumerate() {
                *x = rdot(v, &d1[d * len..(d + 1) * len]);
            }
            for cc in 0..n {
                let gamma: f64 = (0..n).map(|d| metric_inv[(cc, d)] * tang[d]).sum();
                christoffel[(cc * n + a) * n + b] = gamma;
                christoffel[(cc * n + b) * n + a] = gamma;
                axpy(v, C64::new(-gamma, 0.0), &d1[cc * len..(cc + 1) * len]);
            }
            if a != b {
                normal.copy_within(ab * len..(ab + 1) * len, (b * n + a) * len);
            }
        }
    }
    let nrm = |ab: usize| &normal[ab * len..(ab + 1) * len];
    let zero = C64::new(0.0, 0.0);
    let mut mean = vec![zero; len];
    // raised[a][b] = sum_c g^ac h_cb
    let mut raised = vec![zero; n * n * len];
    for a in 0..n {
        for b in 0..n {
            let out = &mut raised[(a * n + b) * len..(a * n + b + 1) * len];
            for cc in 0..n {
                axpy(out, C64::new(metric_inv[(a, cc)], 0.0), nrm(cc * n + b));
            }
        }
        axpy(&mut mean, C64::new(1.0, 0.0), &raised[(a * n + a) * len..(a * n + a + 1) * len]);
    }
    let mut norm_h2 = 0.0;
    for a in 0..n {
        for b in 0..n {
            norm_h2 += rdot(&raised[(a * n + b) * len..(a * n + b + 1) * len], &raised[(b * n + a) * len..(b * n + a + 1) * len]);
        }
    }
    let mean2 = rdot(&mean, &mean);
    Ok(LocalGeometry {
        tangents: d1.chunks(len).map(|v| CVec::from_column_slice(v)).collect(),
        metric,
        metric_inv,
        christoffel,
        normal_second: normal,
        mean: CVec::from_vec(mean),
        mean2,
        norm_h2,
    })
}

pub(crate) fn flat_coords(im: &DiscreteImmersion) -> Vec<C64> {
    im.nodes().iter().flat_map(|p| p.coords().iter().copied()).collect()
}

/// Mean curvature and `|h|^2` at every node, computed without frames.
#[derive(Debug, Clone)]
pub struct MeanCurvatureField {
    pub local: Vec<LocalGeometry>,
    /// Nodes where every axis uses a centered stencil.
    pub full_stencil: Vec<bool>,
}

impl MeanCurvatureField {
    pub fn max_norm_h2(&self) -> f64 {
        self.local.iter().map(|l| l.norm_h2).fold(0.0, f64::max)
    }
}

fn local_all(im: &DiscreteImmersion, coords: &[C64]) -> Result<Vec<LocalGeometry>> {
    let topo = im.topology();
    let st = Stencils::new(topo);
    let len = im.dims().m + 1;
    (0..im.len())
        .into_par_iter()
        .map(|c| local_geometry(topo, &st, coords, len, c))
        .collect()
}

pub(crate) fn local_from_lifts(im: &DiscreteImmersion, coords: &[C64]) -> Result<Vec<LocalGeometry>> {
    local_all(im, coords)
}

pub fn extract_mean_curvature(im: &DiscreteImmersion) -> Result<MeanCurvatureField> {
    let coords = flat_coords(im);
    let local = local_all(im, &coords)?;
    let topo = im.topology();
    let full_stencil = (0..im.len()).map(|k| topo.is_full_stencil(&topo.multi_index(k))).collect();
    Ok(MeanCurvatureField { local, full_stencil })
}

/// `|H|` at every node, without keeping the local geometry.
pub fn mean_curvature_norms(im: &DiscreteImmersion) -> Result<Vec<f64>> {
    let coords = flat_coords(im);
    let topo = im.topology();
    let st = Stencils::new(topo);
    let len = im.dims().m + 1;
    (0..im.len())
        .into_par_iter()
        .map(|c| local_geometry(topo, &st, &coords, len, c).map(|l| l.mean2.sqrt()))
        .collect()
}

/// Full geometry at one node, expressed in an adapted orthonormal frame.
#[derive(Debug, Clone)]
pub struct NodeGeometry {
    pub local: LocalGeometry,
    pub frame: AdaptedFrame,
    /// `coefficients[(a, i)]`: `e_i = sum_a coefficients[(a, i)] d/du_a`.
    pub coefficients: DMatrix<f64>,
    pub sff: Sff,
    pub invariants: SffInvariants,
    pub gradient: GradientSff,
    pub grad_h2: f64,
    pub grad_mean2: f64,
    pub full_stencil: bool,
}

#[derive(Debug, Clone)]
pub struct GeometryField {
    pub nodes: Vec<NodeGeometry>,
}

impl GeometryField {
    pub fn full_stencil_nodes(&self) -> impl Iterator<Item = &NodeGeometry> {
        self.nodes.iter().filter(|g| g.full_stencil)
    }
}

struct FramedNode {
    local: LocalGeometry,
    frame: AdaptedFrame,
    coefficients: DMatrix<f64>,
    sff: Sff,
}

fn framed(im: &DiscreteImmersion, local: LocalGeometry, c: usize) -> Result<FramedNode> {
    let n = im.dims().n;
    let q = im.dims().q;
    let base = &im.nodes()[c];
    let tangents: Vec<Tangent> = local
        .tangents
        .iter()
        .map(|t| Tangent::new(base, t.clone()))
        .collect::<Result<_>>()?;
    let frame = build_adapted_frame(base, &tangents).map_err(|e| {
        Error::DegenerateImmersion(format!("frame construction failed at node {c}: {e}"))
    })?;
    let overlaps = DMatrix::from_fn(n, n, |a, i| real_dot(&local.tangents[a], frame.vectors()[i].lift()));
    let coefficients = &local.metric_inv * overlaps;
    let normals: Vec<&CVec> = frame.normal().iter().map(|t| t.lift()).collect();
    let mut sff = Sff::zeros(n, q);
    for alpha in 0..q {
        let comp = DMatrix::from_fn(n, n, |a, b| rdot(local.normal_second(a, b), normals[alpha].as_slice()));
        let in_frame = coefficients.transpose() * comp * &coefficients;
        for i in 0..n {
            for j in i..n {
                sff.set(alpha, i, j, 0.5 * (in_frame[(i, j)] + in_frame[(j, i)]));
            }
        }
    }
    Ok(FramedNode { local, frame, coefficients, sff })
}

/// Orthogonal factor of the polar decomposition of `o`.
fn polar(o: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = o.clone().svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    u * vt
}

/// Components of the neighbour's second fundamental form in its frame rotated
/// to best match the frame at the centre.
fn transported_sff(center: &FramedNode, nb: &FramedNode, zc: &[C64], znb: &[C64]) -> Sff {
    let n = center.sff.n();
    let q = center.sff.q();
    let ph = alignment(znb, zc);
    let ec = center.frame.vectors();
    let en: Vec<Vec<C64>> = nb.frame.vectors().iter().map(|v| v.lift().iter().map(|x| x * ph).collect()).collect();
    let ot = DMatrix::from_fn(n, n, |i, j| rdot(ec[i].lift().as_slice(), &en[j]));
    let on = DMatrix::from_fn(q, q, |a, b| rdot(ec[n + a].lift().as_slice(), &en[n + b]));
    let ut = polar(&ot);
    let un = polar(&on);
    let mut out = Sff::zeros(n, q);
    for alpha in 0..q {
        let mut comp = DMatrix::zeros(n, n);
        for beta in 0..q {
            let w = un[(alpha, beta)];
            if w == 0.0 {
                continue;
            }
            comp += DMatrix::from_fn(n, n, |k, l| w * nb.sff.get(beta, k, l));
        }
        let rotated = &ut * comp * ut.transpose();
        for i in 0..n {
            for j in i..n {
                out.set(alpha, i, j, 0.5 * (rotated[(i, j)] + rotated[(j, i)]));
            }
        }
    }
    out
}

fn gradient_at(
    im: &DiscreteImmersion,
    st: &Stencils,
    nodes: &[FramedNode],
    coords: &[C64],
    c: usize,
) -> GradientSff {
    let topo = im.topology();
    let (n, q) = (im.dims().n, im.dims().q);
    let len = im.dims().m + 1;
    let idx = topo.multi_index(c);
    let zc = node_slice(coords, len, c);
    // partial[a] holds d/du_a of the transported components.
    let mut partial = vec![vec![0.0; q * n * n]; n];
    for a in 0..n {
        let sa = st.get(a, idx[a]);
        for (j, &off) in sa.offsets.iter().enumerate() {
            let w = sa.d1[j];
            if w == 0.0 {
                continue;
            }
            let mut nb_idx = idx.clone();
            nb_idx[a] = topo.shift(a, idx[a], off).expect("stencil stays on the grid");
            let k = topo.flat_index(&nb_idx);
            let h = if k == c {
                nodes[c].sff.clone()
            } else {
                transported_sff(&nodes[c], &nodes[k], zc, node_slice(coords, len, k))
            };
            for (p, v) in partial[a].iter_mut().zip(h.components()) {
                *p += w * v;
            }
        }
    }
    let coeff = &nodes[c].coefficients;
    let mut g = GradientSff::zeros(n, q);
    for alpha in 0..q {
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    let flat = (alpha * n + i) * n + jj;
                    let v: f64 = (0..n).map(|a| coeff[(a, k)] * partial[a][flat]).sum();
                    g.set(alpha, i, jj, k, v);
                }
            }
        }
    }
    g
}

/// Frames, second fundamental form, invariants and `nabla h` at every node.
pub fn extract_geometry(im: &DiscreteImmersion) -> Result<GeometryField> {
    let coords = flat_coords(im);
    let local = local_all(im, &coords)?;
    let framed_nodes: Vec<FramedNode> = local
        .into_par_iter()
        .enumerate()
        .map(|(c, l)| framed(im, l, c))
        .collect::<Result<_>>()?;
    let topo = im.topology();
    let st = Stencils::new(topo);
    let gradients: Vec<GradientSff> = (0..im.len())
        .into_par_iter()
        .map(|c| gradient_at(im, &st, &framed_nodes, &coords, c))
        .collect();
    let nodes = framed_nodes
        .into_par_iter()
        .zip(gradients)
        .enumerate()
        .map(|(c, (f, gradient))| {
            let invariants = sff_invariants(&f.sff, f.frame.structure())?;
            let grad_h2 = gradient.norm2();
            let grad_mean2 = gradient.grad_mean_norm2();
            Ok(NodeGeometry {
                local: f.local,
                frame: f.frame,
                coefficients: f.coefficients,
                sff: f.sff,
                invariants,
                gradient,
                grad_h2,
                grad_mean2,
                full_stencil: topo.is_full_stencil(&topo.multi_index(c)),
            })
        })
        .collect::<Result<_>>()?;
    Ok(GeometryField { nodes })
}

/// Laplace-Beltrami operator of a scalar field sampled at the nodes.
pub fn laplacian(im: &DiscreteImmersion, local: &[LocalGeometry], f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != im.len() || local.len() != im.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values and {} geometries on {} nodes",
            f.len(),
            local.len(),
            im.len()
        )));
    }
    let topo = im.topology();
    let st = Stencils::new(topo);
    let n = topo.dim();
    Ok((0..im.len())
        .into_par_iter()
        .map(|c| {
            let idx = topo.multi_index(c);
            let at = |a: usize, oa: isize, b: usize, ob: isize| -> f64 {
                let mut j = idx.clone();
                j[a] = topo.shift(a, j[a], oa).expect("stencil stays on the grid");
                j[b] = topo.shift(b, j[b], ob).expect("stencil stays on the grid");
                f[topo.flat_index(&j)]
            };
            let mut d1 = vec![0.0; n];
            let mut d2 = vec![0.0; n * n];
            for a in 0..n {
                let sa = st.get(a, idx[a]);
                for (j, &off) in sa.offsets.iter().enumerate() {
                    let v = at(a, off, a, 0);
                    d1[a] += sa.d1[j] * v;
                    d2[a * n + a] += sa.d2[j] * v;
                }
                for b in a + 1..n {
                    let sb = st.get(b, idx[b]);
                    let mut acc = 0.0;
                    for (i, &oa) in sa.offsets.iter().enumerate() {
                        for (j, &ob) in sb.offsets.iter().enumerate() {
                            let w = sa.d1[i] * sb.d1[j];
                            if w != 0.0 {
                                acc += w * at(a, oa, b, ob);
                            }
                        }
                    }
                    d2[a * n + b] = acc;
                    d2[b * n + a] = acc;
                }
            }
            let l = &local[c];
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let conn: f64 = (0..n).map(|cc| l.christoffel(cc, a, b) * d1[cc]).sum();
                    s += l.metric_inv[(a, b)] * (d2[a * n + b] - conn);
                }
            }
            s
        })
        .collect())
}

/// Adapted frame and second fundamental form at every node, without `nabla h`.
pub fn frame_nodes(im: &DiscreteImmersion, local: &[LocalGeometry]) -> Result<Vec<(AdaptedFrame, Sff)>> {
    local
        .par_iter()
        .enumerate()
        .map(|(c, l)| framed(im, l.clone(), c).map(|f| (f.frame, f.sff)))
        .collect()
}

/// `|nabla^perp V|^2` at every node for a normal field `V` given by its lifts.
pub fn normal_gradient_norm2(im: &DiscreteImmersion, local: &[LocalGeometry], field: &[CVec]) -> Result<Vec<f64>> {
    if field.len() != im.len() || local.len() != im.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} field values and {} geometries on {} nodes",
            field.len(),
            local.len(),
            im.len()
        )));
    }
    let topo = im.topology();
    let st = Stencils::new(topo);
    let n = topo.dim();
    let len = im.dims().m + 1;
    let coords = flat_coords(im);
    Ok((0..im.len())
        .into_par_iter()
        .map(|c| {
            let idx = topo.multi_index(c);
            let zc = node_slice(&coords, len, c);
            let l = &local[c];
            let mut derivs = Vec::with_capacity(n);
            for a in 0..n {
                let sa = st.get(a, idx[a]);
                let mut d = vec![C64::new(0.0, 0.0); len];
                for (j, &off) in sa.offsets.iter().enumerate() {
                    if sa.d1[j] == 0.0 {
                        continue;
                    }
                    let mut nb = idx.clone();
                    nb[a] = topo.shift(a, idx[a], off).expect("stencil stays on the grid");
                    let k = topo.flat_index(&nb);
                    let ph = alignment(node_slice(&coords, len, k), zc) * sa.d1[j];
                    d.iter_mut().zip(field[k].iter()).for_each(|(x, v)| *x += ph * v);
                }
                horizontal(&mut d, zc);
                let tang: Vec<f64> = (0..n).map(|b| rdot(&d, l.tangents[b].as_slice())).collect();
                for cc in 0..n {
                    let coef: f64 = (0..n).map(|b| l.metric_inv[(cc, b)] * tang[b]).sum();
                    d.iter_mut().zip(l.tangents[cc].iter()).for_each(|(x, t)| *x -= coef * t);
                }
                derivs.push(d);
            }
            let mut s = 0.0;
            for a in 0..n {
                for b in 0..n {
                    s += l.metric_inv[(a, b)] * rdot(&derivs[a], &derivs[b]);
                }
            }
            s
        })
        .collect())
}
