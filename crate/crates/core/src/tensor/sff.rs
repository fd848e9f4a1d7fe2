use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::frame::ComplexStructure;
use super::reaction::{Accumulator, CompensatedSum};
use crate::error::{Error, Result};

/// Second fundamental form components `h^alpha_ij`, symmetric in `i, j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sff {
    n: usize,
    q: usize,
    data: Vec<f64>,
}

impl Sff {
    pub fn zeros(n: usize, q: usize) -> Self {
        Self { n, q, data: vec![0.0; q * n * n] }
    }

    /// Builds from `f(alpha, i, j)` evaluated for `i <= j` and mirrored.
    pub fn from_fn(n: usize, q: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut h = Self::zeros(n, q);
        for a in 0..q {
            for i in 0..n {
                for j in i..n {
                    h.set(a, i, j, f(a, i, j));
                }
            }
        }
        h
    }

    /// Wraps raw components laid out as `[alpha][i][j]`, checking symmetry.
    pub fn from_components(n: usize, q: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != q * n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} components for n={n}, q={q}",
                data.len()
            )));
        }
        let h = Self { n, q, data };
        let defect = h.symmetry_defect();
        if defect > 1e-12 * (1.0 + h.norm2().sqrt()) {
            return Err(Error::DegenerateInput(format!("asymmetric form (defect {defect:e})")));
        }
        Ok(h)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn components(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize) -> f64 {
        self.data[(a * self.n + i) * self.n + j]
    }

    /// Sets `h^a_ij` and `h^a_ji`.
    #[inline]
    pub fn set(&mut self, a: usize, i: usize, j: usize, v: f64) {
        let n = self.n;
        self.data[(a * n + i) * n + j] = v;
        self.data[(a * n + j) * n + i] = v;
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.q {
            for i in 0..self.n {
                for j in 0..i {
                    worst = worst.max((self.get(a, i, j) - self.get(a, j, i)).abs());
                }
            }
        }
        worst
    }

    /// Mean curvature components `H^alpha = sum_i h^alpha_ii`.
    /// Traces `H^alpha`, summed with compensation since `|H|` may be far
    /// below `|h|`.
    pub fn mean(&self) -> Vec<f64> {
        (0..self.q)
            .map(|a| {
                let mut acc = CompensatedSum::default();
                (0..self.n).for_each(|i| acc.add(self.get(a, i, i)));
                acc.value()
            })
            .collect()
    }

    pub fn mean_norm2(&self) -> f64 {
        self.mean().iter().map(|x| x * x).sum()
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// Traceless part `h - (H / n) g`.
    pub fn traceless(&self) -> Self {
        let mean = self.mean();
        let mut out = self.clone();
        for (a, m) in mean.iter().enumerate() {
            for i in 0..self.n {
                let v = out.get(a, i, i) - m / self.n as f64;
                out.set(a, i, i, v);
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, q: self.q, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Components in the normal frame given by the columns of `rot`
    /// (expressed in the current normal frame).
    pub fn rotate_normal(&self, rot: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(self.n, self.q);
        for a in 0..self.q {
            for i in 0..self.n {
                for j in 0..self.n {
                    let v: f64 = (0..self.q).map(|b| rot[(b, a)] * self.get(b, i, j)).sum();
                    out.data[(a * self.n + i) * self.n + j] = v;
                }
            }
        }
        out
    }

    /// Components in the tangent frame given by the columns of `rot`.
    pub fn rotate_tangent(&self, rot: &DMatrix<f64>) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n, self.q);
        for a in 0..self.q {
            let block = DMatrix::from_fn(n, n, |i, j| self.get(a, i, j));
            let turned = rot.transpose() * block * rot;
            for i in 0..n {
                for j in 0..n {
                    out.data[(a * n + i) * n + j] = turned[(i, j)];
                }
            }
        }
        out
    }

    fn check_structure(&self, j: &ComplexStructure) -> Result<()> {
        if j.n() != self.n || j.q() != self.q {
            return Err(Error::DimensionMismatch(format!(
                "form with (n={}, q={}) against structure with (n={}, q={})",
                self.n,
                self.q,
                j.n(),
                j.q()
            )));
        }
        Ok(())
    }
}

/// Scalar invariants of a second fundamental form relative to the complex
/// structure, computed in a normal frame with `e_{n+1}` parallel to `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SffInvariants {
    /// `|h|^2`
    pub h2: f64,
    /// `|H|^2`
    pub mean2: f64,
    /// `|h - (H/n) g|^2`
    pub traceless2: f64,
    /// Traceless part along `e_{n+1}`.
    pub rho1: f64,
    /// Traceless part along the remaining normals.
    pub rho2: f64,
    /// `|P e_{n+1}|^2`
    pub theta1: f64,
    /// `sum_{alpha > n+1} |P e_alpha|^2`
    pub theta2: f64,
    /// `|P|^2`
    pub p2: f64,
}

/// Below this `|H|` relative to `1 + |h|` the mean curvature direction is
/// treated as undefined.
const MEAN_ZERO: f64 = 1e-12;

/// Rotates the normal frame by a Householder reflection (and a sign flip) so that `H` becomes
/// `|H| e_{n+1}`. Returns the inputs unchanged when `H` vanishes.
pub fn align_mean_curvature(h: &Sff, j: &ComplexStructure) -> Result<(Sff, ComplexStructure)> {
    h.check_structure(j)?;
    let mean = h.mean();
    let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= MEAN_ZERO * (1.0 + h.norm2().sqrt()) {
        return Ok((h.clone(), j.clone()));
    }
    let q = h.q();
    // Reflect along e_1 - u when u_1 <= 0, else along e_1 + u followed by a
    // sign flip of the first column, so that |v| >= 1 in both cases.
    let flip = mean[0] > 0.0;
    let sign = if flip { 1.0 } else { -1.0 };
    let mut v: Vec<f64> = mean.iter().map(|x| sign * x / norm).collect();
    v[0] += 1.0;
    let v2: f64 = v.iter().map(|x| x * x).sum();
    let rot = DMatrix::from_fn(q, q, |a, b| {
        let id = if a == b { 1.0 } else { 0.0 };
        let p = id - 2.0 * v[a] * v[b] / v2;
        if flip && b == 0 {
            -p
        } else {
            p
        }
    });
    Ok((h.rotate_normal(&rot), j.rotate_normal(&rot)))
}

/// Computes `|h|^2, |H|^2, |h°|^2, rho_1, rho_2, theta_1, theta_2, |P|^2`.
///
/// When `H = 0` the split is undefined; then `rho_1 = theta_1 = 0`,
/// `rho_2 = |h°|^2` and `theta_2 = |P|^2`.
pub fn sff_invariants(h: &Sff, j: &ComplexStructure) -> Result<SffInvariants> {
    let (h, j) = align_mean_curvature(h, j)?;
    let n = h.n();
    let h2 = h.norm2();
    let mean = h.mean();
    let mean2: f64 = mean.iter().map(|x| x * x).sum();
    let tl = h.traceless();
    let traceless2 = tl.norm2();
    let p = j.p_per_normal();
    let p2: f64 = p.iter().sum();
    let defined = mean2.sqrt() > MEAN_ZERO * (1.0 + h2.sqrt());
    let (rho1, theta1) = if defined {
        let r1: f64 = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).map(|(i, k)| tl.get(0, i, k).powi(2)).sum();
        (r1, p[0])
    } else {
        (0.0, 0.0)
    };
    Ok(SffInvariants {
        h2,
        mean2,
        traceless2,
        rho1,
        rho2: (traceless2 - rho1).max(0.0),
        theta1,
        theta2: (p2 - theta1).max(0.0),
        p2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::sampling::{random_complex_structure, random_sff};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn traceless_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_sff(&mut rng, 5, 3, 1.0);
        let tl = h.traceless();
        assert!(tl.mean_norm2() < 1e-24);
        assert_relative_eq!(tl.norm2(), h.norm2() - h.mean_norm2() / 5.0, epsilon = 1e-12);
    }

    #[test]
    fn alignment_puts_mean_curvature_on_first_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let h = random_sff(&mut rng, 4, 4, 1.0);
        let j = random_complex_structure(&mut rng, 4, 4);
        let (ha, ja) = align_mean_curvature(&h, &j).unwrap();
        let mean = ha.mean();
        assert_relative_eq!(mean[0], h.mean_norm2().sqrt(), epsilon = 1e-12);
        assert!(mean[1..].iter().all(|x| x.abs() < 1e-12));
        assert_relative_eq!(ha.norm2(), h.norm2(), epsilon = 1e-12);
        assert_relative_eq!(ja.p_norm2(), j.p_norm2(), epsilon = 1e-12);
        assert!(ComplexStructure::new(4, ja.matrix().clone()).is_ok());
    }

    #[test]
    fn invariants_split_consistently() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (n, q) in [(7, 1), (8, 2), (9, 3), (6, 6)] {
            let h = random_sff(&mut rng, n, q, 1.0);
            let j = random_complex_structure(&mut rng, n, q);
            let inv = sff_invariants(&h, &j).unwrap();
            assert_relative_eq!(inv.rho1 + inv.rho2, inv.traceless2, epsilon = 1e-12);
            assert_relative_eq!(inv.theta1 + inv.theta2, inv.p2, epsilon = 1e-12);
            assert_relative_eq!(inv.traceless2, inv.h2 - inv.mean2 / n as f64, epsilon = 1e-10);
            assert!(inv.p2 <= n.min(q) as f64 + 1e-12);
            if q == 1 {
                assert!(inv.rho2.abs() < 1e-12);
                assert!(inv.theta2.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn vanishing_mean_curvature_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let h = random_sff(&mut rng, 4, 2, 1.0).traceless();
        let j = random_complex_structure(&mut rng, 4, 2);
        let inv = sff_invariants(&h, &j).unwrap();
        assert_eq!(inv.rho1, 0.0);
        assert_eq!(inv.theta1, 0.0);
        assert_relative_eq!(inv.rho2, inv.traceless2, epsilon = 1e-14);
        assert_relative_eq!(inv.theta2, inv.p2, epsilon = 1e-14);
    }

    #[test]
    fn mismatched_dimensions_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let h = random_sff(&mut rng, 4, 2, 1.0);
        let j = random_complex_structure(&mut rng, 3, 3);
        assert!(matches!(sff_invariants(&h, &j), Err(Error::DimensionMismatch(_))));
    }
}
