use serde::{Deserialize, Serialize};

use super::frame::ComplexStructure;
use crate::error::{Error, Result};

/// Fully symmetric three-tensor `S^alpha_ijk`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricTensor {
    n: usize,
    q: usize,
    data: Vec<f64>,
}

#[inline]
fn idx(n: usize, a: usize, i: usize, j: usize, k: usize) -> usize {
    ((a * n + i) * n + j) * n + k
}

impl SymmetricTensor {
    pub fn zeros(n: usize, q: usize) -> Self {
        Self { n, q, data: vec![0.0; q * n * n * n] }
    }

    /// Symmetrizes `f(alpha, i, j, k)` over the three lower indices.
    pub fn symmetrized(n: usize, q: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut s = Self::zeros(n, q);
        for a in 0..q {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        s.data[idx(n, a, i, j, k)] = (f(a, i, j, k)
                            + f(a, i, k, j)
                            + f(a, j, i, k)
                            + f(a, j, k, i)
                            + f(a, k, i, j)
                            + f(a, k, j, i))
                            / 6.0;
                    }
                }
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[idx(self.n, a, i, j, k)]
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// `sum_k S^alpha_ikk`.
    pub fn trace(&self, a: usize, i: usize) -> f64 {
        (0..self.n).map(|k| self.get(a, i, k, k)).sum()
    }
}

/// Covariant derivative of the second fundamental form: `get(alpha, i, j, k)`
/// is `nabla_k h^alpha_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientSff {
    n: usize,
    q: usize,
    data: Vec<f64>,
}

impl GradientSff {
    pub fn zeros(n: usize, q: usize) -> Self {
        Self { n, q, data: vec![0.0; q * n * n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn get(&self, a: usize, i: usize, j: usize, k: usize) -> f64 {
        self.data[idx(self.n, a, i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, a: usize, i: usize, j: usize, k: usize, v: f64) {
        self.data[idx(self.n, a, i, j, k)] = v;
    }

    pub fn norm2(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    /// `nabla_k H^alpha = sum_i nabla_k h^alpha_ii`.
    pub fn grad_mean(&self, a: usize, k: usize) -> f64 {
        (0..self.n).map(|i| self.get(a, i, i, k)).sum()
    }

    pub fn grad_mean_norm2(&self) -> f64 {
        let mut s = 0.0;
        for a in 0..self.q {
            for k in 0..self.n {
                s += self.grad_mean(a, k).powi(2);
            }
        }
        s
    }

    /// Part symmetric in all three lower indices.
    pub fn symmetric_part(&self) -> SymmetricTensor {
        SymmetricTensor::symmetrized(self.n, self.q, |a, i, j, k| self.get(a, i, j, k))
    }

    /// Largest violation of `nabla_j h_ik - nabla_k h_ij = Rbar_{alpha i j k}`.
    pub fn codazzi_defect(&self, j: &ComplexStructure) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in 0..self.q {
            for i in 0..n {
                for jj in 0..n {
                    for k in 0..n {
                        let lhs = self.get(a, i, k, jj) - self.get(a, i, jj, k);
                        worst = worst.max((lhs - normal_curvature(j, a, i, jj, k)).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in 0..self.q {
            for i in 0..n {
                for jj in 0..n {
                    for k in 0..n {
                        worst = worst.max((self.get(a, i, jj, k) - self.get(a, jj, i, k)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// `Rbar(e_alpha, e_i, e_j, e_k)` for normal `alpha` and tangent `i, j, k`.
#[inline]
pub fn normal_curvature(j: &ComplexStructure, a: usize, i: usize, jj: usize, k: usize) -> f64 {
    let na = j.n() + a;
    j.get(na, jj) * j.get(i, k) - j.get(na, k) * j.get(i, jj) + 2.0 * j.get(na, i) * j.get(jj, k)
}

fn check(n: usize, q: usize, j: &ComplexStructure) -> Result<()> {
    if j.n() != n || j.q() != q {
        return Err(Error::DimensionMismatch(format!(
            "tensor with (n={n}, q={q}) against structure with (n={}, q={})",
            j.n(),
            j.q()
        )));
    }
    Ok(())
}

/// Reconstructs the unique `nabla h` whose fully symmetric part is `s` and
/// which satisfies the Codazzi equation of `CP^m`:
/// `nabla_k h_ij = S_ijk - (C_ijk + C_jik) / 3` with `C_ijk = Rbar_{alpha i j k}`.
pub fn codazzi_complete(s: &SymmetricTensor, j: &ComplexStructure) -> Result<GradientSff> {
    let (n, q) = (s.n(), s.q());
    check(n, q, j)?;
    let mut g = GradientSff::zeros(n, q);
    for a in 0..q {
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    let c = normal_curvature(j, a, i, jj, k) + normal_curvature(j, a, jj, i, k);
                    g.set(a, i, jj, k, s.get(a, i, jj, k) - c / 3.0);
                }
            }
        }
    }
    Ok(g)
}

/// Lower bound for `|nabla h|^2` by codimension: `q = 1`, `2 <= q < n`, `q >= n`.
pub fn gradient_lower_bound(n: usize, q: usize, grad_mean2: f64, p2: f64) -> f64 {
    let nf = n as f64;
    if q == 1 {
        3.0 / (nf + 2.0) * grad_mean2 + 2.0 * (nf - 1.0)
    } else if q < n {
        3.0 / (nf + 8.0) * grad_mean2 + 2.0 * (nf - q as f64) * p2
    } else {
        3.0 / (nf + 8.0) * grad_mean2
    }
}

/// `|nabla h|^2` minus its codimension-dependent lower bound.
pub fn gradient_inequality_slack(grad: &GradientSff, j: &ComplexStructure) -> Result<f64> {
    check(grad.n(), grad.q(), j)?;
    let bound = gradient_lower_bound(grad.n(), grad.q(), grad.grad_mean_norm2(), j.p_norm2());
    Ok(grad.norm2() - bound)
}

/// `|S|^2 - 3/(n+2) sum_{alpha,i} (sum_k S^alpha_ikk)^2` for a symmetric tensor.
pub fn symmetrization_slack(s: &SymmetricTensor) -> f64 {
    let mut traces = 0.0;
    for a in 0..s.q() {
        for i in 0..s.n() {
            traces += s.trace(a, i).powi(2);
        }
    }
    s.norm2() - 3.0 / (s.n() as f64 + 2.0) * traces
}

/// `sum_k J_{alpha k} J_{k i}`.
pub fn jj_contraction(j: &ComplexStructure, a: usize, i: usize) -> f64 {
    let na = j.n() + a;
    (0..j.n()).map(|k| j.get(na, k) * j.get(k, i)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::sampling::{random_complex_structure, random_symmetric_tensor};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn completion_satisfies_codazzi_and_keeps_symmetric_part() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (n, q) in [(7, 1), (8, 2), (9, 3), (6, 6), (4, 4)] {
            let s = random_symmetric_tensor(&mut rng, n, q, 1.0);
            let j = random_complex_structure(&mut rng, n, q);
            let g = codazzi_complete(&s, &j).unwrap();
            assert!(g.codazzi_defect(&j) < 1e-12);
            assert!(g.symmetry_defect() < 1e-14);
            let back = g.symmetric_part();
            for (x, y) in back.data.iter().zip(&s.data) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn trace_of_symmetric_part_matches_codazzi_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (n, q) = (6, 4);
        let s = random_symmetric_tensor(&mut rng, n, q, 1.0);
        let j = random_complex_structure(&mut rng, n, q);
        let g = codazzi_complete(&s, &j).unwrap();
        for a in 0..q {
            for i in 0..n {
                let expected = g.grad_mean(a, i) + 2.0 * jj_contraction(&j, a, i);
                assert_relative_eq!(s.trace(a, i), expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_part_norm_identity() {
        // |S|^2 = |nabla h|^2 - 2 sum (sum_k J_ak J_ki)^2 - 2 |P|^2 (n - |P|^2)
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for (n, q) in [(7, 1), (8, 2), (6, 6), (9, 3)] {
            let s = random_symmetric_tensor(&mut rng, n, q, 1.0);
            let j = random_complex_structure(&mut rng, n, q);
            let g = codazzi_complete(&s, &j).unwrap();
            let mut jj = 0.0;
            for a in 0..q {
                for i in 0..n {
                    jj += jj_contraction(&j, a, i).powi(2);
                }
            }
            let p2 = j.p_norm2();
            let expected = g.norm2() - 2.0 * jj - 2.0 * p2 * (n as f64 - p2);
            assert_relative_eq!(s.norm2(), expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn hypersurface_with_parallel_form_attains_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let n = 5;
        let j = random_complex_structure(&mut rng, n, 1);
        let g = codazzi_complete(&SymmetricTensor::zeros(n, 1), &j).unwrap();
        assert!(g.grad_mean_norm2() < 1e-24);
        let slack = gradient_inequality_slack(&g, &j).unwrap();
        assert!(slack >= -1e-12, "slack {slack}");
    }
}
