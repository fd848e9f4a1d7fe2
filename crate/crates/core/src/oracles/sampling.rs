//! Random tensors and complex structures for falsification runs.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::tensor::{ComplexStructure, Sff, SymmetricTensor};

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix with the sign convention `diag(R) > 0`.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, k: usize) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(k, k, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..k {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

/// `O^T J_0 O` with `J_0` the standard structure and `O` Haar-orthogonal, so
/// the first `n` indices are read as tangent and the last `q` as normal.
pub fn random_complex_structure<R: Rng + ?Sized>(rng: &mut R, n: usize, q: usize) -> ComplexStructure {
    let k = n + q;
    assert!(k % 2 == 0, "n + q must be even");
    let mut j0 = DMatrix::<f64>::zeros(k, k);
    for b in 0..k / 2 {
        j0[(2 * b, 2 * b + 1)] = 1.0;
        j0[(2 * b + 1, 2 * b)] = -1.0;
    }
    let o = random_orthogonal(rng, k);
    let j = o.transpose() * j0 * &o;
    let j = (&j - j.transpose()) * 0.5;
    ComplexStructure::new(n, j).expect("conjugated standard structure")
}

/// Symmetric form with independent standard normal entries times `scale`.
pub fn random_sff<R: Rng + ?Sized>(rng: &mut R, n: usize, q: usize, scale: f64) -> Sff {
    Sff::from_fn(n, q, |_, _, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Fully symmetric tensor obtained by symmetrizing Gaussian entries.
pub fn random_symmetric_tensor<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    q: usize,
    scale: f64,
) -> SymmetricTensor {
    let raw: Vec<f64> = (0..q * n * n * n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
    SymmetricTensor::symmetrized(n, q, |a, i, j, k| raw[((a * n + i) * n + j) * n + k])
}
