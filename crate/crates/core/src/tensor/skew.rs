use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

/// Orthogonal `c` and block values with `c^T a c` block diagonal, blocks
/// `[[0, lambda_k], [-lambda_k, 0]]` in descending order of `lambda_k >= 0`,
/// followed by zeros.
#[derive(Debug, Clone)]
pub struct SkewNormalForm {
    pub c: DMatrix<f64>,
    pub lambdas: Vec<f64>,
}

impl SkewNormalForm {
    /// The block diagonal matrix described by `lambdas`.
    pub fn block_matrix(&self, size: usize) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(size, size);
        for (k, &l) in self.lambdas.iter().enumerate() {
            b[(2 * k, 2 * k + 1)] = l;
            b[(2 * k + 1, 2 * k)] = -l;
        }
        b
    }
}

/// Block-diagonalizes a real skew-symmetric matrix by an orthogonal change of basis.
///
/// `i a` is Hermitian; an eigenvector `x + i y` for the eigenvalue `lambda > 0`
/// gives the pair `(y, x)` spanning one block. The kernel gets a real basis.
pub fn skew_normal_form(a: &DMatrix<f64>) -> Result<SkewNormalForm> {
    let k = a.nrows();
    if a.ncols() != k {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix", a.nrows(), a.ncols())));
    }
    let scale = 1.0 + a.amax();
    let skew = (a + a.transpose()).amax();
    if skew > 1e-12 * scale {
        return Err(Error::NotSkew(skew));
    }
    let herm = DMatrix::<Complex<f64>>::from_fn(k, k, |r, c| {
        Complex::new(0.0, 0.5 * (a[(r, c)] - a[(c, r)]))
    });
    let eig = herm
        .try_symmetric_eigen(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::DegenerateInput("eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
    // Eigenvalues come in pairs +-lambda, so the largest k/2 carry the blocks.
    let blocks = k / 2;
    let zero = 1e-12 * scale;
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(k);
    let mut lambdas = Vec::new();
    let mut kernel: Vec<DVector<f64>> = Vec::new();
    for (rank, &idx) in order.iter().enumerate() {
        let w = eig.eigenvectors.column(idx);
        let lambda = eig.eigenvalues[idx];
        if rank < blocks && lambda > zero {
            let x = DVector::from_iterator(k, w.iter().map(|c| c.re));
            let y = DVector::from_iterator(k, w.iter().map(|c| c.im));
            let (nx, ny) = (x.norm(), y.norm());
            cols.push(y / ny);
            cols.push(x / nx);
            lambdas.push(lambda);
        } else if lambda.abs() <= zero {
            kernel.push(DVector::from_iterator(k, w.iter().map(|c| c.re)));
            kernel.push(DVector::from_iterator(k, w.iter().map(|c| c.im)));
        }
    }
    let target = k - cols.len();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(target);
    kernel.sort_by(|u, v| v.norm().total_cmp(&u.norm()));
    for mut v in kernel {
        if basis.len() == target {
            break;
        }
        for _ in 0..2 {
            for c in cols.iter().chain(basis.iter()) {
                let d = v.dot(c);
                v.axpy(-d, c, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / norm);
        }
    }
    if basis.len() != target {
        return Err(Error::DegenerateInput("kernel basis is incomplete".into()));
    }
    cols.extend(basis);
    let c = DMatrix::from_columns(&cols);
    let form = SkewNormalForm { c, lambdas };
    let defect = (form.c.transpose() * a * &form.c - form.block_matrix(k)).amax();
    let ortho = (form.c.transpose() * &form.c - DMatrix::<f64>::identity(k, k)).amax();
    if defect > 1e-10 * scale || ortho > 1e-10 {
        return Err(Error::NonOrthonormal(defect.max(ortho)));
    }
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::sampling::{random_complex_structure, random_orthogonal};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_skew(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
        let g = DMatrix::<f64>::from_fn(k, k, |_, _| rng.sample(StandardNormal));
        &g - g.transpose()
    }

    fn check(a: &DMatrix<f64>) {
        let f = skew_normal_form(a).unwrap();
        let k = a.nrows();
        assert!((f.c.transpose() * &f.c - DMatrix::<f64>::identity(k, k)).amax() < 1e-10);
        assert!((f.c.transpose() * a * &f.c - f.block_matrix(k)).amax() < 1e-10);
        assert!(f.lambdas.windows(2).all(|w| w[0] >= w[1] - 1e-12));
        assert!(f.lambdas.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn random_skew_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for k in 1..=9 {
            for _ in 0..10 {
                check(&random_skew(&mut rng, k));
            }
        }
    }

    #[test]
    fn degenerate_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        check(&DMatrix::zeros(4, 4));
        // Complex structures have every lambda equal to one.
        let j = random_complex_structure(&mut rng, 3, 3);
        let f = skew_normal_form(j.matrix()).unwrap();
        assert_eq!(f.lambdas.len(), 3);
        assert!(f.lambdas.iter().all(|l| (l - 1.0).abs() < 1e-10));
        // Rank-two matrix with repeated zero eigenvalues, conjugated.
        let mut b = DMatrix::<f64>::zeros(6, 6);
        b[(0, 1)] = 2.0;
        b[(1, 0)] = -2.0;
        let o = random_orthogonal(&mut rng, 6);
        check(&(o.transpose() * b * o));
    }

    #[test]
    fn rejects_non_skew() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(skew_normal_form(&a), Err(Error::NotSkew(_))));
    }
}
