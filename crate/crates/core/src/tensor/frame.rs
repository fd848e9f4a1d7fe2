use nalgebra::DMatrix;

use crate::ambient::{herm, horizontal_part, CVec, CpPoint, Tangent, C64};
use crate::error::{Error, Result};
use crate::tolerances;

/// Components `J_AB = <e_A, J e_B>` of the complex structure in an orthonormal
/// frame whose first `n` vectors are tangent and the remaining `q` normal.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    n: usize,
    j: DMatrix<f64>,
}

impl ComplexStructure {
    /// Checks skew-symmetry and `J^2 = -I` to `tol`.
    pub fn with_tolerance(n: usize, j: DMatrix<f64>, tol: f64) -> Result<Self> {
        let k = j.nrows();
        if j.ncols() != k || k % 2 != 0 || n == 0 || n >= k {
            return Err(Error::DimensionMismatch(format!(
                "complex structure of shape {}x{} with n={n}",
                j.nrows(),
                j.ncols()
            )));
        }
        let skew = (&j + j.transpose()).amax();
        if skew > tol {
            return Err(Error::NotSkew(skew));
        }
        let square = (&j * &j + DMatrix::<f64>::identity(k, k)).amax();
        if square > tol {
            return Err(Error::NonOrthonormal(square));
        }
        Ok(Self { n, j })
    }

    pub fn new(n: usize, j: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(n, j, 1e-9)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.j.nrows() - self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    /// `J_AB` with frame indices `0..n+q`.
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.j[(a, b)]
    }

    /// `J_{i alpha}` with tangent index `i` and normal index `alpha` counted from 0.
    #[inline]
    pub fn tn(&self, i: usize, alpha: usize) -> f64 {
        self.j[(i, self.n + alpha)]
    }

    /// `J_{alpha beta}` between normal indices counted from 0.
    #[inline]
    pub fn nn(&self, alpha: usize, beta: usize) -> f64 {
        self.j[(self.n + alpha, self.n + beta)]
    }

    /// `|P e_alpha|^2 = sum_i J_{i alpha}^2` for every normal index.
    pub fn p_per_normal(&self) -> Vec<f64> {
        (0..self.q())
            .map(|a| (0..self.n).map(|i| self.tn(i, a).powi(2)).sum())
            .collect()
    }

    /// `|P|^2 = sum_{i, alpha} J_{i alpha}^2`.
    pub fn p_norm2(&self) -> f64 {
        self.p_per_normal().iter().sum()
    }

    /// Re-expresses the structure in the frame whose normal vectors are the
    /// columns of the orthogonal `q x q` matrix `rot` in the old normal frame.
    pub fn rotate_normal(&self, rot: &DMatrix<f64>) -> Self {
        let k = self.j.nrows();
        let mut full = DMatrix::<f64>::identity(k, k);
        full.view_mut((self.n, self.n), (self.q(), self.q())).copy_from(rot);
        Self { n: self.n, j: full.transpose() * &self.j * full }
    }

    /// Re-expresses the structure in a frame whose tangent vectors are the
    /// columns of the orthogonal `n x n` matrix `rot`.
    pub fn rotate_tangent(&self, rot: &DMatrix<f64>) -> Self {
        let k = self.j.nrows();
        let mut full = DMatrix::<f64>::identity(k, k);
        full.view_mut((0, 0), (self.n, self.n)).copy_from(rot);
        Self { n: self.n, j: full.transpose() * &self.j * full }
    }
}

/// Orthonormal frame at a point: `n` tangent vectors followed by `q` normal ones.
#[derive(Debug, Clone)]
pub struct AdaptedFrame {
    base: CpPoint,
    vectors: Vec<Tangent>,
    structure: ComplexStructure,
}

impl AdaptedFrame {
    pub fn base(&self) -> &CpPoint {
        &self.base
    }

    pub fn vectors(&self) -> &[Tangent] {
        &self.vectors
    }

    pub fn n(&self) -> usize {
        self.structure.n
    }

    pub fn tangent(&self) -> &[Tangent] {
        &self.vectors[..self.n()]
    }

    pub fn normal(&self) -> &[Tangent] {
        &self.vectors[self.n()..]
    }

    pub fn structure(&self) -> &ComplexStructure {
        &self.structure
    }
}

#[inline]
pub(crate) fn real_dot(u: &CVec, v: &CVec) -> f64 {
    herm(u, v).re
}

/// Smallest singular value of the real Gram matrix of `vectors`.
pub(crate) fn smallest_singular_value(vectors: &[CVec]) -> f64 {
    let k = vectors.len();
    let gram = DMatrix::from_fn(k, k, |a, b| real_dot(&vectors[a], &vectors[b]));
    gram.symmetric_eigenvalues().min().max(0.0).sqrt()
}

fn orthogonalize_against(v: &mut CVec, basis: &[CVec]) {
    // Two passes of modified Gram-Schmidt.
    for _ in 0..2 {
        for e in basis {
            let c = real_dot(v, e);
            v.axpy(C64::new(-c, 0.0), e, C64::new(1.0, 0.0));
        }
    }
}

/// Orthonormalizes horizontal tangent vectors at `z` and completes them with
/// normal vectors to an orthonormal basis of the horizontal space.
pub(crate) fn complete_frame(z: &CVec, tangent: &[CVec]) -> Result<Vec<CVec>> {
    let sigma = smallest_singular_value(tangent);
    if !(sigma >= tolerances::RANK) {
        return Err(Error::SingularTangent(sigma));
    }
    let real_dim = 2 * (z.len() - 1);
    let mut basis: Vec<CVec> = Vec::with_capacity(real_dim);
    for t in tangent {
        let mut v = horizontal_part(z, t);
        orthogonalize_against(&mut v, &basis);
        let norm = v.norm();
        if norm < tolerances::RANK {
            return Err(Error::SingularTangent(norm));
        }
        basis.push(v / C64::new(norm, 0.0));
    }
    let mut candidates: Vec<CVec> = Vec::with_capacity(2 * z.len());
    for k in 0..z.len() {
        for unit in [C64::new(1.0, 0.0), C64::i()] {
            let mut e = CVec::zeros(z.len());
            e[k] = unit;
            candidates.push(horizontal_part(z, &e));
        }
    }
    while basis.len() < real_dim {
        let mut best: Option<(f64, CVec)> = None;
        for c in &candidates {
            let mut v = c.clone();
            orthogonalize_against(&mut v, &basis);
            let norm = v.norm();
            if best.as_ref().map_or(true, |(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("candidate list is never empty");
        basis.push(v / C64::new(norm, 0.0));
    }
    Ok(basis)
}

/// `J_AB = <e_A, i e_B> = Im <e_A, e_B>`.
pub(crate) fn structure_matrix(frame: &[CVec]) -> DMatrix<f64> {
    let k = frame.len();
    DMatrix::from_fn(k, k, |a, b| herm(&frame[a], &frame[b]).im)
}

/// Builds an adapted orthonormal frame from tangent vectors spanning the
/// tangent space of a submanifold at `base`.
pub fn build_adapted_frame(base: &CpPoint, tangents: &[Tangent]) -> Result<AdaptedFrame> {
    let n = tangents.len();
    let m = base.m();
    if n < 1 || n >= 2 * m {
        return Err(Error::DimensionMismatch(format!(
            "{n} tangent vectors in CP^{m}"
        )));
    }
    let lifts: Vec<CVec> = tangents.iter().map(|t| t.lift().clone()).collect();
    let basis = complete_frame(base.coords(), &lifts)?;
    let structure = ComplexStructure::new(n, structure_matrix(&basis))?;
    let frame = AdaptedFrame {
        base: base.clone(),
        vectors: basis.into_iter().map(Tangent::from_horizontal_unchecked).collect(),
        structure,
    };
    let defect = orthonormality_defect(&frame);
    if defect > tolerances::ORTHONORMAL {
        return Err(Error::NonOrthonormal(defect));
    }
    Ok(frame)
}

pub fn orthonormality_defect(frame: &AdaptedFrame) -> f64 {
    let v = frame.vectors();
    let mut worst: f64 = 0.0;
    for a in 0..v.len() {
        for b in 0..v.len() {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((real_dot(v[a].lift(), v[b].lift()) - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{apply_j, metric, normalize_point, project_to_tangent};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> CVec {
        CVec::from_fn(len, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
    }

    #[test]
    fn frame_is_orthonormal_and_j_is_complex_structure() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (m, n) in [(2, 2), (2, 3), (3, 2), (4, 5)] {
            let p = normalize_point(random_vec(&mut rng, m + 1)).unwrap();
            let t: Vec<Tangent> = (0..n)
                .map(|_| project_to_tangent(&p, &random_vec(&mut rng, m + 1)).unwrap())
                .collect();
            let f = build_adapted_frame(&p, &t).unwrap();
            assert_eq!(f.vectors().len(), 2 * m);
            assert!(orthonormality_defect(&f) < 1e-12);
            let j = f.structure();
            let k = 2 * m;
            assert!((j.matrix() * j.matrix() + DMatrix::<f64>::identity(k, k)).amax() < 1e-12);
            // J_AB agrees with the metric definition.
            for a in 0..k {
                for b in 0..k {
                    let jb = apply_j(&f.vectors()[b]);
                    assert!((metric(&f.vectors()[a], &jb) - j.get(a, b)).abs() < 1e-12);
                }
            }
            assert!(j.p_norm2() <= (n.min(2 * m - n)) as f64 + 1e-12);
        }
    }

    #[test]
    fn dependent_tangents_are_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = normalize_point(random_vec(&mut rng, 3)).unwrap();
        let t = project_to_tangent(&p, &random_vec(&mut rng, 3)).unwrap();
        let err = build_adapted_frame(&p, &[t.clone(), t.scale(2.0)]).unwrap_err();
        assert!(matches!(err, Error::SingularTangent(_)));
    }

    #[test]
    fn complex_tangent_plane_has_no_normal_component_of_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = normalize_point(random_vec(&mut rng, 3)).unwrap();
        let t = project_to_tangent(&p, &random_vec(&mut rng, 3)).unwrap();
        let f = build_adapted_frame(&p, &[t.clone(), apply_j(&t)]).unwrap();
        assert!(f.structure().p_norm2() < 1e-20);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let sym = DMatrix::<f64>::identity(4, 4);
        assert!(matches!(ComplexStructure::new(2, sym), Err(Error::NotSkew(_))));
        let mut half = DMatrix::<f64>::zeros(4, 4);
        half[(0, 1)] = 0.5;
        half[(1, 0)] = -0.5;
        half[(2, 3)] = 1.0;
        half[(3, 2)] = -1.0;
        assert!(ComplexStructure::new(2, half).is_err());
    }
}
