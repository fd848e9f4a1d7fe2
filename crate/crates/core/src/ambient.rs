//! Complex projective space `CP^m` with the Fubini-Study metric of holomorphic
//! sectional curvature 4.
//!
//! Points are unit vectors of `C^{m+1}` modulo a global phase. Tangent vectors
//! at `z` are represented by their horizontal lifts `w` with `<w, z> = 0`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::tolerances;

pub type C64 = Complex<f64>;
pub type CVec = DVector<C64>;

/// Ambient and submanifold dimensions: an `n`-dimensional submanifold of
/// `CP^m` with codimension `q = 2m - n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub m: usize,
    pub n: usize,
    pub q: usize,
}

impl Dimensions {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if n < 2 || n >= 2 * m {
            return Err(Error::InvalidDimensions(format!(
                "need 2 <= n < 2m, got n={n}, m={m}"
            )));
        }
        Ok(Self { m, n, q: 2 * m - n })
    }

    pub fn from_nq(n: usize, q: usize) -> Result<Self> {
        if (n + q) % 2 != 0 {
            return Err(Error::InvalidDimensions(format!(
                "n + q must be even, got n={n}, q={q}"
            )));
        }
        Self::new((n + q) / 2, n)
    }

    /// Real dimension of the ambient space.
    pub fn real_dim(&self) -> usize {
        2 * self.m
    }
}

/// Hermitian product `<u, v> = sum u_k conj(v_k)`.
#[inline]
pub fn herm(u: &CVec, v: &CVec) -> C64 {
    v.dotc(u)
}

/// A point of `CP^m`: a unit representative whose first component of modulus
/// above [`tolerances::GAUGE_EPS`] is real and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct CpPoint {
    z: CVec,
}

impl CpPoint {
    pub fn coords(&self) -> &CVec {
        &self.z
    }

    /// Complex dimension `m` of the ambient space.
    pub fn m(&self) -> usize {
        self.z.len() - 1
    }

    pub fn into_coords(self) -> CVec {
        self.z
    }

    /// Wraps a unit vector as is, without gauge fixing.
    #[cfg(test)]
    pub(crate) fn from_unit_unchecked(z: CVec) -> Self {
        debug_assert!((z.norm() - 1.0).abs() < 1e-9);
        Self { z }
    }
}

/// Multiplies `z` by the unit phase that makes its gauge component real and
/// nonnegative.
pub fn gauge_fix(z: &mut CVec) {
    if let Some(c) = z.iter().find(|c| c.norm() > tolerances::GAUGE_EPS).copied() {
        let phase = c.conj() / c.norm();
        z.iter_mut().for_each(|x| *x *= phase);
    }
}

pub fn normalize_point(v: CVec) -> Result<CpPoint> {
    let norm = v.norm();
    if !(norm > tolerances::ZERO_NORM) || !norm.is_finite() {
        return Err(Error::DegenerateInput(format!("point norm {norm:e}")));
    }
    let mut z = v / C64::new(norm, 0.0);
    gauge_fix(&mut z);
    Ok(CpPoint { z })
}

/// A horizontal tangent vector at some base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent {
    w: CVec,
}

impl Tangent {
    /// Wraps `w` after checking that it is horizontal at `base`.
    pub fn new(base: &CpPoint, w: CVec) -> Result<Self> {
        check_len(base, &w)?;
        let defect = herm(&w, &base.z).norm();
        if defect > tolerances::HORIZONTAL * (1.0 + w.norm()) {
            return Err(Error::NonHorizontal(defect));
        }
        Ok(Self { w })
    }

    pub(crate) fn from_horizontal_unchecked(w: CVec) -> Self {
        Self { w }
    }

    pub fn lift(&self) -> &CVec {
        &self.w
    }

    pub fn into_lift(self) -> CVec {
        self.w
    }

    pub fn norm(&self) -> f64 {
        self.w.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { w: &self.w * C64::new(s, 0.0) }
    }

    pub fn add(&self, other: &Tangent) -> Self {
        Self { w: &self.w + &other.w }
    }
}

fn check_len(base: &CpPoint, v: &CVec) -> Result<()> {
    if v.len() != base.z.len() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} at a point of C^{}",
            v.len(),
            base.z.len()
        )));
    }
    Ok(())
}

/// Removes the components of `v` along `z` and `iz`.
pub fn horizontal_part(z: &CVec, v: &CVec) -> CVec {
    v - z * herm(v, z)
}

pub fn project_to_tangent(base: &CpPoint, v: &CVec) -> Result<Tangent> {
    check_len(base, v)?;
    Ok(Tangent { w: horizontal_part(&base.z, v) })
}

/// Riemannian metric `Re <u, v>`.
#[inline]
pub fn metric(u: &Tangent, v: &Tangent) -> f64 {
    herm(&u.w, &v.w).re
}

/// Complex structure: multiplication by `i`.
pub fn apply_j(v: &Tangent) -> Tangent {
    Tangent { w: v.w.map(|c| c * C64::i()) }
}

/// `<x, J y>`.
#[inline]
pub fn omega(x: &Tangent, y: &Tangent) -> f64 {
    herm(&x.w, &y.w).im
}

/// Geodesic distance `arccos |<p, r>|`, evaluated through `atan2` so that
/// nearby points keep full relative accuracy.
pub fn distance(p: &CpPoint, r: &CpPoint) -> Result<f64> {
    check_len(p, &r.z)?;
    Ok(distance_unchecked(&p.z, &r.z))
}

pub(crate) fn distance_unchecked(p: &CVec, r: &CVec) -> f64 {
    let c = herm(r, p);
    let sin = (r - p * c).norm();
    sin.atan2(c.norm())
}

/// Moves from `base` along the geodesic with initial velocity `v` for time `s`.
pub fn retract(base: &CpPoint, v: &Tangent, s: f64) -> Result<CpPoint> {
    check_len(base, &v.w)?;
    let len = v.w.norm();
    if len * s.abs() < tolerances::ZERO_NORM {
        return Ok(base.clone());
    }
    let t = s * len;
    let moved = &base.z * C64::new(t.cos(), 0.0) + &v.w * C64::new(t.sin() / len, 0.0);
    normalize_point(moved)
}

/// Riemann tensor `R(X, Y, Z, W)` of `CP^m` with holomorphic sectional curvature 4.
pub fn curvature(x: &Tangent, y: &Tangent, z: &Tangent, w: &Tangent) -> f64 {
    let g = metric;
    g(x, z) * g(y, w) - g(x, w) * g(y, z) + omega(x, z) * omega(y, w) - omega(x, w) * omega(y, z)
        + 2.0 * omega(x, y) * omega(z, w)
}

/// Sectional curvature of the plane spanned by `x` and `y`.
pub fn sectional_curvature(x: &Tangent, y: &Tangent) -> Result<f64> {
    let area = metric(x, x) * metric(y, y) - metric(x, y).powi(2);
    if area <= tolerances::ZERO_NORM * (1.0 + metric(x, x) * metric(y, y)) {
        return Err(Error::DegenerateInput("tangent vectors span no plane".into()));
    }
    Ok(curvature(x, y, x, y) / area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> CVec {
        CVec::from_fn(len, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        })
    }

    fn random_tangent(rng: &mut ChaCha8Rng, base: &CpPoint) -> Tangent {
        project_to_tangent(base, &random_vec(rng, base.coords().len())).unwrap()
    }

    #[test]
    fn dimensions_enforce_even_total() {
        assert!(Dimensions::from_nq(3, 1).is_ok());
        assert!(Dimensions::from_nq(6, 1).is_err());
        assert!(Dimensions::new(2, 4).is_err());
        assert_eq!(Dimensions::new(3, 4).unwrap().q, 2);
    }

    #[test]
    fn normalize_is_unit_and_gauge_fixed() {
        let p = normalize_point(CVec::from_vec(vec![
            C64::new(0.0, 3.0),
            C64::new(4.0, 0.0),
        ]))
        .unwrap();
        assert_relative_eq!(p.coords().norm(), 1.0, epsilon = 1e-15);
        assert!(p.coords()[0].im.abs() < 1e-15 && p.coords()[0].re > 0.0);
        assert!(normalize_point(CVec::zeros(3)).is_err());
    }

    #[test]
    fn gauge_skips_vanishing_components() {
        let p = normalize_point(CVec::from_vec(vec![
            C64::new(0.0, 0.0),
            C64::new(0.0, -2.0),
            C64::new(1.0, 1.0),
        ]))
        .unwrap();
        assert_eq!(p.coords()[0], C64::new(0.0, 0.0));
        assert!(p.coords()[1].im.abs() < 1e-15 && p.coords()[1].re > 0.0);
    }

    #[test]
    fn projection_is_horizontal_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = normalize_point(random_vec(&mut rng, 4)).unwrap();
        let t = random_tangent(&mut rng, &p);
        assert!(herm(t.lift(), p.coords()).norm() < 1e-14);
        let again = project_to_tangent(&p, t.lift()).unwrap();
        assert!((again.lift() - t.lift()).norm() < 1e-14);
    }

    #[test]
    fn tangent_rejects_vertical_vector() {
        let p = normalize_point(CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]))
            .unwrap();
        let vertical = p.coords() * C64::i();
        assert!(matches!(Tangent::new(&p, vertical), Err(Error::NonHorizontal(_))));
    }

    #[test]
    fn distance_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let p = normalize_point(random_vec(&mut rng, 3)).unwrap();
            let r = normalize_point(random_vec(&mut rng, 3)).unwrap();
            let d = distance(&p, &r).unwrap();
            assert!((0.0..=std::f64::consts::FRAC_PI_2 + 1e-15).contains(&d));
            assert_relative_eq!(d, distance(&r, &p).unwrap(), epsilon = 1e-14);
            assert!(distance(&p, &p).unwrap() < 1e-15);
            let acos = herm(r.coords(), p.coords()).norm().min(1.0).acos();
            assert_relative_eq!(d, acos, epsilon = 1e-7);
        }
        let e0 = normalize_point(CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]))
            .unwrap();
        let e1 = normalize_point(CVec::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]))
            .unwrap();
        assert_relative_eq!(distance(&e0, &e1).unwrap(), std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn retract_travels_geodesic_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = normalize_point(random_vec(&mut rng, 4)).unwrap();
        let t = random_tangent(&mut rng, &p);
        let unit = t.scale(1.0 / t.norm());
        for &s in &[0.0, 1e-6, 0.1, 0.7, 1.5] {
            let q = retract(&p, &unit, s).unwrap();
            assert_relative_eq!(distance(&p, &q).unwrap(), s, epsilon = 1e-12);
        }
        assert_eq!(retract(&p, &unit, 0.0).unwrap(), p);
    }

    #[test]
    fn curvature_symmetries_and_bianchi() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = normalize_point(random_vec(&mut rng, 4)).unwrap();
        let v: Vec<Tangent> = (0..4).map(|_| random_tangent(&mut rng, &p)).collect();
        let (x, y, z, w) = (&v[0], &v[1], &v[2], &v[3]);
        let r = curvature(x, y, z, w);
        assert_relative_eq!(r, -curvature(y, x, z, w), epsilon = 1e-12);
        assert_relative_eq!(r, -curvature(x, y, w, z), epsilon = 1e-12);
        assert_relative_eq!(r, curvature(z, w, x, y), epsilon = 1e-12);
        let bianchi = r + curvature(y, z, x, w) + curvature(z, x, y, w);
        assert!(bianchi.abs() < 1e-12);
    }

    #[test]
    fn holomorphic_and_totally_real_planes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = normalize_point(random_vec(&mut rng, 3)).unwrap();
        let x = random_tangent(&mut rng, &p);
        assert_relative_eq!(sectional_curvature(&x, &apply_j(&x)).unwrap(), 4.0, epsilon = 1e-12);
        // A vector orthogonal to both x and Jx spans a totally real plane with x.
        let mut y = random_tangent(&mut rng, &p);
        for b in [x.clone(), apply_j(&x)] {
            let c = metric(&y, &b) / metric(&b, &b);
            y = y.add(&b.scale(-c));
        }
        assert_relative_eq!(sectional_curvature(&x, &y).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sectional_curvature_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let p = normalize_point(random_vec(&mut rng, 4)).unwrap();
            let x = random_tangent(&mut rng, &p);
            let y = random_tangent(&mut rng, &p);
            let k = sectional_curvature(&x, &y).unwrap();
            assert!((1.0 - 1e-12..=4.0 + 1e-12).contains(&k));
            let expected = 1.0 + 3.0 * omega(&x, &y).powi(2)
                / (metric(&x, &x) * metric(&y, &y) - metric(&x, &y).powi(2));
            assert_relative_eq!(k, expected, epsilon = 1e-10);
        }
    }
}
