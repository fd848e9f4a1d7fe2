use serde::{Deserialize, Serialize};

use super::frame::ComplexStructure;
use super::sff::Sff;
use crate::error::{Error, Result};

/// Summation strategy used when evaluating the reaction terms.
pub trait Accumulator: Default {
    fn add(&mut self, x: f64);
    fn value(&self) -> f64;
}

#[derive(Default)]
pub struct PlainSum(f64);

impl Accumulator for PlainSum {
    #[inline]
    fn add(&mut self, x: f64) {
        self.0 += x;
    }
    #[inline]
    fn value(&self) -> f64 {
        self.0
    }
}

/// Neumaier's compensated summation.
#[derive(Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl Accumulator for CompensatedSum {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }
    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Reaction terms appearing in the evolution equations of `|h|^2` and `|H|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionTerms {
    pub r1: f64,
    pub r2: f64,
    pub s1: f64,
    pub s2: f64,
    pub r3: f64,
    pub s3: f64,
}

fn check(h: &Sff, j: &ComplexStructure) -> Result<()> {
    if j.n() != h.n() || j.q() != h.q() {
        return Err(Error::DimensionMismatch(format!(
            "form with (n={}, q={}) against structure with (n={}, q={})",
            h.n(),
            h.q(),
            j.n(),
            j.q()
        )));
    }
    Ok(())
}

pub fn reaction_terms(h: &Sff, j: &ComplexStructure) -> Result<ReactionTerms> {
    reaction_terms_with::<PlainSum>(h, j)
}

/// Same as [`reaction_terms`] with compensated summation throughout.
pub fn reaction_terms_compensated(h: &Sff, j: &ComplexStructure) -> Result<ReactionTerms> {
    reaction_terms_with::<CompensatedSum>(h, j)
}

pub fn reaction_terms_with<A: Accumulator>(h: &Sff, j: &ComplexStructure) -> Result<ReactionTerms> {
    check(h, j)?;
    let tl = h.traceless();
    Ok(ReactionTerms {
        r1: r1::<A>(h),
        r2: r2::<A>(h),
        s1: s1::<A>(h, &tl, j, false),
        s2: s2::<A>(h, j),
        r3: r3::<A>(h),
        s3: s3::<A>(h, &tl, j),
    })
}

/// `R_3 = sum H^alpha h^alpha_ik h^beta_ij h^beta_jk` alone.
pub fn r3_term(h: &Sff, compensated: bool) -> f64 {
    if compensated {
        r3::<CompensatedSum>(h)
    } else {
        r3::<PlainSum>(h)
    }
}

/// `S_1` with the full form `h` in place of the traceless part in the sums
/// weighted by 6 and 8.
pub fn s1_full_form_variant(h: &Sff, j: &ComplexStructure) -> Result<f64> {
    check(h, j)?;
    Ok(s1::<PlainSum>(h, &h.traceless(), j, true))
}

fn r1<A: Accumulator>(h: &Sff) -> f64 {
    let (n, q) = (h.n(), h.q());
    let mut total = A::default();
    for a in 0..q {
        for b in 0..q {
            let mut inner = A::default();
            for i in 0..n {
                for k in 0..n {
                    inner.add(h.get(a, i, k) * h.get(b, i, k));
                }
            }
            total.add(inner.value().powi(2));
        }
    }
    for i in 0..n {
        for jj in 0..n {
            for a in 0..q {
                for b in 0..q {
                    let mut inner = A::default();
                    for k in 0..n {
                        inner.add(h.get(a, i, k) * h.get(b, jj, k));
                        inner.add(-h.get(b, i, k) * h.get(a, jj, k));
                    }
                    total.add(inner.value().powi(2));
                }
            }
        }
    }
    total.value()
}

fn r2<A: Accumulator>(h: &Sff) -> f64 {
    let (n, q) = (h.n(), h.q());
    let mean = h.mean();
    let mut total = A::default();
    for i in 0..n {
        for k in 0..n {
            let mut inner = A::default();
            for a in 0..q {
                inner.add(mean[a] * h.get(a, i, k));
            }
            total.add(inner.value().powi(2));
        }
    }
    total.value()
}

fn s1<A: Accumulator>(h: &Sff, tl: &Sff, j: &ComplexStructure, full_form: bool) -> f64 {
    let (n, q) = (h.n(), h.q());
    let g = if full_form { h } else { tl };
    let mut first = A::default();
    for i in 0..n {
        for jj in 0..n {
            for k in 0..n {
                let mut inner = A::default();
                for a in 0..q {
                    inner.add(h.get(a, i, jj) * j.tn(k, a));
                }
                first.add(inner.value().powi(2));
            }
        }
    }
    let mut second = A::default();
    for a in 0..q {
        for b in 0..q {
            for i in 0..n {
                for jj in 0..n {
                    let coef = j.tn(i, a) * j.tn(jj, b) - j.tn(i, b) * j.tn(jj, a);
                    if coef == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        second.add(tl.get(a, i, k) * tl.get(b, jj, k) * coef);
                    }
                }
            }
        }
    }
    let third = third_sum::<A>(g, j);
    let mut fourth = A::default();
    for a in 0..q {
        for b in 0..q {
            let jab = j.nn(a, b);
            if jab == 0.0 {
                continue;
            }
            for i in 0..n {
                for jj in 0..n {
                    for k in 0..n {
                        fourth.add(g.get(a, i, k) * g.get(b, jj, k) * jab * j.get(i, jj));
                    }
                }
            }
        }
    }
    let mut total = A::default();
    total.add(3.0 * first.value());
    total.add(4.0 * second.value());
    total.add(6.0 * third);
    total.add(8.0 * fourth.value());
    total.value()
}

/// `sum g_ij g_kl J_il J_jk - g_ik g_jk J_il J_jl` over `alpha, i, j, k, l`,
/// with the inner sums over `k` (and `l`) accumulated first.
fn third_sum<A: Accumulator>(g: &Sff, j: &ComplexStructure) -> f64 {
    let (n, q) = (g.n(), g.q());
    let mut third = A::default();
    let mut jg = vec![0.0; n * n];
    let mut jj_t = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..n {
            let mut acc = A::default();
            for k in 0..n {
                acc.add(j.get(i, k) * j.get(l, k));
            }
            jj_t[i * n + l] = acc.value();
        }
    }
    for a in 0..q {
        for jj in 0..n {
            for l in 0..n {
                let mut acc = A::default();
                for k in 0..n {
                    acc.add(j.get(jj, k) * g.get(a, k, l));
                }
                jg[jj * n + l] = acc.value();
            }
        }
        for i in 0..n {
            for jj in 0..n {
                let mut cross = A::default();
                let mut square = A::default();
                for l in 0..n {
                    cross.add(jg[jj * n + l] * j.get(i, l));
                    square.add(g.get(a, i, l) * g.get(a, jj, l));
                }
                third.add(g.get(a, i, jj) * cross.value());
                third.add(-square.value() * jj_t[i * n + jj]);
            }
        }
    }
    third.value()
}

fn s2<A: Accumulator>(h: &Sff, j: &ComplexStructure) -> f64 {
    let mean = h.mean();
    let mut total = A::default();
    for k in 0..h.n() {
        let mut inner = A::default();
        for (a, m) in mean.iter().enumerate() {
            inner.add(m * j.tn(k, a));
        }
        total.add(inner.value().powi(2));
    }
    total.value()
}

fn r3<A: Accumulator>(h: &Sff) -> f64 {
    let (n, q) = (h.n(), h.q());
    let mean = h.mean();
    let mut total = A::default();
    for a in 0..q {
        for b in 0..q {
            for i in 0..n {
                for jj in 0..n {
                    for k in 0..n {
                        total.add(mean[a] * h.get(a, i, k) * h.get(b, i, jj) * h.get(b, jj, k));
                    }
                }
            }
        }
    }
    total.value()
}

fn s3<A: Accumulator>(h: &Sff, tl: &Sff, j: &ComplexStructure) -> f64 {
    let (n, q) = (h.n(), h.q());
    let mean = h.mean();
    let mut total = A::default();
    for a in 0..q {
        for b in 0..q {
            for i in 0..n {
                for jj in 0..n {
                    total.add(tl.get(a, i, jj) * mean[b] * j.tn(i, a) * j.tn(jj, b));
                }
            }
        }
    }
    total.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::sampling::{random_complex_structure, random_sff};
    use crate::tensor::sff::sff_invariants;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hypersurface_reduces_to_scalar_terms() {
        // For q = 1: R1 = |h|^4, R2 = |H|^2 |h|^2, S2 = |H|^2 since |P e|^2 = 1.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h = random_sff(&mut rng, 5, 1, 1.0);
        let j = random_complex_structure(&mut rng, 5, 1);
        let t = reaction_terms(&h, &j).unwrap();
        assert_relative_eq!(t.r1, h.norm2().powi(2), max_relative = 1e-12);
        assert_relative_eq!(t.r2, h.mean_norm2() * h.norm2(), max_relative = 1e-12);
        assert_relative_eq!(t.s2, h.mean_norm2(), max_relative = 1e-12);
    }

    #[test]
    fn r2_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for (n, q) in [(8, 2), (6, 6), (9, 3)] {
            let h = random_sff(&mut rng, n, q, 2.0);
            let j = random_complex_structure(&mut rng, n, q);
            let t = reaction_terms(&h, &j).unwrap();
            let inv = sff_invariants(&h, &j).unwrap();
            assert_relative_eq!(t.r2, inv.mean2 * (inv.h2 - inv.rho2), max_relative = 1e-10);
        }
    }

    #[test]
    fn terms_are_frame_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (n, q) = (4, 4);
        let h = random_sff(&mut rng, n, q, 1.0);
        let j = random_complex_structure(&mut rng, n, q);
        let rot_n = crate::oracles::sampling::random_orthogonal(&mut rng, q);
        let rot_t = crate::oracles::sampling::random_orthogonal(&mut rng, n);
        let h2 = h.rotate_normal(&rot_n).rotate_tangent(&rot_t);
        let j2 = j.rotate_normal(&rot_n).rotate_tangent(&rot_t);
        let a = reaction_terms(&h, &j).unwrap();
        let b = reaction_terms(&h2, &j2).unwrap();
        for (x, y) in [(a.r1, b.r1), (a.r2, b.r2), (a.s1, b.s1), (a.s2, b.s2), (a.r3, b.r3), (a.s3, b.s3)] {
            assert_relative_eq!(x, y, epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    fn third_sum_reference(g: &Sff, j: &ComplexStructure) -> f64 {
        let (n, q) = (g.n(), g.q());
        let mut total = 0.0;
        for a in 0..q {
            for i in 0..n {
                for jj in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            total += g.get(a, i, jj) * g.get(a, k, l) * j.get(i, l) * j.get(jj, k);
                            total -= g.get(a, i, k) * g.get(a, jj, k) * j.get(i, l) * j.get(jj, l);
                        }
                    }
                }
            }
        }
        total
    }

    #[test]
    fn factored_third_sum_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for (n, q) in [(5, 3), (6, 2), (4, 4)] {
            let h = random_sff(&mut rng, n, q, 1.0);
            let j = random_complex_structure(&mut rng, n, q);
            for g in [h.clone(), h.traceless()] {
                assert_relative_eq!(third_sum::<PlainSum>(&g, &j), third_sum_reference(&g, &j), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn compensated_matches_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let h = random_sff(&mut rng, 6, 6, 1.0);
        let j = random_complex_structure(&mut rng, 6, 6);
        let a = reaction_terms(&h, &j).unwrap();
        let b = reaction_terms_compensated(&h, &j).unwrap();
        assert_relative_eq!(a.s1, b.s1, epsilon = 1e-10);
        assert_relative_eq!(a.r1, b.r1, max_relative = 1e-12);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let mut acc = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            acc.add(x);
        }
        assert_eq!(acc.value(), 2.0);
    }

    #[test]
    fn zero_form_gives_zero_terms() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let j = ComplexStructure::new(1, j).unwrap();
        let t = reaction_terms(&Sff::zeros(1, 1), &j).unwrap();
        assert_eq!(t, ReactionTerms { r1: 0.0, r2: 0.0, s1: 0.0, s2: 0.0, r3: 0.0, s3: 0.0 });
    }
}
