use serde::Serialize;

use crate::error::{Error, Result};

/// Constants of `phi_eps(x) = d + c x - sqrt(b^2 x^2 + 2 a b x + e)`, the
/// hypersurface pinching function, and of its traceless shift `phi - x/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiParams {
    pub n: usize,
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl PhiParams {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("phi needs n >= 3, got {n}")));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::Domain(format!("eps must be a finite nonnegative number, got {eps}")));
        }
        let nf = n as f64;
        let b = ((nf - 3.0) / (4.0 * nf - 4.0)).min((2.0 * nf - 5.0) / (nf * nf + nf - 2.0));
        let a = 2.0 * ((nf * nf - 4.0 * nf + 3.0) * b).sqrt();
        Ok(Self {
            n,
            eps,
            a,
            b,
            c: b + 1.0 / (nf - 1.0 + eps),
            d: 2.0 - 2.0 * eps + a,
            e: eps.sqrt(),
        })
    }

    fn radicand(&self, x: f64) -> f64 {
        self.b * self.b * x * x + 2.0 * self.a * self.b * x + self.e
    }

    fn check(&self, x: f64) -> Result<()> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("phi is defined for finite x >= 0, got {x}")));
        }
        Ok(())
    }

    fn check_smooth(&self, x: f64) -> Result<()> {
        self.check(x)?;
        if self.radicand(x) <= 0.0 && self.a * self.b != 0.0 {
            return Err(Error::Domain(format!("phi is not differentiable at x = {x} when eps = 0")));
        }
        Ok(())
    }

    pub fn phi(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.d + self.c * x - self.radicand(x).sqrt())
    }

    pub fn phi_prime(&self, x: f64) -> Result<f64> {
        self.check_smooth(x)?;
        let s = self.radicand(x).sqrt();
        if s == 0.0 {
            return Ok(self.c);
        }
        Ok(self.c - (self.b * self.b * x + self.a * self.b) / s)
    }

    pub fn phi_second(&self, x: f64) -> Result<f64> {
        self.check_smooth(x)?;
        let r = self.radicand(x);
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(self.b * self.b * (self.a * self.a - self.e) / r.powf(1.5))
    }

    /// `phi(x) - x / n`.
    pub fn ring(&self, x: f64) -> Result<f64> {
        Ok(self.phi(x)? - x / self.n as f64)
    }

    pub fn ring_prime(&self, x: f64) -> Result<f64> {
        Ok(self.phi_prime(x)? - 1.0 / self.n as f64)
    }

    pub fn ring_second(&self, x: f64) -> Result<f64> {
        self.phi_second(x)
    }

    /// Critical point of `phi` with `e` set to zero (the exact minimizer when `eps = 0`).
    pub fn minimizer(&self) -> f64 {
        let (a, b, c) = (self.a, self.b, self.c);
        if b == 0.0 {
            return 0.0;
        }
        a * c / (b * (c * c - b * b).sqrt()) - a / b
    }

    /// Value of `phi` at [`Self::minimizer`] with `e` set to zero.
    pub fn min_value(&self) -> f64 {
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        if b == 0.0 {
            return d;
        }
        d - a * c / b + a / b * (c * c - b * b).sqrt()
    }

    /// Limit of `phi_ring (phi - n + 3) - x phi_ring' (phi + n + 3)` as `x -> oo`.
    pub fn reaction_limit(&self) -> f64 {
        let nf = self.n as f64;
        let dd = self.d - self.a;
        let gamma = self.c - self.b;
        let delta_gamma = if self.b == 0.0 {
            0.0
        } else {
            (self.a * self.a - self.e) / (2.0 * self.b) * gamma
        };
        dd * dd + 2.0 * delta_gamma + (3.0 - nf) * dd
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn n3_is_linear() {
        let p = PhiParams::new(3, 0.0).unwrap();
        for x in [0.0, 1.0, 17.5, 1e4] {
            assert_relative_eq!(p.phi(x).unwrap(), x / 2.0 + 2.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn constants_for_n5() {
        let p = PhiParams::new(5, 0.0).unwrap();
        assert_relative_eq!(p.b, 0.125);
        assert_relative_eq!(p.a, 2.0);
        assert_relative_eq!(p.phi(0.0).unwrap(), 4.0);
        assert_relative_eq!(p.min_value(), 4.0 * 2f64.sqrt() - 2.0, max_relative = 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for n in [5, 7, 11] {
            let p = PhiParams::new(n, 1e-4).unwrap();
            for x in [0.3, 2.0, 40.0] {
                let h = 1e-5 * (1.0 + x);
                let fd1 = (p.phi(x + h).unwrap() - p.phi(x - h).unwrap()) / (2.0 * h);
                let fd2 = (p.phi_prime(x + h).unwrap() - p.phi_prime(x - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(p.phi_prime(x).unwrap(), fd1, max_relative = 1e-7);
                assert_relative_eq!(p.phi_second(x).unwrap(), fd2, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn domain_errors() {
        let p = PhiParams::new(5, 0.0).unwrap();
        assert!(p.phi(-1.0).is_err());
        assert!(p.phi_prime(0.0).is_err());
        assert!(PhiParams::new(2, 0.0).is_err());
        assert!(PhiParams::new(5, -1.0).is_err());
        assert!(PhiParams::new(5, 1e-6).unwrap().phi_prime(0.0).unwrap().is_finite());
    }

    #[test]
    fn minimizer_is_critical() {
        for n in [5, 7, 9, 25] {
            let p = PhiParams::new(n, 0.0).unwrap();
            let x = p.minimizer();
            assert!(x > 0.0);
            assert!(p.phi_prime(x).unwrap().abs() < 1e-12);
            assert_relative_eq!(p.phi(x).unwrap(), p.min_value(), max_relative = 1e-13);
        }
    }
}
