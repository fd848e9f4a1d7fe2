use serde::Serialize;

use crate::error::{Error, Result};

/// Constants of `psi(x) = nu + kappa x - sqrt(lambda^2 x^2 + 2 lambda mu x + nu^2)`,
/// the pinching function for high codimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiParams {
    pub n: usize,
    pub lambda: f64,
    pub kappa: f64,
    pub nu: f64,
    pub mu: f64,
}

/// Coefficients of the quadratic whose sign decides the reaction inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubicCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl PsiParams {
    pub fn new(n: usize) -> Result<Self> {
        if n < 6 {
            return Err(Error::InvalidDimensions(format!("psi needs n >= 6, got {n}")));
        }
        let nf = n as f64;
        let lambda = 3.0 / (nf.powi(3) - 4.0 * nf * nf + 3.0);
        let nu = 9.0 / (nf * nf - 3.0 * nf - 3.0);
        Ok(Self { n, lambda, kappa: lambda + 1.0 / (nf - 1.0), nu, mu: nu + 3.0 / nf })
    }

    fn radicand(&self, x: f64) -> f64 {
        let l = self.lambda;
        l * l * x * x + 2.0 * l * self.mu * x + self.nu * self.nu
    }

    fn check(&self, x: f64) -> Result<()> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::Domain(format!("psi is defined for finite x >= 0, got {x}")));
        }
        Ok(())
    }

    pub fn psi(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.nu + self.kappa * x - self.radicand(x).sqrt())
    }

    pub fn psi_prime(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let l = self.lambda;
        Ok(self.kappa - (l * l * x + l * self.mu) / self.radicand(x).sqrt())
    }

    pub fn psi_second(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let l = self.lambda;
        Ok(l * l * (self.mu * self.mu - self.nu * self.nu) / self.radicand(x).powf(1.5))
    }

    /// `psi(x) - x / n`.
    pub fn ring(&self, x: f64) -> Result<f64> {
        Ok(self.psi(x)? - x / self.n as f64)
    }

    pub fn ring_prime(&self, x: f64) -> Result<f64> {
        Ok(self.psi_prime(x)? - 1.0 / self.n as f64)
    }

    pub fn ring_second(&self, x: f64) -> Result<f64> {
        self.psi_second(x)
    }

    /// `2 x psi'' + psi'`.
    pub fn diffusion(&self, x: f64) -> Result<f64> {
        Ok(2.0 * x * self.psi_second(x)? + self.psi_prime(x)?)
    }

    /// Location `nu / lambda` of the maximum of [`Self::diffusion`].
    pub fn diffusion_argmax(&self) -> f64 {
        self.nu / self.lambda
    }

    /// Closed-form maximum `kappa - lambda sqrt(2 nu / (mu + nu))`.
    pub fn diffusion_max(&self) -> f64 {
        self.kappa - self.lambda * (2.0 * self.nu / (self.mu + self.nu)).sqrt()
    }

    /// The same maximum written as a function of `n` alone.
    pub fn diffusion_max_in_n(&self) -> f64 {
        let nf = self.n as f64;
        (nf * (nf - 3.0) - 3.0 * (6.0 * nf / (nf * nf + 3.0 * nf - 3.0)).sqrt())
            / (nf.powi(3) - 4.0 * nf * nf + 3.0)
    }

    pub fn cubic(&self) -> CubicCoefficients {
        let (l, k, nu, mu) = (self.lambda, self.kappa, self.nu, self.mu);
        let nf = self.n as f64;
        CubicCoefficients {
            a: k * mu + 3.0 * l + l * nu,
            b: nf + 3.0 + 2.0 * nu,
            c: k * nu * nu + l * mu * (nf + 6.0 + 3.0 * nu),
        }
    }

    /// `nu^2 (A - lambda B)^2 + 4 lambda mu nu A B - C^2`.
    pub fn discriminant(&self) -> f64 {
        let CubicCoefficients { a, b, c } = self.cubic();
        let (l, nu, mu) = (self.lambda, self.nu, self.mu);
        nu * nu * (a - l * b).powi(2) + 4.0 * l * mu * nu * a * b - c * c
    }

    /// `-81 (n^3 - 12 n + 9)^2 / (n^2 (n-1)^2 (n^2 - 3n - 3)^4)`.
    pub fn discriminant_in_n(&self) -> f64 {
        let nf = self.n as f64;
        -81.0 * (nf.powi(3) - 12.0 * nf + 9.0).powi(2)
            / (nf * nf * (nf - 1.0).powi(2) * (nf * nf - 3.0 * nf - 3.0).powi(4))
    }

    /// `psi` written with explicit rational coefficients in `n`.
    pub fn psi_in_n(&self, x: f64) -> f64 {
        let nf = self.n as f64;
        let den = nf.powi(3) - 4.0 * nf * nf + 3.0;
        9.0 / (nf * nf - 3.0 * nf - 3.0) + (nf * nf - 3.0 * nf) / den * x
            - 3.0
                * (x * x + 2.0 / nf * (nf - 1.0) * (nf * nf - 3.0) * x + 9.0 * (nf - 1.0).powi(2))
                    .sqrt()
                / den
    }
}
