//! Grid verification of the inequalities satisfied by the pinching functions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::phi::PhiParams;
use super::psi::PsiParams;
use crate::error::{Error, Result};

/// Sample points: `linear_points` evenly spaced on `[0, linear_max]` and
/// `log_points` geometrically spaced on `[linear_max, x_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub linear_points: usize,
    pub linear_max: f64,
    pub log_points: usize,
    pub x_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { linear_points: 5000, linear_max: 100.0, log_points: 5000, x_max: 1e6 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.linear_points < 2 || self.log_points < 2 {
            return Err(Error::Config("grid needs at least two points per segment".into()));
        }
        if !(self.linear_max > 0.0 && self.x_max > self.linear_max && self.x_max.is_finite()) {
            return Err(Error::Config(format!(
                "grid needs 0 < linear_max < x_max, got {} and {}",
                self.linear_max, self.x_max
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = (0..self.linear_points)
            .map(|i| self.linear_max * i as f64 / (self.linear_points - 1) as f64)
            .collect();
        let ratio = (self.x_max / self.linear_max).ln();
        xs.extend(
            (1..self.log_points)
                .map(|i| self.linear_max * (ratio * i as f64 / (self.log_points - 1) as f64).exp()),
        );
        xs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppendixConfig {
    pub phi_n: Vec<usize>,
    pub psi_n: Vec<usize>,
    pub eps: Vec<f64>,
    pub grid: GridSpec,
    /// Relative tolerance accepted for equality cases, scaled by `1 + |value|`.
    pub leakage: f64,
}

impl Default for AppendixConfig {
    fn default() -> Self {
        Self {
            phi_n: vec![3, 5, 7, 9, 11, 15, 25],
            psi_n: vec![6, 8, 10, 14, 20],
            eps: vec![1e-8, 1e-6, 1e-4, 1e-2],
            grid: GridSpec::default(),
            leakage: 1e-12,
        }
    }
}

impl AppendixConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if let Some(&n) = self.phi_n.iter().find(|&&n| n < 3) {
            return Err(Error::Config(format!("phi needs n >= 3, got {n}")));
        }
        if let Some(&n) = self.psi_n.iter().find(|&&n| n < 6) {
            return Err(Error::Config(format!("psi needs n >= 6, got {n}")));
        }
        if let Some(&e) = self.eps.iter().find(|&&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::Config(format!("eps values must lie in (0, 1], got {e}")));
        }
        if !(self.leakage >= 0.0) {
            return Err(Error::Config(format!("leakage must be nonnegative, got {}", self.leakage)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    /// `slack > 1e-12 (1 + scale)` everywhere.
    Strict,
    /// Equality at `x = 0` (up to leakage), strict for `x > 0`.
    EqualityAtZero,
    /// `|slack| <= leakage (1 + scale)` everywhere.
    Identity,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityRecord {
    pub inequality: String,
    pub n: usize,
    pub eps: Option<f64>,
    pub min_slack: f64,
    pub argmin_x: f64,
    pub pass: bool,
    #[serde(skip)]
    pub strictness: Strictness,
    #[serde(skip)]
    pub first_failure: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedFormRecord {
    pub check: String,
    pub n: usize,
    pub eps: Option<f64>,
    pub computed: f64,
    pub expected: f64,
    pub pass: bool,
}

/// Largest tested `eps` for which every `eps`-dependent inequality passes.
#[derive(Debug, Clone, Serialize)]
pub struct EpsVerdict {
    pub n: usize,
    pub largest_passing_eps: Option<f64>,
    /// The passing values form an initial segment of the sorted `eps` set.
    pub downward_closed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AppendixReport {
    pub inequalities: Vec<InequalityRecord>,
    pub closed_forms: Vec<ClosedFormRecord>,
    pub eps_verdicts: Vec<EpsVerdict>,
    pub all_pass: bool,
}

const STRICT: f64 = 1e-12;

struct Sweep<'a> {
    xs: &'a [f64],
    leakage: f64,
}

impl Sweep<'_> {
    /// `f` returns `(slack, scale)`; the inequality claims `slack > 0` (or `= 0`).
    fn run(
        &self,
        name: &str,
        n: usize,
        eps: Option<f64>,
        strictness: Strictness,
        f: impl Fn(f64) -> Result<(f64, f64)>,
    ) -> Result<InequalityRecord> {
        let mut min_slack = f64::INFINITY;
        let mut argmin_x = f64::NAN;
        let mut first_failure = None;
        for &x in self.xs {
            let (slack, scale) = f(x)?;
            let strict_tol = STRICT * (1.0 + scale.abs());
            let leak_tol = self.leakage * (1.0 + scale.abs());
            let ok = match strictness {
                Strictness::Strict => slack > strict_tol,
                Strictness::EqualityAtZero if x == 0.0 => slack.abs() <= leak_tol,
                Strictness::EqualityAtZero => slack > strict_tol,
                Strictness::Identity => slack.abs() <= leak_tol,
            };
            if !ok && first_failure.is_none() {
                first_failure = Some(x);
            }
            if slack < min_slack || argmin_x.is_nan() {
                min_slack = slack;
                argmin_x = x;
            }
        }
        Ok(InequalityRecord {
            inequality: name.to_string(),
            n,
            eps,
            min_slack,
            argmin_x,
            pass: first_failure.is_none(),
            strictness,
            first_failure,
        })
    }
}

fn closed(check: &str, n: usize, eps: Option<f64>, computed: f64, expected: f64, rel: f64) -> ClosedFormRecord {
    let pass = (computed - expected).abs() <= rel * (1.0 + expected.abs());
    ClosedFormRecord { check: check.to_string(), n, eps, computed, expected, pass }
}

fn scale2(a: f64, b: f64) -> f64 {
    a.abs().max(b.abs())
}

/// `phi°(phi - n + 3) - x phi°' (phi + n + 3)`.
fn phi_reaction(p: &PhiParams, x: f64) -> Result<f64> {
    let nf = p.n as f64;
    let phi = p.phi(x)?;
    Ok(p.ring(x)? * (phi - nf + 3.0) - x * p.ring_prime(x)? * (phi + nf + 3.0))
}

/// `3 psi° + (psi° - x psi°')(psi° + x/n + n)`.
fn psi_ring_reaction(p: &PsiParams, x: f64) -> Result<f64> {
    let nf = p.n as f64;
    let r = p.ring(x)?;
    Ok(3.0 * r + (r - x * p.ring_prime(x)?) * (r + x / nf + nf))
}

/// `3 psi - 3x/n + (psi - x psi')(psi + n)`.
fn psi_reaction(p: &PsiParams, x: f64) -> Result<f64> {
    let nf = p.n as f64;
    let s = p.psi(x)?;
    Ok(3.0 * s - 3.0 * x / nf + (s - x * p.psi_prime(x)?) * (s + nf))
}

fn with_points(base: &[f64], extra: &[f64]) -> Vec<f64> {
    let mut xs = base.to_vec();
    xs.extend(extra.iter().copied().filter(|x| x.is_finite() && *x >= 0.0));
    xs
}

fn phi_family(cfg: &AppendixConfig, grid: &[f64], n: usize, out: &mut AppendixReport) -> Result<()> {
    let nf = n as f64;
    let p0 = PhiParams::new(n, 0.0)?;
    let xs = with_points(grid, &[p0.minimizer()]);
    let sweep = Sweep { xs: &xs, leakage: cfg.leakage };
    let lower_kind = if n == 3 { Strictness::Identity } else { Strictness::Strict };
    out.inequalities.push(sweep.run("phi_lower", n, None, lower_kind, |x| {
        let (v, bound) = (p0.phi(x)?, x / (nf - 1.0) + 2.0);
        Ok((v - bound, scale2(v, bound)))
    })?);
    out.inequalities.push(sweep.run("phi_upper", n, None, Strictness::Strict, |x| {
        let (v, bound) = (p0.phi(x)?, x / (nf - 1.0) + nf);
        Ok((bound - v, scale2(v, bound)))
    })?);
    out.inequalities.push(sweep.run("phi_floor", n, None, Strictness::Strict, |x| {
        let (v, bound) = (p0.phi(x)?, (2.0 * (nf - 3.0)).sqrt());
        Ok((v - bound, scale2(v, bound)))
    })?);

    if n >= 5 {
        let x = p0.minimizer();
        out.closed_forms.push(closed("phi_min_at_minimizer", n, None, p0.phi(x)?, p0.min_value(), 1e-12));
        let expected = if n == 5 {
            4.0 * 2f64.sqrt() - 2.0
        } else {
            2.0 + 2.0 * ((nf - 3.0) / (2.0 * nf - 5.0)).sqrt() * ((5.0 * nf - 8.0).sqrt() - (nf + 2.0).sqrt())
        };
        out.closed_forms.push(closed("phi_min_value", n, None, p0.min_value(), expected, 1e-10));
        let grid_min = xs.iter().map(|&x| p0.phi(x)).collect::<Result<Vec<_>>>()?;
        let grid_min = grid_min.into_iter().fold(f64::INFINITY, f64::min);
        out.closed_forms.push(ClosedFormRecord {
            check: "phi_grid_min_not_below_closed_form".into(),
            n,
            eps: None,
            computed: grid_min,
            expected: p0.min_value(),
            pass: grid_min >= p0.min_value() - 1e-12 * (1.0 + p0.min_value().abs()),
        });
    }

    for &eps in &cfg.eps {
        let p = PhiParams::new(n, eps)?;
        let e = Some(eps);
        out.inequalities.push(sweep.run("phi_ring_diffusion", n, e, Strictness::Strict, |x| {
            let v = 2.0 * x * p.ring_second(x)? + p.ring_prime(x)?;
            let bound = 2.0 * (nf - 1.0) / (nf * (nf + 2.0));
            Ok((bound - v, scale2(v, bound)))
        })?);
        out.inequalities.push(sweep.run("phi_ring_reaction", n, e, Strictness::Strict, |x| {
            let v = phi_reaction(&p, x)?;
            let bound = 2.0 * (nf - 1.0);
            Ok((bound - v, scale2(v, bound)))
        })?);
        out.inequalities.push(sweep.run("phi_ring_homogeneity", n, e, Strictness::Strict, |x| {
            let v = p.ring(x)? - x * p.ring_prime(x)?;
            Ok((v - 1.0, scale2(v, 1.0)))
        })?);
        if p.b > 0.0 {
            let (a, b, c, d, ee) = (p.a, p.b, p.c, p.d, p.e);
            let direct = a * a * c / b + d * (d + 3.0 - nf) + a * (nf - 3.0 - 2.0 * d) + ee * (1.0 - c / b);
            let simplified = 2.0 * (nf - 1.0)
                + 2.0 * eps * (nf * nf - 10.0 * nf + 13.0 + 3.0 * eps * (nf - 3.0) + 2.0 * eps * eps)
                    / (nf - 1.0 + eps)
                + ee * (1.0 - c / b);
            out.closed_forms.push(closed("phi_ring_reaction_limit_forms", n, e, direct, simplified, 1e-10));
            out.closed_forms.push(closed("phi_ring_reaction_limit_factored", n, e, p.reaction_limit(), direct, 1e-10));
            let at_max = phi_reaction(&p, cfg.grid.x_max)?;
            out.closed_forms.push(ClosedFormRecord {
                check: "phi_ring_reaction_limit_below_bound".into(),
                n,
                eps: e,
                computed: direct,
                expected: 2.0 * (nf - 1.0),
                pass: direct < 2.0 * (nf - 1.0),
            });
            let at_knee = phi_reaction(&p, cfg.grid.linear_max)?;
            // f is a difference of terms of size (c x)^2.
            let roundoff = 8.0 * f64::EPSILON * (c * cfg.grid.x_max).powi(2);
            out.closed_forms.push(ClosedFormRecord {
                check: "phi_ring_reaction_approaches_limit".into(),
                n,
                eps: e,
                computed: at_max,
                expected: direct,
                pass: (at_max - direct).abs() < (at_knee - direct).abs().max(roundoff),
            });
        }
    }
    Ok(())
}

fn psi_family(cfg: &AppendixConfig, grid: &[f64], n: usize, out: &mut AppendixReport) -> Result<()> {
    let nf = n as f64;
    let p = PsiParams::new(n)?;
    let xs = with_points(grid, &[p.diffusion_argmax()]);
    let sweep = Sweep { xs: &xs, leakage: cfg.leakage };
    let ez = Strictness::EqualityAtZero;
    let st = Strictness::Strict;
    let mut push = |name: &str, kind: Strictness, f: &dyn Fn(f64) -> Result<(f64, f64)>| -> Result<()> {
        out.inequalities.push(sweep.run(name, n, None, kind, f)?);
        Ok(())
    };
    push("psi_lower", ez, &|x| {
        let (v, b) = (p.psi(x)?, x / nf);
        Ok((v - b, scale2(v, b)))
    })?;
    push("psi_upper", ez, &|x| {
        let (v, b) = (p.psi(x)?, x / (nf - 1.0));
        Ok((b - v, scale2(v, b)))
    })?;
    push("psi_slope_lower", ez, &|x| {
        let (v, b) = (p.psi_prime(x)?, 1.0 / nf);
        Ok((v - b, scale2(v, b)))
    })?;
    push("psi_slope_upper", st, &|x| {
        let (v, b) = (p.psi_prime(x)?, 1.0 / (nf - 1.0));
        Ok((b - v, scale2(v, b)))
    })?;
    push("psi_diffusion", st, &|x| {
        let (v, b) = (p.diffusion(x)?, 3.0 / (nf + 8.0));
        Ok((b - v, scale2(v, b)))
    })?;
    push("psi_reaction", ez, &|x| {
        let v = psi_reaction(&p, x)?;
        Ok((-v, v.abs()))
    })?;
    push("psi_homogeneity_lower", ez, &|x| {
        let v = x * p.psi_prime(x)? - p.psi(x)?;
        Ok((v, v.abs()))
    })?;
    push("psi_homogeneity_upper", st, &|x| {
        let v = x * p.psi_prime(x)? - p.psi(x)?;
        Ok((2.0 - v, scale2(v, 2.0)))
    })?;
    let k = 1.0 / (nf * (nf - 1.0));
    push("psi_ring_slope_lower", ez, &|x| {
        let v = p.ring_prime(x)?;
        Ok((v, v.abs()))
    })?;
    push("psi_ring_slope_upper", st, &|x| {
        let v = p.ring_prime(x)?;
        Ok((k - v, scale2(v, k)))
    })?;
    push("psi_ring_value_lower", ez, &|x| {
        let v = p.ring(x)?;
        Ok((v, v.abs()))
    })?;
    push("psi_ring_value_upper", ez, &|x| {
        let (v, b) = (p.ring(x)?, k * x);
        Ok((b - v, scale2(v, b)))
    })?;
    push("psi_ring_diffusion", st, &|x| {
        let v = 2.0 * x * p.ring_second(x)? + p.ring_prime(x)?;
        let b = 2.0 * (nf - 4.0) / (nf * (nf + 8.0));
        Ok((b - v, scale2(v, b)))
    })?;
    push("psi_ring_reaction", ez, &|x| {
        let v = psi_ring_reaction(&p, x)?;
        Ok((-v, v.abs()))
    })?;
    push("psi_ring_homogeneity_lower", ez, &|x| {
        let v = x * p.ring_prime(x)? - p.ring(x)?;
        Ok((v, v.abs()))
    })?;
    push("psi_ring_homogeneity_upper", st, &|x| {
        let v = x * p.ring_prime(x)? - p.ring(x)?;
        Ok((2.0 - v, scale2(v, 2.0)))
    })?;

    let xm = p.diffusion_argmax();
    out.closed_forms.push(closed("psi_diffusion_max_value", n, None, p.diffusion(xm)?, p.diffusion_max(), 1e-12));
    out.closed_forms.push(closed("psi_diffusion_max_in_n", n, None, p.diffusion_max(), p.diffusion_max_in_n(), 1e-12));
    let grid_max = xs.iter().map(|&x| p.diffusion(x)).collect::<Result<Vec<_>>>()?;
    let grid_max = grid_max.into_iter().fold(f64::NEG_INFINITY, f64::max);
    out.closed_forms.push(ClosedFormRecord {
        check: "psi_diffusion_grid_max_not_above_closed_form".into(),
        n,
        eps: None,
        computed: grid_max,
        expected: p.diffusion_max(),
        pass: grid_max <= p.diffusion_max() + 1e-12,
    });
    let cubic = p.cubic();
    out.closed_forms.push(closed(
        "psi_cubic_identity_mu",
        n,
        None,
        p.mu * cubic.a + p.lambda * p.nu * cubic.b,
        cubic.c,
        1e-12,
    ));
    out.closed_forms.push(closed(
        "psi_cubic_identity_nu",
        n,
        None,
        p.nu * cubic.a + p.lambda * p.mu * cubic.b,
        cubic.c,
        1e-12,
    ));
    let disc = p.discriminant();
    let disc_n = p.discriminant_in_n();
    out.closed_forms.push(ClosedFormRecord {
        check: "psi_discriminant".into(),
        n,
        eps: None,
        computed: disc,
        expected: disc_n,
        pass: (disc - disc_n).abs() <= 1e-9 * disc_n.abs() && disc < 0.0,
    });
    out.closed_forms.push(closed("psi_slope_at_zero", n, None, p.psi_prime(0.0)?, 1.0 / nf, 1e-13));
    out.closed_forms.push(closed("psi_slope_limit", n, None, p.kappa - p.lambda, 1.0 / (nf - 1.0), 1e-13));
    let slope_max = p.psi_prime(cfg.grid.x_max)?;
    out.closed_forms.push(ClosedFormRecord {
        check: "psi_slope_approaches_limit".into(),
        n,
        eps: None,
        computed: slope_max,
        expected: 1.0 / (nf - 1.0),
        pass: slope_max < 1.0 / (nf - 1.0) && (1.0 / (nf - 1.0) - slope_max) < 1.0 / cfg.grid.x_max,
    });
    Ok(())
}

fn eps_verdicts(cfg: &AppendixConfig, records: &[InequalityRecord]) -> Vec<EpsVerdict> {
    let mut sorted = cfg.eps.clone();
    sorted.sort_by(f64::total_cmp);
    cfg.phi_n
        .iter()
        .map(|&n| {
            let passes: Vec<bool> = sorted
                .iter()
                .map(|&e| records.iter().filter(|r| r.n == n && r.eps == Some(e)).all(|r| r.pass))
                .collect();
            let largest = sorted.iter().zip(&passes).filter(|(_, &p)| p).map(|(&e, _)| e).last();
            let prefix = passes.iter().take_while(|&&p| p).count();
            EpsVerdict {
                n,
                largest_passing_eps: largest,
                downward_closed: passes[prefix..].iter().all(|&p| !p),
            }
        })
        .collect()
}

/// Evaluates every inequality on the grid and at the closed-form critical points.
///
/// The `eps`-dependent inequalities only claim to hold for small `eps`, so a
/// failure at a larger tested `eps` does not fail the report as long as the
/// smallest tested `eps` passes and the passing values are downward closed.
pub fn verify_appendix(cfg: &AppendixConfig) -> Result<AppendixReport> {
    cfg.validate()?;
    let grid = cfg.grid.points();
    let mut out = AppendixReport {
        inequalities: Vec::new(),
        closed_forms: Vec::new(),
        eps_verdicts: Vec::new(),
        all_pass: false,
    };
    for &n in &cfg.phi_n {
        phi_family(cfg, &grid, n, &mut out)?;
    }
    for &n in &cfg.psi_n {
        psi_family(cfg, &grid, n, &mut out)?;
    }
    out.eps_verdicts = eps_verdicts(cfg, &out.inequalities);
    let smallest = cfg.eps.iter().copied().fold(f64::INFINITY, f64::min);
    let eps_ok = out.eps_verdicts.iter().all(|v| v.downward_closed && v.largest_passing_eps.is_some());
    let fixed_ok = out.inequalities.iter().filter(|r| r.eps.is_none()).all(|r| r.pass);
    let smallest_ok = out
        .inequalities
        .iter()
        .filter(|r| r.eps == Some(smallest))
        .all(|r| r.pass);
    let closed_ok = out
        .closed_forms
        .iter()
        .filter(|c| c.eps.is_none() || c.eps == Some(smallest))
        .all(|c| c.pass);
    out.all_pass = (cfg.eps.is_empty() || (eps_ok && smallest_ok)) && fixed_ok && closed_ok;
    Ok(out)
}

impl AppendixReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    /// One row per inequality: `inequality,n,eps,min_slack,argmin_x,pass`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.inequalities {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityRecord> {
        self.inequalities.iter().filter(|r| !r.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> AppendixConfig {
        AppendixConfig {
            grid: GridSpec { linear_points: 400, linear_max: 100.0, log_points: 400, x_max: 1e6 },
            ..AppendixConfig::default()
        }
    }

    #[test]
    fn grid_layout() {
        let xs = GridSpec::default().points();
        assert_eq!(xs.len(), 9999);
        assert_eq!(xs[0], 0.0);
        assert!((xs[xs.len() - 1] - 1e6).abs() < 1e-6);
        assert!(xs.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn small_grid_passes() {
        let report = verify_appendix(&small()).unwrap();
        let failures: Vec<_> = report
            .failures()
            .filter(|r| r.eps.is_none() || r.eps == Some(1e-8))
            .map(|r| (r.inequality.clone(), r.n, r.eps, r.first_failure))
            .collect();
        assert!(failures.is_empty(), "{failures:?}");
        assert!(report.closed_forms.iter().filter(|c| !c.pass).all(|c| c.eps.is_some()));
        assert!(report.all_pass);
    }

    #[test]
    fn equality_cases_sit_at_origin() {
        let report = verify_appendix(&small()).unwrap();
        let r = report.inequalities.iter().find(|r| r.inequality == "psi_reaction" && r.n == 6).unwrap();
        assert_eq!(r.argmin_x, 0.0);
        assert!(r.min_slack.abs() < 1e-15);
    }

    #[test]
    fn rejects_small_psi_dimension() {
        let cfg = AppendixConfig { psi_n: vec![4], ..small() };
        assert!(matches!(verify_appendix(&cfg), Err(Error::Config(_))));
    }
}
