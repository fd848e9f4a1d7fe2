use serde::Serialize;

use super::phi::PhiParams;
use super::psi::PsiParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CaseTag {
    /// `q = 1`, `n >= 3`.
    Hypersurface,
    /// `2 <= q < n - 4`.
    Mid,
    /// `q >= n - 4 >= 2`.
    High,
}

/// Which pinching condition applies to `(n, q)`, with the functions it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinchingCase {
    pub tag: CaseTag,
    pub n: usize,
    pub q: usize,
    pub eps: f64,
    /// `k = 1/(n(n-1))`, used by the middle codimension case.
    pub k: f64,
    /// `l = 2 - 3/n`, used by the middle codimension case.
    pub l: f64,
    phi0: Option<PhiParams>,
    phi_eps: Option<PhiParams>,
    psi: Option<PsiParams>,
}

pub fn case_tag(n: usize, q: usize) -> Result<CaseTag> {
    if q == 1 && n >= 3 {
        Ok(CaseTag::Hypersurface)
    } else if q >= 2 && q + 4 < n {
        Ok(CaseTag::Mid)
    } else if n >= 6 && q + 4 >= n {
        Ok(CaseTag::High)
    } else {
        Err(Error::UnsupportedCase { n, q })
    }
}

impl PinchingCase {
    /// Case for `(n, q)`; `eps` enters the threshold `W` and the margin `U`.
    pub fn new(n: usize, q: usize, eps: f64) -> Result<Self> {
        let tag = case_tag(n, q)?;
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Domain(format!("eps must lie in [0, 1], got {eps}")));
        }
        let nf = n as f64;
        let (phi0, phi_eps, psi) = match tag {
            CaseTag::Hypersurface => (Some(PhiParams::new(n, 0.0)?), Some(PhiParams::new(n, eps)?), None),
            CaseTag::Mid => (None, None, None),
            CaseTag::High => (None, None, Some(PsiParams::new(n)?)),
        };
        Ok(Self {
            tag,
            n,
            q,
            eps,
            k: 1.0 / (nf * (nf - 1.0)),
            l: 2.0 - 3.0 / nf,
            phi0,
            phi_eps,
            psi,
        })
    }

    pub fn phi_eps(&self) -> Option<&PhiParams> {
        self.phi_eps.as_ref()
    }

    pub fn psi(&self) -> Option<&PsiParams> {
        self.psi.as_ref()
    }

    /// Right-hand side of the initial pinching condition `|h|^2 < rhs(|H|^2)`.
    pub fn pinching_rhs(&self, mean2: f64) -> Result<f64> {
        match self.tag {
            CaseTag::Hypersurface => self.phi0.unwrap().phi(mean2),
            CaseTag::Mid => Ok(mean2 / (self.n as f64 - 1.0) + self.l),
            CaseTag::High => self.psi.unwrap().psi(mean2),
        }
    }

    /// The traceless threshold `W(|H|^2)`.
    pub fn threshold_w(&self, mean2: f64) -> Result<f64> {
        if !(mean2 >= 0.0) {
            return Err(Error::Domain(format!("|H|^2 must be nonnegative, got {mean2}")));
        }
        match self.tag {
            CaseTag::Hypersurface => self.phi_eps.unwrap().ring(mean2),
            CaseTag::Mid => Ok(self.k * mean2 + self.l),
            CaseTag::High => self.psi.unwrap().ring(mean2),
        }
    }

    /// Margin `U`; negative while the preserved pinching holds.
    ///
    /// `|h°|^2 - (W - eps |H|^2 - eps)` for hypersurfaces and high codimension,
    /// `|h°|^2 - (k |H|^2 + l)(1 - eps)` for middle codimension.
    pub fn margin_u(&self, traceless2: f64, mean2: f64) -> Result<f64> {
        let w = self.threshold_w(mean2)?;
        Ok(match self.tag {
            CaseTag::Mid => traceless2 - w * (1.0 - self.eps),
            _ => traceless2 - (w - self.eps * mean2 - self.eps),
        })
    }

    /// `eps |H|^2 + eps < W < |H|^2/(n(n-1)) + n`.
    pub fn threshold_in_sandwich(&self, mean2: f64) -> Result<bool> {
        let w = self.threshold_w(mean2)?;
        let nf = self.n as f64;
        Ok(self.eps * mean2 + self.eps < w && w < mean2 / (nf * (nf - 1.0)) + nf)
    }
}

/// `|h°|^2 / W^(1 - sigma)`.
pub fn f_sigma(traceless2: f64, w: f64, sigma: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::Domain(format!("f_sigma needs W > 0, got {w}")));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::Domain(format!("sigma must lie in (0, 1), got {sigma}")));
    }
    Ok(traceless2 / w.powf(1.0 - sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    StrictlyPinched,
    /// `|h|^2 <= rhs` with equality somewhere.
    WeaklyPinched,
    Violated,
}

#[derive(Debug, Clone, Serialize)]
pub struct PinchingReport {
    pub case: CaseTag,
    /// `rhs(|H|^2) - |h|^2` per point.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub verdict: Verdict,
}

/// Checks the initial pinching condition pointwise.
///
/// A margin within `1e-12 (1 + rhs)` of zero counts as equality.
pub fn classify_and_check(norm_h2: &[f64], mean2: &[f64], n: usize, q: usize) -> Result<PinchingReport> {
    if norm_h2.len() != mean2.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} values of |h|^2 against {} of |H|^2",
            norm_h2.len(),
            mean2.len()
        )));
    }
    let case = PinchingCase::new(n, q, 0.0)?;
    let mut margins = Vec::with_capacity(norm_h2.len());
    let mut verdict = Verdict::StrictlyPinched;
    for (&h2, &m2) in norm_h2.iter().zip(mean2) {
        let rhs = case.pinching_rhs(m2)?;
        let margin = rhs - h2;
        let tol = 1e-12 * (1.0 + rhs.abs());
        if margin < -tol {
            verdict = Verdict::Violated;
        } else if margin <= tol && verdict == Verdict::StrictlyPinched {
            verdict = Verdict::WeaklyPinched;
        }
        margins.push(margin);
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PinchingReport { case: case.tag, margins, min_margin, verdict })
}
