//! Randomized falsification of the pointwise tensor inequalities.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{random_complex_structure, random_sff, random_symmetric_tensor};
use crate::error::{Error, Result};
use crate::pinching::PinchingCase;
use crate::tensor::codazzi::gradient_lower_bound;
use crate::tensor::reaction::{Accumulator, CompensatedSum, PlainSum};
use crate::tensor::{
    align_mean_curvature, codazzi_complete, r3_term, reaction_terms, reaction_terms_compensated, sff_invariants,
    ComplexStructure, GradientSff, ReactionTerms, Sff, SffInvariants, SymmetricTensor,
};

/// A slack below `-LEAKAGE (1 + scale)` is a counterexample candidate.
pub const LEAKAGE: f64 = 1e-9;
/// Relative tolerance of the `R_2` identity.
pub const IDENTITY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityId {
    /// `R_1 <= |h|^4 - (2/n) rho_2 |H|^2 + 2 rho_1 rho_2 + rho_2^2 / 2`.
    R1Upper,
    /// `R_2 = |H|^2 (|h|^2 - rho_2)`.
    R2Identity,
    /// `S_1 <= (3/n) S_2 + 3|h°|^2 + 8 sqrt(theta_2 rho_1 rho_2) + 4 theta_2 rho_2`.
    S1UpperTheta,
    /// `R_1 <= |h|^4 - (2/n) rho_2 |H|^2 + 2 |h°|^2 rho_2 - (3/2) rho_2^2`.
    R1UpperTraceless,
    /// `S_1 <= (3/n) S_2 + (2n + 3) |h°|^2`.
    S1UpperLinear,
    /// `|nabla h|^2` above its codimension-dependent bound, for Codazzi gradients.
    GradientLower,
    /// `|S|^2 >= 3/(n+2) sum_{alpha,i} (sum_k S^alpha_ikk)^2`.
    Symmetrization,
    /// `R_3 >= |H|^4/n^2 + (3 rho_1 + rho_2)/n |H|^2 - c_n |H| (|h°|^3 - |h°| rho_2 / 2)`
    /// on pinched forms, `c_n = (n-2)/sqrt(n(n-1))`.
    R3Lower,
}

impl InequalityId {
    pub const ALL: [InequalityId; 8] = [
        InequalityId::R1Upper,
        InequalityId::R2Identity,
        InequalityId::S1UpperTheta,
        InequalityId::R1UpperTraceless,
        InequalityId::S1UpperLinear,
        InequalityId::GradientLower,
        InequalityId::Symmetrization,
        InequalityId::R3Lower,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InequalityId::R1Upper => "r1_upper",
            InequalityId::R2Identity => "r2_identity",
            InequalityId::S1UpperTheta => "s1_upper_theta",
            InequalityId::R1UpperTraceless => "r1_upper_traceless",
            InequalityId::S1UpperLinear => "s1_upper_linear",
            InequalityId::GradientLower => "gradient_lower",
            InequalityId::Symmetrization => "symmetrization",
            InequalityId::R3Lower => "r3_lower",
        }
    }

    pub fn is_identity(self) -> bool {
        self == InequalityId::R2Identity
    }
}

/// Sampling parameters of a falsification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSpec {
    /// `(n, q)` pairs; `n + q` must be even.
    pub dims: Vec<[usize; 2]>,
    /// Samples per dimension pair.
    pub samples: usize,
    /// Sample `i` uses `scales[i % scales.len()]`.
    pub scales: Vec<f64>,
    pub seed: u64,
    /// Impose the initial pinching condition on every sampled form.
    pub pinched_only: bool,
    /// Rotate the normal frame so that `H` is the first normal before evaluating.
    pub h_aligned: bool,
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            dims: vec![[7, 1], [8, 2], [8, 4], [6, 6], [9, 3]],
            samples: 100_000,
            scales: vec![0.1, 1.0, 10.0],
            seed: 0,
            pinched_only: false,
            h_aligned: false,
        }
    }
}

impl SampleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::Config("no dimension pairs".into()));
        }
        if self.scales.is_empty() || self.scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Config(format!("scales must be positive, got {:?}", self.scales)));
        }
        for &[n, q] in &self.dims {
            if (n + q) % 2 != 0 || n < 2 || q < 1 {
                return Err(Error::InvalidDimensions(format!(
                    "(n={n}, q={q}): n + q must be even for a complex structure"
                )));
            }
            PinchingCase::new(n, q, 0.0)?;
        }
        Ok(())
    }
}

/// One random draw: complex structure, form, pinched form and symmetric tensor.
#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub n: usize,
    pub q: usize,
    pub index: usize,
    pub scale: f64,
    /// Rows of `J_AB`, tangent indices first.
    pub j: Vec<Vec<f64>>,
    /// `J_AB` in the frame of `h_pinched`; differs from `j` only when aligned.
    pub j_pinched: Vec<Vec<f64>>,
    pub h: Sff,
    pub h_pinched: Sff,
    pub s: SymmetricTensor,
    #[serde(skip)]
    structure: ComplexStructure,
    #[serde(skip)]
    structure_pinched: ComplexStructure,
}

/// Rescales the traceless part of `h` so that `|h|^2 < rhs(|H|^2)` holds with
/// a uniformly drawn fraction of the available room.
fn pinch<R: Rng>(rng: &mut R, h: &Sff, case: &PinchingCase) -> Result<Sff> {
    let n = h.n() as f64;
    let mean2 = h.mean_norm2();
    let tl = h.traceless();
    let room = case.pinching_rhs(mean2)? - mean2 / n;
    let fraction: f64 = rng.gen::<f64>() * 0.999;
    let t2 = tl.norm2();
    let t = if room > 0.0 && t2 > 0.0 { (fraction * room / t2).sqrt() } else { 0.0 };
    let mean = h.mean();
    Ok(Sff::from_fn(h.n(), h.q(), |a, i, k| {
        let umbilic = if i == k { mean[a] / n } else { 0.0 };
        umbilic + t * tl.get(a, i, k)
    }))
}

/// Draws sample `index` of dimension pair `pair` from its own stream.
pub fn draw_sample(spec: &SampleSpec, pair: usize, index: usize) -> Result<Sample> {
    let [n, q] = spec.dims[pair];
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(((pair as u64) << 48) | index as u64);
    let scale = spec.scales[index % spec.scales.len()];
    let case = PinchingCase::new(n, q, 0.0)?;
    let structure = random_complex_structure(&mut rng, n, q);
    let raw = random_sff(&mut rng, n, q, scale);
    let pinched = pinch(&mut rng, &raw, &case)?;
    let s = random_symmetric_tensor(&mut rng, n, q, scale);
    let h = if spec.pinched_only { pinched.clone() } else { raw };
    let (h, structure, h_pinched, structure_pinched) = if spec.h_aligned {
        let (a, ja) = align_mean_curvature(&h, &structure)?;
        let (b, jb) = align_mean_curvature(&pinched, &structure)?;
        (a, ja, b, jb)
    } else {
        (h, structure.clone(), pinched, structure)
    };
    let rows = |c: &ComplexStructure| {
        let m = c.matrix();
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| m[(r, k)]).collect()).collect()
    };
    Ok(Sample {
        n,
        q,
        index,
        scale,
        j: rows(&structure),
        j_pinched: rows(&structure_pinched),
        h,
        h_pinched,
        s,
        structure,
        structure_pinched,
    })
}

/// Both sides of one inequality on one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub lhs: f64,
    pub rhs: f64,
    /// Nonnegative when the inequality holds; `-|lhs - rhs|` for identities.
    pub slack: f64,
    /// `max(|lhs|, |rhs|)`.
    pub scale: f64,
}

impl Evaluation {
    fn upper(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, slack: rhs - lhs, scale: lhs.abs().max(rhs.abs()) }
    }

    fn lower(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, slack: lhs - rhs, scale: lhs.abs().max(rhs.abs()) }
    }

    fn identity(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, slack: -(lhs - rhs).abs(), scale: lhs.abs().max(rhs.abs()) }
    }

    /// `slack / (1 + scale)`.
    pub fn normalized(&self) -> f64 {
        self.slack / (1.0 + self.scale)
    }

    /// `|lhs - rhs| / scale`, zero when both sides vanish.
    pub fn relative_error(&self) -> f64 {
        if self.scale > 0.0 {
            -self.slack / self.scale
        } else {
            0.0
        }
    }

    pub fn holds(&self, id: InequalityId) -> bool {
        if id.is_identity() {
            self.relative_error() <= IDENTITY_RTOL
        } else {
            self.slack >= -LEAKAGE * (1.0 + self.scale)
        }
    }
}

fn gradient_norms<A: Accumulator>(g: &GradientSff) -> (f64, f64) {
    let (n, q) = (g.n(), g.q());
    let mut total = A::default();
    let mut mean = A::default();
    for a in 0..q {
        for k in 0..n {
            let mut trace = A::default();
            for i in 0..n {
                trace.add(g.get(a, i, i, k));
                for j in 0..n {
                    total.add(g.get(a, i, j, k).powi(2));
                }
            }
            mean.add(trace.value().powi(2));
        }
    }
    (total.value(), mean.value())
}

fn symmetric_norms<A: Accumulator>(s: &SymmetricTensor) -> (f64, f64) {
    let (n, q) = (s.n(), s.q());
    let mut total = A::default();
    let mut traces = A::default();
    for a in 0..q {
        for i in 0..n {
            let mut tr = A::default();
            for j in 0..n {
                tr.add(s.get(a, i, j, j));
                for k in 0..n {
                    total.add(s.get(a, i, j, k).powi(2));
                }
            }
            traces.add(tr.value().powi(2));
        }
    }
    (total.value(), traces.value())
}

/// Lazily computed quantities of one sample.
struct Evaluator<'a> {
    sample: &'a Sample,
    compensated: bool,
    plain: Option<(ReactionTerms, SffInvariants)>,
    pinched: Option<(f64, SffInvariants)>,
}

impl<'a> Evaluator<'a> {
    fn new(sample: &'a Sample, compensated: bool) -> Self {
        Self { sample, compensated, plain: None, pinched: None }
    }

    fn terms(&self, h: &Sff, j: &ComplexStructure) -> Result<(ReactionTerms, SffInvariants)> {
        let t = if self.compensated { reaction_terms_compensated(h, j)? } else { reaction_terms(h, j)? };
        Ok((t, sff_invariants(h, j)?))
    }

    fn plain(&mut self) -> Result<(ReactionTerms, SffInvariants)> {
        if self.plain.is_none() {
            self.plain = Some(self.terms(&self.sample.h, &self.sample.structure)?);
        }
        Ok(self.plain.unwrap())
    }

    fn pinched(&mut self) -> Result<(f64, SffInvariants)> {
        if self.pinched.is_none() {
            let h = &self.sample.h_pinched;
            self.pinched = Some((r3_term(h, self.compensated), sff_invariants(h, &self.sample.structure_pinched)?));
        }
        Ok(self.pinched.unwrap())
    }

    fn evaluate(&mut self, id: InequalityId) -> Result<Evaluation> {
        let nf = self.sample.n as f64;
        Ok(match id {
            InequalityId::R1Upper => {
                let (t, v) = self.plain()?;
                let rhs =
                    v.h2 * v.h2 - 2.0 / nf * v.rho2 * v.mean2 + 2.0 * v.rho1 * v.rho2 + 0.5 * v.rho2 * v.rho2;
                Evaluation::upper(t.r1, rhs)
            }
            InequalityId::R2Identity => {
                let (t, v) = self.plain()?;
                Evaluation::identity(t.r2, v.mean2 * (v.h2 - v.rho2))
            }
            InequalityId::S1UpperTheta => {
                let (t, v) = self.plain()?;
                let rhs = 3.0 / nf * t.s2
                    + 3.0 * v.traceless2
                    + 8.0 * (v.theta2 * v.rho1 * v.rho2).sqrt()
                    + 4.0 * v.theta2 * v.rho2;
                Evaluation::upper(t.s1, rhs)
            }
            InequalityId::R1UpperTraceless => {
                let (t, v) = self.plain()?;
                let rhs = v.h2 * v.h2 - 2.0 / nf * v.rho2 * v.mean2 + 2.0 * v.traceless2 * v.rho2
                    - 1.5 * v.rho2 * v.rho2;
                Evaluation::upper(t.r1, rhs)
            }
            InequalityId::S1UpperLinear => {
                let (t, v) = self.plain()?;
                Evaluation::upper(t.s1, 3.0 / nf * t.s2 + (2.0 * nf + 3.0) * v.traceless2)
            }
            InequalityId::GradientLower => {
                let j = &self.sample.structure;
                let g = codazzi_complete(&self.sample.s, j)?;
                let (norm2, mean2) = if self.compensated {
                    gradient_norms::<CompensatedSum>(&g)
                } else {
                    gradient_norms::<PlainSum>(&g)
                };
                Evaluation::lower(norm2, gradient_lower_bound(g.n(), g.q(), mean2, j.p_norm2()))
            }
            InequalityId::Symmetrization => {
                let (norm2, traces) = if self.compensated {
                    symmetric_norms::<CompensatedSum>(&self.sample.s)
                } else {
                    symmetric_norms::<PlainSum>(&self.sample.s)
                };
                Evaluation::lower(norm2, 3.0 / (nf + 2.0) * traces)
            }
            InequalityId::R3Lower => {
                let (r3, v) = self.pinched()?;
                let c = (nf - 2.0) / (nf * (nf - 1.0)).sqrt();
                let tl = v.traceless2.sqrt();
                let rhs = v.mean2 * v.mean2 / (nf * nf) + (3.0 * v.rho1 + v.rho2) / nf * v.mean2
                    - c * v.mean2.sqrt() * (tl * v.traceless2 - 0.5 * tl * v.rho2);
                Evaluation::lower(r3, rhs)
            }
        })
    }
}

/// Evaluates the listed inequalities on one sample.
pub fn evaluate(sample: &Sample, ids: &[InequalityId], compensated: bool) -> Result<Vec<Evaluation>> {
    let mut ev = Evaluator::new(sample, compensated);
    ids.iter().map(|&id| ev.evaluate(id)).collect()
}

/// A sample on which an inequality failed, with every slack.
#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub inequality: InequalityId,
    pub seed: u64,
    pub sample: Sample,
    pub evaluation: Evaluation,
    /// Slacks of every inequality on this sample, recomputed with compensated sums.
    pub slacks: BTreeMap<InequalityId, f64>,
}

/// Outcome of one inequality on one dimension pair.
#[derive(Debug, Clone, Serialize)]
pub struct FalsificationReport {
    pub inequality: InequalityId,
    pub n: usize,
    pub q: usize,
    pub seed: u64,
    pub samples: usize,
    pub min_slack: f64,
    /// Smallest `slack / (1 + scale)`; decides failure.
    pub min_normalized_slack: f64,
    /// Largest relative error, reported for identities.
    pub max_relative_error: Option<f64>,
    /// Samples below the leakage threshold before the compensated recheck.
    pub candidates: usize,
    pub confirmed: usize,
    /// The sample with the smallest normalized slack.
    pub argmin: Sample,
    pub argmin_evaluation: Evaluation,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub spec: SampleSpec,
    pub reports: Vec<FalsificationReport>,
    /// Confirmed counterexamples, at most `MAX_COUNTEREXAMPLES` per report.
    pub counterexamples: Vec<Counterexample>,
    pub pass: bool,
}

pub const MAX_COUNTEREXAMPLES: usize = 16;

struct Tally {
    min: (f64, f64, usize, Evaluation),
    max_rel: f64,
    candidates: Vec<usize>,
}

/// Runs every listed inequality on the samples of `spec`.
pub fn falsify_many(ids: &[InequalityId], spec: &SampleSpec) -> Result<CatalogReport> {
    spec.validate()?;
    let mut reports = Vec::new();
    let mut counterexamples = Vec::new();
    for (pair, &[n, q]) in spec.dims.iter().enumerate() {
        let evaluations = (0..spec.samples)
            .into_par_iter()
            .map(|i| {
                let sample = draw_sample(spec, pair, i)?;
                evaluate(&sample, ids, false)
            })
            .collect::<Result<Vec<_>>>()?;
        for (slot, &id) in ids.iter().enumerate() {
            let mut tally: Option<Tally> = None;
            for (i, row) in evaluations.iter().enumerate() {
                let e = row[slot];
                let t = tally.get_or_insert(Tally { min: (e.slack, e.normalized(), i, e), max_rel: 0.0, candidates: vec![] });
                t.min.0 = t.min.0.min(e.slack);
                if e.normalized() < t.min.1 {
                    t.min = (t.min.0, e.normalized(), i, e);
                }
                t.max_rel = t.max_rel.max(e.relative_error());
                if !e.holds(id) {
                    t.candidates.push(i);
                }
            }
            let t = tally.expect("at least one sample");
            let mut confirmed = 0;
            for &i in &t.candidates {
                let sample = draw_sample(spec, pair, i)?;
                let recheck = evaluate(&sample, &[id], true)?[0];
                if !recheck.holds(id) {
                    confirmed += 1;
                    if confirmed <= MAX_COUNTEREXAMPLES {
                        let all = evaluate(&sample, &InequalityId::ALL, true)?;
                        let slacks = InequalityId::ALL.iter().zip(&all).map(|(&k, e)| (k, e.slack)).collect();
                        counterexamples.push(Counterexample {
                            inequality: id,
                            seed: spec.seed,
                            sample,
                            evaluation: recheck,
                            slacks,
                        });
                    }
                }
            }
            reports.push(FalsificationReport {
                inequality: id,
                n,
                q,
                seed: spec.seed,
                samples: spec.samples,
                min_slack: t.min.0,
                min_normalized_slack: t.min.1,
                max_relative_error: id.is_identity().then_some(t.max_rel),
                candidates: t.candidates.len(),
                confirmed,
                argmin: draw_sample(spec, pair, t.min.2)?,
                argmin_evaluation: t.min.3,
                pass: confirmed == 0,
            });
        }
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(CatalogReport { spec: spec.clone(), reports, counterexamples, pass })
}

/// Runs one inequality of the catalog.
pub fn falsify(id: InequalityId, spec: &SampleSpec) -> Result<CatalogReport> {
    falsify_many(&[id], spec)
}

/// Runs the whole catalog.
pub fn falsify_catalog(spec: &SampleSpec) -> Result<CatalogReport> {
    falsify_many(&InequalityId::ALL, spec)
}

impl CatalogReport {
    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }

    /// One row per inequality and dimension pair.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Row {
            inequality: &'static str,
            n: usize,
            q: usize,
            samples: usize,
            min_slack: f64,
            min_normalized_slack: f64,
            max_relative_error: Option<f64>,
            candidates: usize,
            confirmed: usize,
            pass: bool,
        }
        let mut out = csv::Writer::from_writer(w);
        for r in &self.reports {
            out.serialize(Row {
                inequality: r.inequality.name(),
                n: r.n,
                q: r.q,
                samples: r.samples,
                min_slack: r.min_slack,
                min_normalized_slack: r.min_normalized_slack,
                max_relative_error: r.max_relative_error,
                candidates: r.candidates,
                confirmed: r.confirmed,
                pass: r.pass,
            })?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(samples: usize) -> SampleSpec {
        SampleSpec { samples, seed: 7, ..Default::default() }
    }

    #[test]
    fn catalog_registry_is_complete() {
        let names: std::collections::BTreeSet<_> = InequalityId::ALL.iter().map(|i| i.name()).collect();
        assert_eq!(names.len(), 8);
        for id in InequalityId::ALL {
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(json, format!("\"{}\"", id.name()));
        }
    }

    #[test]
    fn odd_dimension_sums_are_rejected() {
        let spec = SampleSpec { dims: vec![[6, 1]], ..small(1) };
        assert!(matches!(spec.validate(), Err(Error::InvalidDimensions(_))));
        let spec = SampleSpec { scales: vec![0.0], ..small(1) };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn samples_are_reproducible() {
        let spec = small(4);
        let a = draw_sample(&spec, 2, 3).unwrap();
        let b = draw_sample(&spec, 2, 3).unwrap();
        assert_eq!(a.h, b.h);
        assert_eq!(a.j, b.j);
        let c = draw_sample(&spec, 2, 2).unwrap();
        assert_ne!(a.h, c.h);
    }

    #[test]
    fn pinched_forms_pass_the_pinching_check() {
        let spec = small(40);
        for pair in 0..spec.dims.len() {
            let [n, q] = spec.dims[pair];
            for i in 0..40 {
                let s = draw_sample(&spec, pair, i).unwrap();
                let r = crate::pinching::classify_and_check(
                    &[s.h_pinched.norm2()],
                    &[s.h_pinched.mean_norm2()],
                    n,
                    q,
                )
                .unwrap();
                assert_eq!(r.verdict, crate::pinching::Verdict::StrictlyPinched);
            }
        }
    }

    #[test]
    fn zero_form_leaves_only_structure_terms() {
        let spec = small(1);
        let mut s = draw_sample(&spec, 1, 0).unwrap();
        s.h = Sff::zeros(s.n, s.q);
        s.h_pinched = Sff::zeros(s.n, s.q);
        s.s = SymmetricTensor::zeros(s.n, s.q);
        let ev = evaluate(&s, &InequalityId::ALL, false).unwrap();
        for (id, e) in InequalityId::ALL.iter().zip(&ev) {
            assert!(e.slack >= 0.0 || (id.is_identity() && e.slack == 0.0), "{id:?} {e:?}");
            if *id == InequalityId::GradientLower {
                // Pure Codazzi part against 2(n - q)|P|^2.
                assert!(e.lhs > 0.0);
            } else {
                assert_eq!(e.lhs, 0.0, "{id:?}");
            }
        }
    }

    #[test]
    fn small_catalog_has_no_counterexamples() {
        let report = falsify_catalog(&small(300)).unwrap();
        assert!(report.pass);
        assert_eq!(report.reports.len(), 5 * 8);
        for r in &report.reports {
            assert_eq!(r.confirmed, 0, "{:?}", r.inequality);
            if let Some(e) = r.max_relative_error {
                assert!(e <= IDENTITY_RTOL, "{e}");
            }
        }
        let again = falsify_catalog(&small(300)).unwrap();
        let a = serde_json::to_string(&report).unwrap();
        let b = serde_json::to_string(&again).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn counterexample_json_round_trips_floats() {
        let spec = small(1);
        let s = draw_sample(&spec, 0, 0).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let back: Vec<f64> = serde_json::from_value(v["h"]["data"].clone()).unwrap();
        assert_eq!(back, s.h.components());
    }
}
