use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use serde_json::json;

use super::config::FlowConfig;
use super::monitor::{evolution_residual, monitors, MonitorRecord};
use super::state::{adaptive_dt, step, FlowState, MAX_RETRIES};
use crate::ambient::{normalize_point, CVec, C64};
use crate::error::{Error, Result};
use crate::immersion::DiscreteImmersion;
use crate::pinching::{classify_and_check, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    PinchingViolated,
    BlowupDetected,
    DecayDetected,
    StepRejected,
    Completed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub step: u64,
    pub kind: EventKind,
    pub payload: serde_json::Value,
}

/// Append-only event list with nondecreasing times.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EventLog {
    events: Vec<Event>,
}

impl EventLog {
    pub fn push(&mut self, t: f64, step: u64, kind: EventKind, payload: serde_json::Value) {
        let t = self.events.last().map_or(t, |e| t.max(e.t));
        self.events.push(Event { t, step, kind, payload });
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn contains(&self, kind: EventKind) -> bool {
        self.events.iter().any(|e| e.kind == kind)
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    /// The requested time horizon was reached.
    Completed,
    BlowupDetected,
    DecayDetected,
    Inconclusive,
    /// Repeated step rejection.
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxTime,
    MaxSteps,
    BlowupThreshold,
    DecayThreshold,
    MinRadius,
    StepRejection,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Vec<MonitorRecord>,
    pub events: EventLog,
    pub classification: Classification,
    pub stop: StopReason,
    pub final_state: FlowState,
    pub initial_spacing: f64,
}

pub fn write_trajectory_csv<W: Write>(records: &[MonitorRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Haar-distributed unitary matrix of size `k` from `seed`.
pub fn random_unitary(k: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(k, k, |_, _| {
        C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..k {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn rotate(im: &DiscreteImmersion, u: &DMatrix<C64>) -> Result<DiscreteImmersion> {
    let nodes = im
        .nodes()
        .iter()
        .map(|p| normalize_point(u * p.coords()))
        .collect::<Result<Vec<_>>>()?;
    im.with_nodes(nodes)
}

/// Blowup trend test over the last tenth of the records: every ratio
/// `min |H|^2 / max |H|^2` above 0.9, the diameter decreasing and finally
/// below ten initial grid spacings.
pub fn blowup_trend_holds(records: &[MonitorRecord], initial_spacing: f64) -> bool {
    if records.len() < 2 {
        return false;
    }
    let window = (records.len() / 10).max(2);
    let tail = &records[records.len() - window..];
    let first = &tail[0];
    let last = &tail[tail.len() - 1];
    tail.iter().all(|r| r.mean_ratio > 0.9) && last.diameter < first.diameter && last.diameter < 10.0 * initial_spacing
}

/// Largest ratio of a repeated step to the current step bound.
const HOLD_SLACK: f64 = 1.05;

fn max_h2_full(state: &FlowState) -> f64 {
    state
        .geometry
        .local
        .iter()
        .zip(&state.geometry.full_stencil)
        .filter(|(_, &f)| f)
        .map(|(l, _)| l.norm_h2)
        .fold(0.0, f64::max)
}

pub fn run(initial: &DiscreteImmersion, cfg: &FlowConfig) -> Result<RunOutput> {
    run_with(initial, cfg, &mut |_| Ok(()))
}

/// [`run`], handing every `snapshot_every`-th state to `on_snapshot`.
pub fn run_with(
    initial: &DiscreteImmersion,
    cfg: &FlowConfig,
    on_snapshot: &mut dyn FnMut(&FlowState) -> Result<()>,
) -> Result<RunOutput> {
    let dims = initial.dims();
    cfg.validate(dims.n)?;
    let mut cfg = cfg.clone();
    let start = match cfg.chart_seed {
        Some(seed) => {
            let u = random_unitary(dims.m + 1, seed);
            if let Some(c) = &cfg.center {
                let v = CVec::from_iterator(c.len(), c.iter().map(|p| C64::new(p[0], p[1])));
                let w = &u * v;
                cfg.center = Some(w.iter().map(|z| [z.re, z.im]).collect());
            }
            rotate(initial, &u)?
        }
        None => initial.clone(),
    };
    let mut state = FlowState::new(start, 0.0, 0)?;
    if !cfg.waive_pinching {
        let (h2, m2): (Vec<f64>, Vec<f64>) = state
            .geometry
            .local
            .iter()
            .zip(&state.geometry.full_stencil)
            .filter(|(_, &f)| f)
            .map(|(l, _)| (l.norm_h2, l.mean2))
            .unzip();
        let report = classify_and_check(&h2, &m2, dims.n, dims.q)?;
        if report.verdict != Verdict::StrictlyPinched {
            return Err(Error::NotPinched(report.min_margin));
        }
    }
    let initial_spacing = state.spacing;
    let mut events = EventLog::default();
    let mut trajectory: Vec<MonitorRecord> = Vec::new();
    let mut prev: Option<FlowState> = None;
    let mut pending: Option<MonitorRecord> = None;
    let mut violated = false;
    let mut last_dt = 0.0;

    let (classification, stop) = loop {
        if state.step % cfg.monitor_every as u64 == 0 && pending.is_none() {
            let rec = monitors(&state, &cfg, last_dt)?;
            if let Some(u) = rec.max_u {
                if u >= 0.0 && !violated {
                    violated = true;
                    events.push(state.t, state.step, EventKind::PinchingViolated, json!({ "max_u": u }));
                }
            }
            pending = Some(rec);
        }
        if cfg.snapshot_every > 0 && state.step % cfg.snapshot_every as u64 == 0 {
            on_snapshot(&state)?;
        }
        let h2 = max_h2_full(&state);
        if h2 < cfg.decay_h2 {
            events.push(state.t, state.step, EventKind::DecayDetected, json!({ "max_h2": h2 }));
            break (Classification::DecayDetected, StopReason::DecayThreshold);
        }
        if h2 > cfg.blowup_h2 {
            let mut recs = trajectory.clone();
            recs.extend(pending.clone());
            if blowup_trend_holds(&recs, initial_spacing) {
                events.push(state.t, state.step, EventKind::BlowupDetected, json!({ "max_h2": h2 }));
                break (Classification::BlowupDetected, StopReason::BlowupThreshold);
            }
            break (Classification::Inconclusive, StopReason::BlowupThreshold);
        }
        if let (Some(r), Some(rec)) = (cfg.min_radius, &pending) {
            if rec.mean_radius.is_some_and(|x| x < r) {
                break (Classification::Inconclusive, StopReason::MinRadius);
            }
        }
        if let Some(tmax) = cfg.max_time {
            if state.t >= tmax * (1.0 - 1e-12) {
                break (Classification::Completed, StopReason::MaxTime);
            }
        }
        if state.step as usize >= cfg.max_steps {
            break (Classification::Inconclusive, StopReason::MaxSteps);
        }

        let mut dt = adaptive_dt(&state, &cfg);
        // Repeat the previous step where a residual is due, so the central
        // difference sees equal steps. The bound moves slowly between steps.
        let residual_due = cfg.residual_every > 0 && state.step > 0 && state.step % cfg.residual_every as u64 == 0;
        if residual_due && last_dt > 0.0 && last_dt <= HOLD_SLACK * dt {
            dt = last_dt;
        }
        if let Some(tmax) = cfg.max_time {
            dt = dt.min(tmax - state.t);
        }
        let mut next = None;
        for attempt in 0..=MAX_RETRIES {
            match step(&state, dt) {
                Ok(s) => {
                    next = Some(s);
                    break;
                }
                Err(e) => {
                    events.push(
                        state.t,
                        state.step,
                        EventKind::StepRejected,
                        json!({ "dt": dt, "attempt": attempt, "reason": e.to_string() }),
                    );
                    dt *= 0.5;
                }
            }
        }
        let Some(next) = next else {
            break (Classification::Aborted, StopReason::StepRejection);
        };
        if let Some(mut rec) = pending.take() {
            if rec.step == state.step {
                if let Some(p) = &prev {
                    if residual_due && ((state.t - p.t) - dt).abs() <= 1e-12 * dt {
                        rec.residual = Some(evolution_residual(p, &state, &next)?);
                    }
                }
                trajectory.push(rec);
            } else {
                pending = Some(rec);
            }
        }
        last_dt = dt;
        prev = Some(std::mem::replace(&mut state, next));
    };
    trajectory.extend(pending);
    events.push(
        state.t,
        state.step,
        EventKind::Completed,
        json!({ "classification": classification, "stop": stop }),
    );
    Ok(RunOutput { trajectory, events, classification, stop, final_state: state, initial_spacing })
}
