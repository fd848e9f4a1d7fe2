//! Batch front end: configuration loading, command dispatch and output files.
//!
//! Every command writes the fully resolved configuration to `config.json` in
//! the output directory. Feeding that file back through `--config` reproduces
//! the run.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ambient::Dimensions;
use crate::error::{Error, Result};
use crate::flow::{run_with, write_trajectory_csv, Classification, FlowConfig};
use crate::immersion::{
    build_clifford_torus, build_geodesic_sphere, build_totally_geodesic, extract_geometry, perturb,
    snapshot::{read_snapshot, write_snapshot}, DiscreteImmersion, PerturbationSpec, TotallyGeodesicKind,
};
use crate::oracles::{falsify_catalog, SampleSpec};
use crate::pinching::{classify_and_check, verify_appendix, AppendixConfig, PinchingCase};

pub const SCHEMA_VERSION: u32 = 1;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// I/O or another failure outside the checked mathematics.
    pub const INTERNAL: i32 = 1;
    /// An inequality failed or a counterexample was confirmed.
    pub const FAILED: i32 = 2;
    pub const INCONCLUSIVE: i32 = 3;
    pub const ABORTED: i32 = 4;
    pub const CONFIG: i32 = 64;
}

#[derive(Debug, Clone, Parser)]
#[command(name = "cpflow", version, about = "Mean curvature flow in complex projective space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Seed for sampling, perturbations and chart rotations; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per core; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the pinching function inequalities on a grid.
    VerifyLemmas,
    /// Search the pointwise tensor inequalities for counterexamples.
    Falsify,
    /// Run the flow from a constructed or loaded immersion.
    Flow,
    /// Extract the geometry of an immersion and check its pinching.
    Geometry,
}

/// Initial immersion before an optional perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// Geodesic sphere of `radius` about `[1:0:...:0]` in `CP^m`.
    Sphere { m: usize, radius: f64, resolution: usize },
    TotallyGeodesic { variant: TotallyGeodesicKind, m: usize, n: usize, resolution: usize },
    CliffordTorus { m: usize, resolution: usize },
    /// Immersion read from a binary snapshot.
    Snapshot { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub profile: PerturbationSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    pub shape: Shape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<Perturbation>,
}

impl Default for InitialData {
    fn default() -> Self {
        Self { shape: Shape::Sphere { m: 2, radius: 0.6, resolution: 12 }, perturbation: None }
    }
}

impl InitialData {
    pub fn build(&self) -> Result<DiscreteImmersion> {
        let im = match &self.shape {
            Shape::Sphere { m, radius, resolution } => build_geodesic_sphere(*m, *radius, *resolution)?,
            Shape::TotallyGeodesic { variant, m, n, resolution } => {
                build_totally_geodesic(*variant, Dimensions::new(*m, *n)?, *resolution)?
            }
            Shape::CliffordTorus { m, resolution } => build_clifford_torus(*m, *resolution)?,
            Shape::Snapshot { path } => {
                let file = File::open(path)
                    .map_err(|e| Error::Config(format!("cannot open snapshot {}: {e}", path.display())))?;
                read_snapshot(std::io::BufReader::new(file))?.1
            }
        };
        match &self.perturbation {
            Some(p) => perturb(&im, p.amplitude, &p.profile, p.seed),
            None => Ok(im),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowJob {
    pub initial: InitialData,
    pub params: FlowConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryJob {
    pub initial: InitialData,
}

impl Default for GeometryJob {
    fn default() -> Self {
        Self { initial: InitialData { shape: Shape::CliffordTorus { m: 2, resolution: 32 }, perturbation: None } }
    }
}

/// Parameters of every command. Each command reads its own block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Applied to every seeded block when set.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default)]
    pub verify_lemmas: AppendixConfig,
    #[serde(default)]
    pub falsify: SampleSpec,
    #[serde(default)]
    pub flow: FlowJob,
    #[serde(default)]
    pub geometry: GeometryJob,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: None,
            threads: 0,
            verify_lemmas: AppendixConfig::default(),
            falsify: SampleSpec::default(),
            flow: FlowJob::default(),
            geometry: GeometryJob::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported, expected {SCHEMA_VERSION}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies command-line overrides and fills derived defaults.
    pub fn resolve(mut self, seed: Option<u64>, threads: Option<usize>) -> Self {
        if seed.is_some() {
            self.seed = seed;
        }
        if let Some(t) = threads {
            self.threads = t;
        }
        if let Some(s) = self.seed {
            self.falsify.seed = s;
            for init in [&mut self.flow.initial, &mut self.geometry.initial] {
                if let Some(p) = &mut init.perturbation {
                    p.seed = s;
                }
            }
            if self.flow.params.chart_seed.is_some() {
                self.flow.params.chart_seed = Some(s);
            }
        }
        if let Shape::Sphere { m, .. } = self.flow.initial.shape {
            if self.flow.params.center.is_none() {
                let mut c = vec![[0.0, 0.0]; m + 1];
                c[0] = [1.0, 0.0];
                self.flow.params.center = Some(c);
            }
        }
        self
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

/// Exit code for an error raised while running a command.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => exit::INTERNAL,
        Error::FlowAborted(_) => exit::ABORTED,
        _ => exit::CONFIG,
    }
}

/// Runs one command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path),
        None => Ok(RunConfig::default()),
    };
    let cfg = match cfg {
        Ok(c) => c.resolve(cli.seed, cli.threads),
        Err(e) => {
            eprintln!("error: {e}");
            return exit::CONFIG;
        }
    };
    match run_command(cli.command, &cfg, &cli.out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

/// Runs `command` with an already resolved configuration.
pub fn run_command(command: Command, cfg: &RunConfig, out: &Path) -> Result<i32> {
    validate(command, cfg)?;
    fs::create_dir_all(out)?;
    cfg.write_json(&out.join("config.json"))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::VerifyLemmas => cmd_verify_lemmas(&cfg.verify_lemmas, out),
        Command::Falsify => cmd_falsify(&cfg.falsify, out),
        Command::Flow => cmd_flow(&cfg.flow, out),
        Command::Geometry => cmd_geometry(&cfg.geometry, out),
    })
}

fn validate(command: Command, cfg: &RunConfig) -> Result<()> {
    match command {
        Command::VerifyLemmas => cfg.verify_lemmas.validate(),
        Command::Falsify => cfg.falsify.validate(),
        Command::Flow | Command::Geometry => Ok(()),
    }
}

pub fn cmd_verify_lemmas(cfg: &AppendixConfig, out: &Path) -> Result<i32> {
    let report = verify_appendix(cfg)?;
    report.write_json(&out.join("appendix_report.json"))?;
    report.write_csv(&out.join("appendix_report.csv"))?;
    // Checks at a fixed eps may fail above the largest passing eps; the
    // verdict only needs the eps sweep to be downward closed.
    let above_eps = report.failures().filter(|r| r.eps.is_some()).count();
    println!(
        "verify-lemmas: {} ({} inequality checks, {} closed forms, {above_eps} eps-dependent checks above the largest passing eps)",
        if report.all_pass { "PASS" } else { "FAIL" },
        report.inequalities.len(),
        report.closed_forms.len()
    );
    Ok(if report.all_pass { exit::OK } else { exit::FAILED })
}

pub fn cmd_falsify(spec: &SampleSpec, out: &Path) -> Result<i32> {
    let report = falsify_catalog(spec)?;
    report.write_json(BufWriter::new(File::create(out.join("falsify_report.json"))?))?;
    report.write_csv(BufWriter::new(File::create(out.join("falsify_report.csv"))?))?;
    let mut w = BufWriter::new(File::create(out.join("counterexamples.json"))?);
    serde_json::to_writer_pretty(&mut w, &report.counterexamples)?;
    w.flush()?;
    println!(
        "falsify: {} reports, {} confirmed counterexamples",
        report.reports.len(),
        report.counterexamples.len()
    );
    Ok(if report.counterexamples.is_empty() && report.pass { exit::OK } else { exit::FAILED })
}

pub fn cmd_flow(job: &FlowJob, out: &Path) -> Result<i32> {
    let initial = job.initial.build()?;
    let snap_dir = out.join("snapshots");
    if job.params.snapshot_every > 0 {
        fs::create_dir_all(&snap_dir)?;
    }
    let output = run_with(&initial, &job.params, &mut |state| {
        let path = snap_dir.join(format!("step_{:08}.cpsnap", state.step));
        let mut w = BufWriter::new(File::create(path)?);
        write_snapshot(&mut w, &state.immersion, state.t, state.step)?;
        w.flush()?;
        Ok(())
    })?;
    write_trajectory_csv(&output.trajectory, BufWriter::new(File::create(out.join("trajectory.csv"))?))?;
    output.events.write_jsonl(BufWriter::new(File::create(out.join("events.jsonl"))?))?;
    let summary = json!({
        "classification": output.classification,
        "stop": output.stop,
        "steps": output.final_state.step,
        "t": output.final_state.t,
        "initial_spacing": output.initial_spacing,
        "final_max_h2": output.trajectory.last().map(|r| r.max_h2),
    });
    let mut w = BufWriter::new(File::create(out.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, &summary)?;
    w.flush()?;
    let label = serde_json::to_value(output.classification)?;
    println!(
        "flow: {} after {} steps at t = {:.6e}",
        label.as_str().unwrap_or_default(),
        output.final_state.step,
        output.final_state.t
    );
    Ok(match output.classification {
        Classification::Completed | Classification::BlowupDetected | Classification::DecayDetected => exit::OK,
        Classification::Inconclusive => exit::INCONCLUSIVE,
        Classification::Aborted => exit::ABORTED,
    })
}

pub fn cmd_geometry(job: &GeometryJob, out: &Path) -> Result<i32> {
    let im = job.initial.build()?;
    let field = extract_geometry(&im)?;
    let dims = im.dims();
    let topo = im.topology();
    let case = PinchingCase::new(dims.n, dims.q, 0.0).ok();

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(out.join("nodes.csv"))?));
    let mut header: Vec<String> = vec!["node".into()];
    header.extend((0..topo.dim()).map(|a| format!("u{a}")));
    header.extend(
        ["full_stencil", "h2", "mean2", "traceless2", "grad_h2", "grad_mean2", "pinching_margin"].map(String::from),
    );
    w.write_record(&header)?;
    for (k, g) in field.nodes.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(topo.coords(&topo.multi_index(k)).iter().map(|u| u.to_string()));
        let margin = match &case {
            Some(c) => (c.pinching_rhs(g.invariants.mean2)? - g.invariants.h2).to_string(),
            None => String::new(),
        };
        row.extend([
            g.full_stencil.to_string(),
            g.invariants.h2.to_string(),
            g.invariants.mean2.to_string(),
            g.invariants.traceless2.to_string(),
            g.grad_h2.to_string(),
            g.grad_mean2.to_string(),
            margin,
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;

    let (h2, mean2): (Vec<f64>, Vec<f64>) =
        field.full_stencil_nodes().map(|g| (g.invariants.h2, g.invariants.mean2)).unzip();
    let pinching = match classify_and_check(&h2, &mean2, dims.n, dims.q) {
        Ok(r) => json!({ "case": r.case, "min_margin": r.min_margin, "verdict": r.verdict }),
        Err(e @ Error::UnsupportedCase { .. }) => json!({ "unsupported": e.to_string() }),
        Err(e) => return Err(e),
    };
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let summary = json!({
        "dims": dims,
        "nodes": im.len(),
        "full_stencil_nodes": h2.len(),
        "max_h2": max(&h2),
        "max_mean2": max(&mean2),
        "max_grad_h2": field.full_stencil_nodes().map(|g| g.grad_h2).fold(0.0, f64::max),
        "pinching": pinching,
    });
    let mut w = BufWriter::new(File::create(out.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, &summary)?;
    w.flush()?;
    println!("geometry: {} nodes, max |h|^2 = {:.6e}, pinching {}", im.len(), max(&h2), summary["pinching"]);
    Ok(exit::OK)
}
