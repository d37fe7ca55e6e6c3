//! Batch front end: one subcommand per stage, one output directory per run.
//!
//! Configuration is layered: built-in defaults, then the `--config` JSON
//! file, then flags. The merged configuration is validated (and input files
//! are read) before the output directory is touched, so a rejected run
//! leaves nothing behind. Once running, `manifest.json` is always written,
//! with `status: "failed"` and the error if the run fails.

pub mod config;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::curve::{
    close_curve, enclosed_area, extend_theta_with_loop, has_self_intersection, reconstruct_curve, track_point, Anchor,
};
use crate::diagnostics::{summarize, DiagnosticsRecorder};
use crate::error::{Error, Result};
use crate::evolve::evolve;
use crate::io::{self, StoredProfile};
use crate::profile::{build_profile, AngleProfile};
use crate::shooting::{
    classify_region, find_admissible_v0, integrate_profile_sampled, trace_admissible_arc, trace_admissible_curve,
    InitialPair,
};
use config::*;

#[derive(Debug, Parser)]
#[command(
    name = "cornerflow",
    version,
    about = "Self-similar corner formation for the planar curve flow"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON file with configuration values; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory of this run (default `runs/<command>`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find an admissible slope by bisection, or integrate a given pair.
    Shoot(ShootArgs),
    /// Follow the admissible curve in the (u0, v0) plane.
    Trace(TraceArgs),
    /// Classify escape directions on a grid of initial pairs.
    Raster(RasterArgs),
    /// Build the initial angle profile theta(s, 1).
    BuildProfile(BuildArgs),
    /// Evolve a profile towards t = 0 and record diagnostics.
    Evolve(EvolveArgs),
    /// Close the curve with a smooth loop (double bisection in alpha, beta).
    Close(CloseArgs),
    /// Curvature integral over a list of admissible pairs.
    Scan(ScanArgs),
    /// Follow one material point during an evolution.
    Track(TrackArgs),
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[command(flatten)]
    pub common: Common,
    /// u(0).
    #[arg(long, allow_hyphen_values = true)]
    pub u0: Option<f64>,
    /// Integrate this slope instead of bisecting.
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    /// Bisection bracket for u_x(0).
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["LO", "HI"])]
    pub bracket: Option<Vec<f64>>,
    /// Bracket width to stop at; 0 bisects to f64 resolution.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Left end of the stored profile.
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    /// Right end of the forward sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// RK4 step.
    #[arg(long, allow_hyphen_values = true)]
    pub dx: Option<f64>,
    /// Store every stride-th step.
    #[arg(long)]
    pub stride: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub common: Common,
    /// `continuation` (in u0) or `arc` (arc length).
    #[arg(long)]
    pub method: Option<String>,
    /// u0 interval for continuation.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["FROM", "TO"])]
    pub u0_range: Option<Vec<f64>>,
    /// Number of points.
    #[arg(long)]
    pub count: Option<usize>,
    /// Initial v0 bracket for continuation.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["LO", "HI"])]
    pub bracket: Option<Vec<f64>>,
    /// First pair of an arc trace.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["U0", "V0"])]
    pub start: Option<Vec<f64>>,
    /// Initial arc direction.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["DU", "DV"])]
    pub direction: Option<Vec<f64>>,
    /// Arc-length step.
    #[arg(long, allow_hyphen_values = true)]
    pub step: Option<f64>,
    /// Bisection tolerance; 0 bisects to f64 resolution.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Right end of the forward sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// RK4 step.
    #[arg(long, allow_hyphen_values = true)]
    pub dx: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RasterArgs {
    #[command(flatten)]
    pub common: Common,
    /// u0 interval.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["LO", "HI"])]
    pub u0_range: Option<Vec<f64>>,
    /// v0 interval.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["LO", "HI"])]
    pub v0_range: Option<Vec<f64>>,
    /// Grid points in u0 and v0.
    #[arg(long, num_args = 2, value_names = ["NU", "NV"])]
    pub counts: Option<Vec<usize>>,
    /// Right end of the forward sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// RK4 step.
    #[arg(long, allow_hyphen_values = true)]
    pub dx: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub common: Common,
    /// Preset 1, 2 or 3; other flags override its fields.
    #[arg(long)]
    pub experiment: Option<u32>,
    /// u(0) of the admissible pair.
    #[arg(long, allow_hyphen_values = true)]
    pub u0: Option<f64>,
    /// u_x(0) of the admissible pair.
    #[arg(long, allow_hyphen_values = true)]
    pub v0: Option<f64>,
    /// Left end of the ODE integration.
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    /// Right end of the ODE integration.
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// RK4 step.
    #[arg(long, allow_hyphen_values = true)]
    pub dx: Option<f64>,
    /// Intervals of the working grid.
    #[arg(long)]
    pub working_intervals: Option<usize>,
    /// Intervals of the final grid (power of two).
    #[arg(long)]
    pub n: Option<usize>,
    /// Tail nodes added on the left.
    #[arg(long)]
    pub pad_left: Option<usize>,
    /// Constant nodes added on the right.
    #[arg(long)]
    pub pad_right: Option<usize>,
    /// Apply the smoothing filter.
    #[arg(long)]
    pub filter: Option<bool>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Profile JSON from `build-profile` or `close`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Build this preset when no profile is given.
    #[arg(long)]
    pub experiment: Option<u32>,
    /// Time step, negative towards t = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    /// Times at which to store the profile.
    #[arg(long, num_args = 1.., value_name = "T")]
    pub snapshot_times: Option<Vec<f64>>,
    /// Record diagnostics every cadence steps.
    #[arg(long)]
    pub cadence: Option<usize>,
    /// Evaluate the cubic term on a 3N/2 grid.
    #[arg(long)]
    pub dealias: Option<bool>,
    /// Abort when a mode grows by this factor.
    #[arg(long, allow_hyphen_values = true)]
    pub overflow_factor: Option<f64>,
    /// |k| above which a node counts as support.
    #[arg(long, allow_hyphen_values = true)]
    pub support_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CloseArgs {
    #[command(flatten)]
    pub common: Common,
    /// Open profile JSON from `build-profile`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Build this preset when no profile is given.
    #[arg(long)]
    pub experiment: Option<u32>,
    /// Outer bracket in alpha.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["LO", "HI"])]
    pub alpha_bracket: Option<Vec<f64>>,
    /// Inner bracket in beta.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["LO", "HI"])]
    pub beta_bracket: Option<Vec<f64>>,
    /// Stop when |Im z(s_b)| <= inner_tol * length; 0 bisects fully.
    #[arg(long, allow_hyphen_values = true)]
    pub inner_tol: Option<f64>,
    /// Stop when |Re z(s_b)| <= outer_tol * length; 0 bisects fully.
    #[arg(long, allow_hyphen_values = true)]
    pub outer_tol: Option<f64>,
    /// Per bisection level.
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV with columns `u0,v0`.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// Left end of each ODE integration.
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    /// Right end of each ODE integration.
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    /// RK4 step.
    #[arg(long, allow_hyphen_values = true)]
    pub dx: Option<f64>,
    /// Spacing in x of the angle samples.
    #[arg(long, allow_hyphen_values = true)]
    pub node_dx: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[command(flatten)]
    pub common: Common,
    /// Profile JSON from `build-profile` or `close`.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Build this preset when no profile is given.
    #[arg(long)]
    pub experiment: Option<u32>,
    /// Arc-length label of the tracked point (a grid node).
    #[arg(long, allow_hyphen_values = true)]
    pub s0: Option<f64>,
    /// Starting position; defaults to the reconstructed curve.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["RE", "IM"])]
    pub z0: Option<Vec<f64>>,
    /// Time step, negative towards t = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    /// Final time.
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    /// Record every cadence steps.
    #[arg(long)]
    pub cadence: Option<usize>,
    /// Evaluate the cubic term on a 3N/2 grid.
    #[arg(long)]
    pub dealias: Option<bool>,
}

/// Collects the flags that were given into a JSON object.
#[derive(Default)]
struct Flags(Map<String, Value>);

impl Flags {
    fn put<T: Serialize>(mut self, key: &str, v: &Option<T>) -> Self {
        if let Some(v) = v {
            config::set_path(
                &mut self.0,
                key,
                serde_json::to_value(v).expect("flag values serialize"),
            );
        }
        self
    }

    fn pair(self, key: &str, v: &Option<Vec<f64>>) -> Self {
        let p = v.as_ref().map(|v| InitialPair { u0: v[0], v0: v[1] });
        self.put(key, &p)
    }
}

fn layered(common: &Common, flags: Flags) -> Result<Map<String, Value>> {
    let mut obj = config::load_object(common.config.as_deref())?;
    config::merge(&mut obj, flags.0);
    Ok(obj)
}

/// A validated run, ready to write into its output directory.
type Task = Box<dyn FnOnce(&Path) -> Result<Outcome>>;

struct Job {
    name: &'static str,
    out: PathBuf,
    config: Value,
    task: Task,
}

struct Outcome {
    results: Value,
    files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    status: &'static str,
    exit_code: i32,
    error: Option<String>,
    config: &'a Value,
    results: Value,
    files: Vec<String>,
    elapsed_seconds: f64,
}

fn out_dir(common: &Common, name: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(name))
}

/// Loads the initial datum of an evolution-type command.
enum Datum {
    Stored(StoredProfile),
    Preset(crate::profile::Experiment),
}

impl Datum {
    fn from_source(src: &ProfileSource) -> Result<Datum> {
        match &src.profile {
            Some(path) => {
                let stored = io::read_profile(path).map_err(|e| match e {
                    Error::Io(io) => Error::InvalidConfig(format!("cannot read {}: {io}", path.display())),
                    other => other,
                })?;
                Ok(Datum::Stored(stored))
            }
            None => Ok(Datum::Preset(src.preset()?)),
        }
    }

    fn materialize(self) -> Result<StoredProfile> {
        match self {
            Datum::Stored(s) => Ok(s),
            Datum::Preset(e) => {
                let cfg = e.config();
                let built = build_profile(&cfg)?;
                Ok(StoredProfile {
                    profile: built.profile,
                    pair: Some(cfg.pair),
                    closed: false,
                    provenance: json!({ "experiment": e.number(), "build": cfg }),
                })
            }
        }
    }
}

/// The curve anchor used for written curves: the limiting corner for open
/// profiles, `z(s_a) = 0` for closed ones.
fn default_anchor(profile: &AngleProfile, closed: bool) -> Anchor {
    if closed {
        Anchor::origin_at(profile.s_a)
    } else {
        Anchor::corner_right(profile)
    }
}

fn prepare(cli: Cli) -> Result<Job> {
    match cli.command {
        Command::Shoot(a) => {
            let flags = Flags::default()
                .put("u0", &a.u0)
                .put("v0", &a.v0)
                .put("bracket", &a.bracket)
                .put("tol", &a.tol)
                .put("x_min", &a.x_min)
                .put("x_max", &a.x_max)
                .put("dx", &a.dx)
                .put("stride", &a.stride);
            let cfg: ShootConfig = config::parse(layered(&a.common, flags)?)?;
            cfg.validate()?;
            Ok(Job {
                name: "shoot",
                out: out_dir(&a.common, "shoot"),
                config: serde_json::to_value(&cfg)?,
                task: Box::new(move |dir| run_shoot(&cfg, dir)),
            })
        }
        Command::Trace(a) => {
            let flags = Flags::default()
                .put("method", &a.method)
                .put("u0_range", &a.u0_range)
                .put("count", &a.count)
                .put("bracket", &a.bracket)
                .pair("start", &a.start)
                .put("direction", &a.direction)
                .put("step", &a.step)
                .put("tol", &a.tol)
                .put("x_max", &a.x_max)
                .put("dx", &a.dx);
            let cfg: TraceConfig = config::parse(layered(&a.common, flags)?)?;
            cfg.validate()?;
            Ok(Job {
                name: "trace",
                out: out_dir(&a.common, "trace"),
                config: serde_json::to_value(&cfg)?,
                task: Box::new(move |dir| run_trace(&cfg, dir)),
            })
        }
        Command::Raster(a) => {
            let flags = Flags::default()
                .put("u0_range", &a.u0_range)
                .put("v0_range", &a.v0_range)
                .put("counts", &a.counts)
                .put("x_max", &a.x_max)
                .put("dx", &a.dx);
            let cfg: RasterConfig = config::parse(layered(&a.common, flags)?)?;
            cfg.validate()?;
            Ok(Job {
                name: "raster",
                out: out_dir(&a.common, "raster"),
                config: serde_json::to_value(&cfg)?,
                task: Box::new(move |dir| run_raster(&cfg, dir)),
            })
        }
        Command::BuildProfile(a) => {
            let flags = Flags::default()
                .put("experiment", &a.experiment)
                .put("pair.u0", &a.u0)
                .put("pair.v0", &a.v0)
                .put("x_min", &a.x_min)
                .put("x_max", &a.x_max)
                .put("dx", &a.dx)
                .put("working_intervals", &a.working_intervals)
                .put("n", &a.n)
                .put("pad_left", &a.pad_left)
                .put("pad_right", &a.pad_right)
                .put("filter", &a.filter);
            let (number, cfg) = config::build_config(layered(&a.common, flags)?)?;
            let mut value = serde_json::to_value(&cfg)?;
            value["experiment"] = json!(number);
            Ok(Job {
                name: "build-profile",
                out: out_dir(&a.common, "build-profile"),
                config: value,
                task: Box::new(move |dir| run_build(&cfg, number, dir)),
            })
        }
        Command::Evolve(a) => {
            let flags = Flags::default()
                .put("profile", &a.profile)
                .put("experiment", &a.experiment)
                .put("dt", &a.dt)
                .put("t_end", &a.t_end)
                .put("snapshot_times", &a.snapshot_times)
                .put("cadence", &a.cadence)
                .put("dealias", &a.dealias)
                .put("overflow_factor", &a.overflow_factor)
                .put("support_threshold", &a.support_threshold);
            let cfg: EvolveConfig = config::parse(layered(&a.common, flags)?)?;
            cfg.validate()?;
            let datum = Datum::from_source(&cfg.source())?;
            if let Datum::Stored(s) = &datum {
                cfg.evolution().validate(s.profile.t)?;
                if s.pair.is_none() {
                    return Err(Error::InvalidConfig("profile carries no initial pair".into()));
                }
            }
            Ok(Job {
                name: "evolve",
                out: out_dir(&a.common, "evolve"),
                config: serde_json::to_value(&cfg)?,
                task: Box::new(move |dir| run_evolve(&cfg, datum, dir)),
            })
        }
        Command::Close(a) => {
            let flags = Flags::default()
                .put("profile", &a.profile)
                .put("experiment", &a.experiment)
                .put("alpha_bracket", &a.alpha_bracket)
                .put("beta_bracket", &a.beta_bracket)
                .put("inner_tol", &a.inner_tol)
                .put("outer_tol", &a.outer_tol)
                .put("max_iterations", &a.max_iterations);
            let cfg: CloseConfig = config::parse(layered(&a.common, flags)?)?;
            cfg.validate()?;
            let datum = Datum::from_source(&cfg.source())?;
            if let Datum::Stored(s) = &datum {
                if s.closed {
                    return Err(Error::InvalidConfig("profile is already closed".into()));
                }
            }
            Ok(Job {
                name: "close",
                out: out_dir(&a.common, "close"),
                config: serde_json::to_value(&cfg)?,
                task: Box::new(move |dir| run_close(&cfg, datum, dir)),
            })
        }
        Command::Scan(a) => {
            let flags = Flags::default()
                .put("samples", &a.samples)
                .put("x_min", &a.x_min)
                .put("x_max", &a.x_max)
                .put("dx", &a.dx)
                .put("node_dx", &a.node_dx);
            let cfg: ScanConfig = config::parse(layered(&a.common, flags)?)?;
            cfg.validate()?;
            let path = cfg.samples.clone().expect("validated");
            let pairs = io::read_pairs(&path).map_err(|e| match e {
                Error::Csv(c) => Error::InvalidConfig(format!("cannot read {}: {c}", path.display())),
                other => other,
            })?;
            Ok(Job {
                name: "scan",
                out: out_dir(&a.common, "scan"),
                config: serde_json::to_value(&cfg)?,
                task: Box::new(move |dir| run_scan(&cfg, &pairs, dir)),
            })
        }
        Command::Track(a) => {
            let flags = Flags::default()
                .put("profile", &a.profile)
                .put("experiment", &a.experiment)
                .put("s0", &a.s0)
                .put("z0", &a.z0)
                .put("dt", &a.dt)
                .put("t_end", &a.t_end)
                .put("cadence", &a.cadence)
                .put("dealias", &a.dealias);
            let cfg: TrackConfig = config::parse(layered(&a.common, flags)?)?;
            cfg.validate()?;
            let datum = Datum::from_source(&cfg.source())?;
            if let Datum::Stored(s) = &datum {
                cfg.evolution().validate(s.profile.t)?;
            }
            Ok(Job {
                name: "track",
                out: out_dir(&a.common, "track"),
                config: serde_json::to_value(&cfg)?,
                task: Box::new(move |dir| run_track(&cfg, datum, dir)),
            })
        }
    }
}

fn run_shoot(cfg: &ShootConfig, dir: &Path) -> Result<Outcome> {
    let v0 = match (cfg.bracket, cfg.v0) {
        (Some([lo, hi]), _) => find_admissible_v0(cfg.u0, lo, hi, cfg.tol, cfg.x_max, cfg.dx)?,
        (None, Some(v0)) => v0,
        (None, None) => InitialPair::reference().v0,
    };
    let pair = InitialPair::new(cfg.u0, v0)?;
    let sol = integrate_profile_sampled(pair, cfg.x_min, cfg.x_max, cfg.dx, cfg.stride)?;
    io::write_profile_solution(&dir.join("profile.csv"), &sol)?;
    Ok(Outcome {
        results: json!({
            "u0": pair.u0,
            "v0": pair.v0,
            "forward_verdict": sol.forward_verdict.label(),
            "x_escape": sol.forward_verdict.x_escape(),
            "decay_floor": sol.floor,
        }),
        files: vec!["profile.csv".into()],
    })
}

fn run_trace(cfg: &TraceConfig, dir: &Path) -> Result<Outcome> {
    let opts = crate::shooting::ShootingOptions {
        x_max: cfg.x_max,
        dx: cfg.dx,
        ..Default::default()
    };
    let pairs = match cfg.method {
        TraceMethod::Continuation => {
            trace_admissible_curve(&cfg.u0_samples(), (cfg.bracket[0], cfg.bracket[1]), cfg.tol, &opts)?
        }
        TraceMethod::Arc => trace_admissible_arc(
            cfg.start,
            (cfg.direction[0], cfg.direction[1]),
            cfg.step,
            cfg.count,
            cfg.tol,
            &opts,
        )?,
    };
    io::write_pairs(&dir.join("admissible_curve.csv"), &pairs)?;
    Ok(Outcome {
        results: json!({ "count": pairs.len(), "first": pairs.first(), "last": pairs.last() }),
        files: vec!["admissible_curve.csv".into()],
    })
}

fn run_raster(cfg: &RasterConfig, dir: &Path) -> Result<Outcome> {
    let raster = classify_region(
        (cfg.u0_range[0], cfg.u0_range[1]),
        (cfg.v0_range[0], cfg.v0_range[1]),
        (cfg.counts[0], cfg.counts[1]),
        cfg.x_max,
        cfg.dx,
    )?;
    io::write_raster(&dir.join("raster.csv"), &raster)?;
    let count = |s: i8| raster.cells.iter().filter(|c| c.verdict.sign() == s).count();
    Ok(Outcome {
        results: json!({
            "plus_infinity": count(1),
            "minus_infinity": count(-1),
            "undecided": count(0),
            "non_finite": raster.cells.iter().filter(|c| c.non_finite).count(),
        }),
        files: vec!["raster.csv".into()],
    })
}

fn run_build(cfg: &crate::profile::BuildConfig, number: u32, dir: &Path) -> Result<Outcome> {
    let built = build_profile(cfg)?;
    let w = &built.working;
    io::write_rows(
        &dir.join("working.csv"),
        &["s", "theta", "k"],
        (0..w.len()).map(|j| vec![io::fmt_f64(w.s(j)), io::fmt_f64(w.theta[j]), io::fmt_f64(w.k[j])]),
    )?;
    let p = &built.profile;
    let stored = StoredProfile {
        profile: p.clone(),
        pair: Some(cfg.pair),
        closed: false,
        provenance: json!({ "experiment": number, "build": cfg }),
    };
    io::write_profile(dir, "profile", &stored)?;
    Ok(Outcome {
        results: json!({
            "s_a": p.s_a,
            "s_b": p.s_b,
            "n": p.n,
            "delta_s": p.delta_s,
            "theta_minus": p.theta_minus,
            "theta_plus": p.theta_plus,
            "turning": p.turning(),
            "origin_index": p.origin_index(),
            "working_domain": [w.s_first(), w.s_last()],
            "first_max": built.estimate.first_max,
            "first_min": built.estimate.first_min,
            "joint": built.joint,
        }),
        files: vec!["profile.json".into(), "profile.csv".into(), "working.csv".into()],
    })
}

fn run_evolve(cfg: &EvolveConfig, datum: Datum, dir: &Path) -> Result<Outcome> {
    let stored = datum.materialize()?;
    let pair = stored
        .pair
        .ok_or_else(|| Error::InvalidConfig("profile carries no initial pair".into()))?;
    let evo = cfg.evolution();
    evo.validate(stored.profile.t)?;
    let mut recorder = DiagnosticsRecorder::new(pair.u0, stored.closed).with_threshold(cfg.support_threshold);
    let result = evolve(&stored.profile, &evo, &mut [&mut recorder]);
    // whatever was recorded is written even if the run broke off
    io::write_diagnostics(&dir.join("diagnostics.csv"), &recorder.records)?;
    let summary = summarize(&recorder.records);
    io::write_json(&dir.join("summary.json"), &summary)?;
    let out = result?;
    let mut files = vec!["diagnostics.csv".to_string(), "summary.json".to_string()];
    let mut snapshots = Vec::new();
    let write_snapshot = |stem: &str, p: &AngleProfile, files: &mut Vec<String>| -> Result<()> {
        let s = StoredProfile {
            profile: p.clone(),
            pair: stored.pair,
            closed: stored.closed,
            provenance: json!({ "evolved_from": stored.provenance, "t": p.t }),
        };
        io::write_profile(dir, stem, &s)?;
        let curve = reconstruct_curve(p, default_anchor(p, stored.closed));
        io::write_curve(&dir.join(format!("{stem}_curve.csv")), &curve)?;
        files.extend([
            format!("{stem}.json"),
            format!("{stem}.csv"),
            format!("{stem}_curve.csv"),
        ]);
        Ok(())
    };
    for (i, (t_req, p)) in out.snapshots.iter().enumerate() {
        let stem = format!("snapshot_{i:03}");
        write_snapshot(&stem, p, &mut files)?;
        snapshots.push(json!({ "requested_t": t_req, "t": p.t, "stem": stem }));
    }
    write_snapshot("final", &out.last, &mut files)?;
    Ok(Outcome {
        results: json!({
            "steps": out.steps,
            "t_final": out.last.t,
            "closed": stored.closed,
            "max_pin_residual": out.max_pin_residual,
            "max_imag_residual": out.max_imag_residual,
            "snapshots": snapshots,
            "summary": summary,
        }),
        files,
    })
}

fn run_close(cfg: &CloseConfig, datum: Datum, dir: &Path) -> Result<Outcome> {
    let stored = datum.materialize()?;
    let result = close_curve(&stored.profile, &cfg.options())?;
    io::write_closure_log(&dir.join("closure_log.csv"), &result.log)?;
    let closed = extend_theta_with_loop(&stored.profile, result.params)?;
    let curve = reconstruct_curve(&closed, default_anchor(&closed, true));
    io::write_curve(&dir.join("curve.csv"), &curve)?;
    let out = StoredProfile {
        profile: closed.clone(),
        pair: stored.pair,
        closed: true,
        provenance: json!({ "closed_from": stored.provenance, "alpha": result.params.alpha, "beta": result.params.beta }),
    };
    io::write_profile(dir, "closed", &out)?;
    Ok(Outcome {
        results: json!({
            "alpha": result.params.alpha,
            "beta": result.params.beta,
            "residual": [result.residual.re, result.residual.im],
            "outer_iterations": result.outer_iterations,
            "gap_evaluations": result.log.len(),
            "nodes": closed.n + 1,
            "s_a": closed.s_a,
            "s_b": closed.s_b,
            "length": closed.length(),
            "area": enclosed_area(&curve),
            "reconstructed_gap": curve.gap().norm(),
            "self_intersecting": has_self_intersection(&curve, 16),
        }),
        files: vec![
            "closure_log.csv".into(),
            "curve.csv".into(),
            "closed.json".into(),
            "closed.csv".into(),
        ],
    })
}

fn run_scan(cfg: &ScanConfig, pairs: &[InitialPair], dir: &Path) -> Result<Outcome> {
    let rows = crate::diagnostics::scan_curvature_integral(pairs, &cfg.options());
    io::write_scan(&dir.join("scan.csv"), &rows)?;
    let values: Vec<f64> = rows.iter().filter_map(|r| r.integral).collect();
    let failures: Vec<Value> = rows
        .iter()
        .filter(|r| r.failure.is_some())
        .map(|r| json!({ "pair": r.pair, "error": r.failure }))
        .collect();
    Ok(Outcome {
        results: json!({
            "rows": rows.len(),
            "failures": failures,
            "min_integral": values.iter().copied().reduce(f64::min),
            "max_integral": values.iter().copied().reduce(f64::max),
        }),
        files: vec!["scan.csv".into()],
    })
}

fn run_track(cfg: &TrackConfig, datum: Datum, dir: &Path) -> Result<Outcome> {
    let stored = datum.materialize()?;
    let p = &stored.profile;
    let z0 = match cfg.z0 {
        Some([re, im]) => Complex64::new(re, im),
        None => {
            let j = p.node_index(cfg.s0).ok_or(Error::NodeMissing { s: cfg.s0 })?;
            reconstruct_curve(p, default_anchor(p, stored.closed)).z[j]
        }
    };
    let evo = cfg.evolution();
    evo.validate(p.t)?;
    let track = track_point(p, &evo, cfg.s0, z0)?;
    io::write_track(&dir.join("track.csv"), &track)?;
    let last = track.last().copied();
    Ok(Outcome {
        results: json!({
            "s0": cfg.s0,
            "z0": [z0.re, z0.im],
            "records": track.len(),
            "final": last.map(|l| json!({ "t": l.t, "theta": l.theta, "z": [l.z.re, l.z.im] })),
        }),
        files: vec!["track.csv".into()],
    })
}

/// Runs one parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let job = match prepare(cli) {
        Ok(job) => job,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = std::fs::create_dir_all(&job.out) {
        eprintln!("error: cannot create {}: {e}", job.out.display());
        return Error::Io(e).exit_code();
    }
    let started = Instant::now();
    let outcome = (job.task)(&job.out);
    let elapsed_seconds = started.elapsed().as_secs_f64();
    let (status, exit_code, error, results, files) = match outcome {
        Ok(o) => ("ok", 0, None, o.results, o.files),
        Err(e) => {
            eprintln!("error: {e}");
            ("failed", e.exit_code(), Some(e.to_string()), Value::Null, Vec::new())
        }
    };
    let manifest = Manifest {
        tool: "cornerflow",
        version: env!("CARGO_PKG_VERSION"),
        command: job.name,
        status,
        exit_code,
        error,
        config: &job.config,
        results,
        files,
        elapsed_seconds,
    };
    if let Err(e) = io::write_json(&job.out.join("manifest.json"), &manifest) {
        eprintln!("error: cannot write manifest: {e}");
        if exit_code == 0 {
            return e.exit_code();
        }
    }
    if exit_code == 0 {
        println!("{}", job.out.join("manifest.json").display());
    }
    exit_code
}

/// Parses `std::env::args` and runs; the entry point of the binary.
pub fn main_from_env() -> i32 {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                Error::InvalidConfig(String::new()).exit_code()
            } else {
                0
            }
        }
    }
}
