//! Subcommands and the exit-code contract.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use opaque_core::approx::{verify_sound, CostModel};
use opaque_core::decentralized::{
    check_co_opacity_with, check_decentralized, simulate_collusion, CoOpacityOptions, CoordinatorRule,
};
use opaque_core::epsilon::{check_eps_k_iso, opacity_radius};
use opaque_core::geometry::distance_to_hull;
use opaque_core::nonlinear::nl_falsify;
use opaque_core::opacity::{check_strong_k_iso, check_weak_k_iso, prune_secret, prune_secret_existential};
use opaque_core::{Error, HPolytope, Point, Status, Verdict};
use rayon::prelude::*;

use crate::plot::{render_svg, vertices_csv, PlotInput};
use crate::report::{combine, finite, statuses, vec_of, KReport, PrunedReport, Report, SampleCounts, Timing, WitnessReport};
use crate::scenario::{load_path, Loaded, ScenarioFile, SetSpec};

pub const EXIT_HOLDS: i32 = 0;
pub const EXIT_FAILS: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Environment variable capping the per-k worker pool.
pub const THREADS_VAR: &str = "OPAQUE_REACH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "opaque-reach", version, about = "Initial-state opacity verification for linear and nonlinear systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide opacity at every scheduled time.
    Check(CheckArgs),
    /// Report the opacity radius at every scheduled time.
    Radius(RadiusArgs),
    /// Shrink the secret set until it is strongly opaque.
    Prune(PruneArgs),
    /// Draw the secret and nonsecret output sets.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckMode {
    Strong,
    Weak,
    Eps,
    Decentralized,
    Co,
    Collusion,
    Sound,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PruneVariant {
    /// Keep states whose every output is matched.
    Universal,
    /// Keep states with at least one matched output.
    Existential,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (JSON).
    pub scenario: PathBuf,
    /// Observation times; overrides the scenario schedule.
    #[arg(long = "k", value_delimiter = ',')]
    pub k: Vec<usize>,
    /// Stdout format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = CheckMode::Strong)]
    pub mode: CheckMode,
    /// Tolerance for eps mode; defaults to the scenario's epsilon.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Zonotope reduction order for sound mode.
    #[arg(long, default_value_t = 2)]
    pub order: usize,
    /// Sample-matching distance for nonlinear mode.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Seed for sampling fallbacks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample budget for the co-opacity fallback.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[command(flatten)]
    pub common: Common,
    /// Compare each radius against this tolerance.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = PruneVariant::Universal)]
    pub variant: PruneVariant,
    /// Write a copy of the scenario with the pruned secret set.
    #[arg(long)]
    pub write_scenario: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Scenario file (JSON).
    pub scenario: PathBuf,
    /// Observation time; defaults to the last scheduled time.
    #[arg(long = "k")]
    pub k: Option<usize>,
    /// Output axes to project on.
    #[arg(long, num_args = 2, value_names = ["I", "J"], default_values_t = [0, 1])]
    pub proj: Vec<usize>,
    /// Draw the radius arrow and compare it with this tolerance.
    #[arg(long)]
    pub eps: Option<f64>,
    /// SVG destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Vertex CSV destination; defaults next to the SVG.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// A failed command: message plus exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::input(e.to_string())
    }
}

/// Everything a run produced: the report (if any), stdout text and code.
#[derive(Debug)]
pub struct Outcome {
    pub report: Option<Report>,
    pub stdout: String,
    pub code: i32,
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Holds => EXIT_HOLDS,
        Status::Fails => EXIT_FAILS,
        Status::Unknown => EXIT_UNKNOWN,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Check(a) => finish(cmd_check(a)?, &a.common),
        Command::Radius(a) => finish(cmd_radius(a)?, &a.common),
        Command::Prune(a) => finish(cmd_prune(a)?, &a.common),
        Command::Plot(a) => cmd_plot(a),
    }
}

fn finish((report, code): (Report, i32), common: &Common) -> Result<Outcome, Failure> {
    if let Some(path) = &common.out {
        write_file(path, &report.to_json())?;
    }
    let stdout = match common.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    Ok(Outcome {
        report: Some(report),
        stdout,
        code,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    load_path(path).map_err(|e| Failure::input(e.to_string()))
}

fn times(common: &Common, loaded: &Loaded) -> Result<Vec<usize>, Failure> {
    let ks = if common.k.is_empty() {
        loaded.file.schedule.clone()
    } else {
        common.k.clone()
    };
    if ks.contains(&0) {
        return Err(Failure::input("--k: observation times start at 1"));
    }
    Ok(ks)
}

fn pool() -> Result<rayon::ThreadPool, Failure> {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::input(format!("{THREADS_VAR} must be a positive integer, found '{v}'")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::input(format!("cannot start workers: {e}")))
}

/// Runs `f` for every time on the worker pool; results keep input order.
fn per_k<F>(ks: &[usize], f: F) -> Result<(Vec<KReport>, Vec<f64>), Failure>
where
    F: Fn(usize) -> Result<KReport, Failure> + Sync,
{
    let results: Vec<(Result<KReport, Failure>, f64)> = pool()?.install(|| {
        ks.par_iter()
            .map(|&k| {
                let t = Instant::now();
                let r = f(k);
                (r, t.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });
    let mut reports = Vec::with_capacity(ks.len());
    let mut ms = Vec::with_capacity(ks.len());
    for (r, t) in results {
        reports.push(r?);
        ms.push(t);
    }
    Ok((reports, ms))
}

fn verdict_report(v: &Verdict) -> KReport {
    KReport {
        k: v.k,
        status: Some(v.status.as_str().into()),
        witness: v.witness.as_ref().map(WitnessReport::from),
        ..KReport::default()
    }
}

fn status_of(r: &KReport) -> Status {
    r.status.as_deref().and_then(crate::report::parse_status).unwrap_or(Status::Unknown)
}

fn require<'a, T>(x: Option<&'a T>, what: &str, mode: &str) -> Result<&'a T, Failure> {
    x.ok_or_else(|| Failure::input(format!("mode {mode} requires {what}")))
}

fn resolve_eps(flag: Option<f64>, file: Option<f64>) -> Result<Option<f64>, Failure> {
    match flag.or(file) {
        Some(e) if !(e >= 0.0) || !e.is_finite() => Err(Failure::input("--eps must be finite and nonnegative")),
        e => Ok(e),
    }
}

pub fn cmd_check(a: &CheckArgs) -> Result<(Report, i32), Failure> {
    let start = Instant::now();
    let loaded = load(&a.common.scenario)?;
    let ks = times(&a.common, &loaded)?;
    let mode = a.mode.to_possible_value().expect("named").get_name().to_string();
    let mut report = Report::new("check");
    report.mode = Some(mode.clone());

    let (rows, ms) = if a.mode == CheckMode::Nonlinear {
        let nl = require(loaded.nonlinear.as_ref(), "a nonlinear section", &mode)?;
        let delta = a.delta.ok_or_else(|| Failure::input("mode nonlinear requires --delta"))?;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Failure::input("--delta must be positive and finite"));
        }
        let u = loaded.inputs.to_vpolytope(&loaded.tol)?;
        per_k(&ks, |k| {
            let v = nl_falsify(nl, &loaded.secret, &loaded.nonsecret, &u, k, delta, &loaded.grid, &loaded.tol)?;
            Ok(KReport {
                dispersion: finite(v.dispersion),
                samples: Some(SampleCounts {
                    secret: v.secret_samples,
                    nonsecret: v.nonsecret_samples,
                }),
                ..verdict_report(&v.verdict)
            })
        })?
    } else {
        let sc = require(loaded.scenario.as_ref(), "a system section", &mode)?;
        match a.mode {
            CheckMode::Strong => per_k(&ks, |k| Ok(verdict_report(&check_strong_k_iso(sc, k)?)))?,
            CheckMode::Weak => per_k(&ks, |k| Ok(verdict_report(&check_weak_k_iso(sc, k)?)))?,
            CheckMode::Sound => {
                if a.order == 0 {
                    return Err(Failure::input("--order must be at least 1"));
                }
                let model = CostModel::default();
                report.cost_model_us = Some(ks.iter().map(|&k| model.predict(sc.sys.n(), sc.sys.p(), k, 2, 2)).sum());
                per_k(&ks, |k| Ok(verdict_report(&verify_sound(sc, k, a.order)?)))?
            }
            CheckMode::Eps => {
                let eps = resolve_eps(a.eps, loaded.file.epsilon)?
                    .ok_or_else(|| Failure::input("mode eps requires --eps or an epsilon field"))?;
                report.epsilon = Some(eps);
                per_k(&ks, |k| {
                    let v = check_eps_k_iso(sc, k, eps)?;
                    Ok(KReport {
                        k,
                        status: Some(v.status.as_str().into()),
                        radius: Some(v.radius),
                        threshold: Some(v.threshold),
                        argmax: Some(vec_of(&v.argmax_vertex)),
                        ..KReport::default()
                    })
                })?
            }
            CheckMode::Decentralized => {
                let ens = require(loaded.ensemble.as_ref(), "adversary output maps", &mode)?;
                per_k(&ks, |k| {
                    let v = check_decentralized(sc, ens, k)?;
                    let each: Vec<Status> = v.per_adversary.iter().map(|p| p.status).collect();
                    Ok(KReport {
                        per_adversary: Some(statuses(&each)),
                        ..verdict_report(&v.aggregate)
                    })
                })?
            }
            CheckMode::Co => {
                let ens = require(loaded.ensemble.as_ref(), "adversary output maps", &mode)?;
                let mut opts = CoOpacityOptions {
                    seed: a.seed,
                    ..CoOpacityOptions::default()
                };
                if let Some(s) = a.samples {
                    opts.samples = s;
                }
                per_k(&ks, |k| Ok(verdict_report(&check_co_opacity_with(sc, ens, CoordinatorRule::Union, k, &opts)?)))?
            }
            CheckMode::Collusion => {
                let ens = require(loaded.ensemble.as_ref(), "adversary output maps", &mode)?;
                let graph = require(loaded.graph.as_ref(), "a communication graph", &mode)?;
                per_k(&ks, |k| {
                    let out = simulate_collusion(sc, ens, graph, k)?;
                    Ok(KReport {
                        per_adversary: Some(statuses(out.final_statuses())),
                        collusion_rounds: Some(out.rounds.iter().map(|r| statuses(r)).collect()),
                        maps_used: Some(out.maps_used.clone()),
                        ..verdict_report(&out.aggregate)
                    })
                })?
            }
            CheckMode::Nonlinear => unreachable!(),
        }
    };
    let status = combine(rows.iter().map(status_of));
    if a.mode == CheckMode::Eps {
        report.radius = rows.iter().filter_map(|r| r.radius).reduce(f64::max);
    }
    report.status = Some(status.as_str().into());
    report.per_k = rows;
    report.timing = Some(Timing {
        total_ms: start.elapsed().as_secs_f64() * 1e3,
        per_k_ms: ms,
    });
    Ok((report, exit_code(status)))
}

pub fn cmd_radius(a: &RadiusArgs) -> Result<(Report, i32), Failure> {
    let start = Instant::now();
    let loaded = load(&a.common.scenario)?;
    let ks = times(&a.common, &loaded)?;
    let sc = require(loaded.scenario.as_ref(), "a system section", "radius")?;
    let eps = resolve_eps(a.eps, loaded.file.epsilon)?;
    let mut report = Report::new("radius");
    report.epsilon = eps;
    let (rows, ms) = per_k(&ks, |k| {
        let (r, arg) = opacity_radius(sc, k)?;
        let status = eps.map(|e| if r <= e + sc.tol.geom_eps { Status::Holds } else { Status::Fails });
        Ok(KReport {
            k,
            status: status.map(|s| s.as_str().into()),
            radius: Some(r),
            threshold: eps,
            argmax: Some(vec_of(&arg)),
            ..KReport::default()
        })
    })?;
    report.radius = rows.iter().filter_map(|r| r.radius).reduce(f64::max);
    let code = if eps.is_some() {
        let s = combine(rows.iter().map(status_of));
        report.status = Some(s.as_str().into());
        exit_code(s)
    } else {
        EXIT_HOLDS
    };
    report.per_k = rows;
    report.timing = Some(Timing {
        total_ms: start.elapsed().as_secs_f64() * 1e3,
        per_k_ms: ms,
    });
    Ok((report, code))
}

fn h_report(h: &HPolytope, variant: PruneVariant, k: usize, vertices: Option<Vec<Vec<f64>>>) -> PrunedReport {
    PrunedReport {
        variant: variant.to_possible_value().expect("named").get_name().into(),
        k,
        normals: h.normals().iter().map(vec_of).collect(),
        offsets: h.offsets().to_vec(),
        vertices,
    }
}

pub fn cmd_prune(a: &PruneArgs) -> Result<(Report, i32), Failure> {
    let start = Instant::now();
    let loaded = load(&a.common.scenario)?;
    let sc = require(loaded.scenario.as_ref(), "a system section", "prune")?;
    let k = match a.common.k.as_slice() {
        [] => *loaded.file.schedule.last().expect("nonempty schedule"),
        [k] => *k,
        _ => return Err(Failure::input("prune takes a single --k")),
    };
    if k == 0 {
        return Err(Failure::input("--k: observation times start at 1"));
    }
    let mut report = Report::new("prune");
    report.mode = Some(a.variant.to_possible_value().expect("named").get_name().into());
    let result = match a.variant {
        PruneVariant::Universal => prune_secret(sc, k),
        PruneVariant::Existential => prune_secret_existential(sc, k),
    };
    let t = start.elapsed().as_secs_f64() * 1e3;
    report.timing = Some(Timing {
        total_ms: t,
        per_k_ms: vec![t],
    });
    let h = match result {
        Ok(h) => h,
        Err(Error::Unsalvageable { distance }) => {
            report.messages.push(format!(
                "secret set is unsalvageable: secret and nonsecret outputs at k = {k} are {distance:e} apart"
            ));
            return Ok((report, EXIT_FAILS));
        }
        Err(Error::PrunedSecretEmpty) => {
            report.messages.push(format!("no secret state survives pruning at k = {k}"));
            return Ok((report, EXIT_FAILS));
        }
        Err(e) => return Err(e.into()),
    };
    let vertices = if sc.sys.n() <= 3 {
        Some(h.vertices(&sc.tol)?)
    } else {
        report.messages.push("vertex enumeration skipped for state dimension above 3".into());
        None
    };
    report.pruned = Some(h_report(&h, a.variant, k, vertices.as_ref().map(|v| v.vertices().iter().map(vec_of).collect())));
    if let Some(path) = &a.write_scenario {
        let v = vertices.ok_or_else(|| Failure::input("--write-scenario needs a state dimension of at most 3"))?;
        let file = ScenarioFile {
            sets: crate::scenario::SetsSpec {
                secret: SetSpec::Vertices(v.vertices().iter().map(vec_of).collect()),
                ..loaded.file.sets.clone()
            },
            schedule: vec![k],
            ..loaded.file.clone()
        };
        let mut text = serde_json::to_string_pretty(&file).expect("scenarios serialize");
        text.push('\n');
        write_file(path, &text)?;
    }
    Ok((report, EXIT_HOLDS))
}

pub fn cmd_plot(a: &PlotArgs) -> Result<Outcome, Failure> {
    let loaded = load(&a.scenario)?;
    let sc = require(loaded.scenario.as_ref(), "a system section", "plot")?;
    let k = a.k.unwrap_or_else(|| *loaded.file.schedule.last().expect("nonempty schedule"));
    if k == 0 {
        return Err(Failure::input("--k: observation times start at 1"));
    }
    let eps = resolve_eps(a.eps, None)?;
    let tol = &sc.tol;
    let ys = sc.secret_output(k)?.to_vpolytope(tol)?;
    let yns = sc.nonsecret_output(k)?.to_vpolytope(tol)?;
    let proj = (a.proj[0], a.proj[1]);
    let mut title = format!("k = {k}");
    let arrow = match eps {
        Some(e) => {
            let (r, from) = opacity_radius(sc, k)?;
            let to: Point = distance_to_hull(&from, &yns, tol).point_b;
            let s = if r <= e + tol.geom_eps { Status::Holds } else { Status::Fails };
            title.push_str(&format!(", eps = {e}: {}", s.as_str()));
            Some((from, to, r))
        }
        None => None,
    };
    let svg = render_svg(&PlotInput {
        secret: &ys,
        nonsecret: &yns,
        proj,
        arrow,
        title,
    })
    .map_err(|e| Failure::input(format!("--proj: {e}")))?;
    let csv = vertices_csv(&ys, &yns);
    let mut stdout = String::new();
    match &a.out {
        Some(path) => {
            write_file(path, &svg)?;
            let csv_path = a.csv.clone().unwrap_or_else(|| path.with_extension("csv"));
            write_file(&csv_path, &csv)?;
        }
        None => {
            stdout = svg;
            if let Some(path) = &a.csv {
                write_file(path, &csv)?;
            }
        }
    }
    Ok(Outcome {
        report: None,
        stdout,
        code: 0,
    })
}
