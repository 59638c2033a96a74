//! Machine- and human-readable verification reports.

use std::fmt::Write as _;

use opaque_core::opacity::{MatchCertificate, Trajectory};
use opaque_core::{Point, Status, Witness};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    /// Aggregate status over all reported times, when the command decides one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    pub per_k: Vec<KReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Largest radius over the reported times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_model_us: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pruned: Option<PrunedReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KReport {
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmax: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_adversary: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collusion_rounds: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps_used: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleCounts>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleCounts {
    pub secret: usize,
    pub nonsecret: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryReport {
    pub x0: Vec<f64>,
    pub controls: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateReport {
    pub output: Vec<f64>,
    pub secret: TrajectoryReport,
    pub nonsecret: TrajectoryReport,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WitnessReport {
    Violation {
        output: Vec<f64>,
        distance: f64,
        nearest: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        trajectory: Option<TrajectoryReport>,
    },
    Separation {
        distance: f64,
        secret_point: Vec<f64>,
        nonsecret_point: Vec<f64>,
    },
    Certificates {
        certificates: Vec<CertificateReport>,
    },
    Meeting {
        point: Vec<f64>,
    },
    Uncovered {
        state: Vec<f64>,
    },
    PerAdversary {
        statuses: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrunedReport {
    pub variant: String,
    pub k: usize,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Timing {
    pub total_ms: f64,
    pub per_k_ms: Vec<f64>,
}

pub fn vec_of(p: &Point) -> Vec<f64> {
    p.iter().copied().collect()
}

fn trajectory(t: &Trajectory) -> TrajectoryReport {
    TrajectoryReport {
        x0: vec_of(&t.x0),
        controls: t.controls.iter().map(vec_of).collect(),
    }
}

fn certificate(c: &MatchCertificate) -> CertificateReport {
    CertificateReport {
        output: vec_of(&c.output),
        secret: trajectory(&c.secret),
        nonsecret: trajectory(&c.nonsecret),
        residual: c.residual,
    }
}

pub fn statuses(s: &[Status]) -> Vec<String> {
    s.iter().map(|s| s.as_str().to_string()).collect()
}

impl From<&Witness> for WitnessReport {
    fn from(w: &Witness) -> Self {
        match w {
            Witness::Violation {
                output,
                distance,
                nearest,
                trajectory: t,
            } => WitnessReport::Violation {
                output: vec_of(output),
                distance: *distance,
                nearest: vec_of(nearest),
                trajectory: t.as_ref().map(trajectory),
            },
            Witness::Separation {
                distance,
                secret_point,
                nonsecret_point,
            } => WitnessReport::Separation {
                distance: *distance,
                secret_point: vec_of(secret_point),
                nonsecret_point: vec_of(nonsecret_point),
            },
            Witness::Certificates(cs) => WitnessReport::Certificates {
                certificates: cs.iter().map(certificate).collect(),
            },
            Witness::Meeting { point } => WitnessReport::Meeting { point: vec_of(point) },
            Witness::Uncovered { state } => WitnessReport::Uncovered { state: vec_of(state) },
            Witness::PerAdversary(s) => WitnessReport::PerAdversary { statuses: statuses(s) },
        }
    }
}

impl WitnessReport {
    pub fn kind(&self) -> &'static str {
        match self {
            WitnessReport::Violation { .. } => "violation",
            WitnessReport::Separation { .. } => "separation",
            WitnessReport::Certificates { .. } => "certificates",
            WitnessReport::Meeting { .. } => "meeting",
            WitnessReport::Uncovered { .. } => "uncovered",
            WitnessReport::PerAdversary { .. } => "per_adversary",
        }
    }

    fn summary(&self) -> String {
        match self {
            WitnessReport::Violation { output, distance, .. } => {
                format!("output {} at distance {}", fmt_vec(output), fmt_num(*distance))
            }
            WitnessReport::Separation { distance, .. } => format!("sets {} apart", fmt_num(*distance)),
            WitnessReport::Certificates { certificates } => {
                let worst = certificates.iter().map(|c| c.residual).fold(0.0, f64::max);
                format!("{} matches, worst residual {}", certificates.len(), fmt_num(worst))
            }
            WitnessReport::Meeting { point } => format!("shared output {}", fmt_vec(point)),
            WitnessReport::Uncovered { state } => format!("unexplained state {}", fmt_vec(state)),
            WitnessReport::PerAdversary { statuses } => statuses.join(" "),
        }
    }
}

/// Combined status over times: FAILS dominates, then UNKNOWN.
pub fn combine(statuses: impl IntoIterator<Item = Status>) -> Status {
    let mut out = Status::Holds;
    for s in statuses {
        match s {
            Status::Fails => return Status::Fails,
            Status::Unknown => out = Status::Unknown,
            Status::Holds => {}
        }
    }
    out
}

pub fn parse_status(s: &str) -> Option<Status> {
    match s {
        "HOLDS" => Some(Status::Holds),
        "FAILS" => Some(Status::Fails),
        "UNKNOWN" => Some(Status::Unknown),
        _ => None,
    }
}

/// Finite values only; JSON has no infinities.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn fmt_num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        let s = format!("{x:.6}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" { "0".into() } else { s.into() }
    } else {
        format!("{x:.3e}")
    }
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt_num(*x)).collect();
    format!("({})", parts.join(", "))
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_else(|| "-".into())
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            mode: None,
            status: None,
            per_k: Vec::new(),
            epsilon: None,
            radius: None,
            cost_model_us: None,
            pruned: None,
            messages: Vec::new(),
            timing: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// The same report minus wall-clock data, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Report {
            timing: None,
            ..self.clone()
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{}", self.command);
        if let Some(m) = &self.mode {
            let _ = write!(out, " [{m}]");
        }
        if let Some(s) = &self.status {
            let _ = write!(out, ": {s}");
        }
        out.push('\n');

        let header = ["k", "status", "radius", "threshold", "witness"];
        let rows: Vec<[String; 5]> = self
            .per_k
            .iter()
            .map(|r| {
                let mut w = r.witness.as_ref().map(|w| format!("{}: {}", w.kind(), w.summary())).unwrap_or_default();
                if let Some(pa) = &r.per_adversary {
                    if w.is_empty() {
                        w = format!("adversaries: {}", pa.join(" "));
                    }
                }
                if let Some(d) = r.dispersion {
                    if !w.is_empty() {
                        w.push_str("; ");
                    }
                    let _ = write!(w, "dispersion {}", fmt_num(d));
                }
                [
                    r.k.to_string(),
                    r.status.clone().unwrap_or_else(|| "-".into()),
                    opt(r.radius),
                    opt(r.threshold),
                    w,
                ]
            })
            .collect();
        let mut width = header.map(str::len);
        for row in &rows {
            for (w, cell) in width.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: [&str; 5]| {
            let mut s = String::new();
            for (i, c) in cells.iter().enumerate() {
                if i + 1 == cells.len() {
                    s.push_str(c);
                } else {
                    let _ = write!(s, "{c:<w$}  ", w = width[i]);
                }
            }
            s.trim_end().to_string() + "\n"
        };
        out.push_str(&line(header));
        for row in &rows {
            out.push_str(&line([&row[0], &row[1], &row[2], &row[3], &row[4]]));
        }
        if let Some(r) = self.radius {
            let _ = writeln!(out, "max radius: {}", fmt_num(r));
        }
        if let Some(c) = self.cost_model_us {
            let _ = writeln!(out, "predicted cost: {} us", fmt_num(c));
        }
        if let Some(p) = &self.pruned {
            let _ = writeln!(out, "pruned secret ({}, k = {}): {} halfspaces", p.variant, p.k, p.offsets.len());
            for (n, b) in p.normals.iter().zip(&p.offsets) {
                let _ = writeln!(out, "  {} . x <= {}", fmt_vec(n), fmt_num(*b));
            }
            if let Some(vs) = &p.vertices {
                let vs: Vec<String> = vs.iter().map(|v| fmt_vec(v)).collect();
                let _ = writeln!(out, "  vertices: {}", vs.join(" "));
            }
        }
        for m in &self.messages {
            let _ = writeln!(out, "note: {m}");
        }
        if let Some(t) = &self.timing {
            let _ = writeln!(out, "time: {} ms", fmt_num(t.total_ms));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,status,radius,threshold,witness_kind,witness_distance\n");
        for r in &self.per_k {
            let (kind, dist) = match &r.witness {
                Some(w @ WitnessReport::Violation { distance, .. }) | Some(w @ WitnessReport::Separation { distance, .. }) => {
                    (w.kind(), Some(*distance))
                }
                Some(w) => (w.kind(), None),
                None => ("", None),
            };
            let num = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.k,
                r.status.as_deref().unwrap_or(""),
                num(r.radius),
                num(r.threshold),
                kind,
                num(dist)
            );
        }
        out
    }
}
