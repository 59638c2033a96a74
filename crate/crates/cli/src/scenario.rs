//! Scenario files: JSON schema, load-time validation and conversion into
//! engine types.

use std::fmt;
use std::path::Path;

use opaque_core::decentralized::{AdversaryEnsemble, CommGraph};
use opaque_core::linalg::matrix_from_row_major;
use opaque_core::nonlinear::{GridSpec, NlSystem};
use opaque_core::{ConvexSet, LtiSystem, Matrix, Point, Scenario, Tolerances, VPolytope, Zonotope};
use serde::{Deserialize, Serialize};

use crate::expr::parse_expr;

/// A row-major matrix with explicit dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixSpec {
    pub fn from_matrix(m: &Matrix) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                data.push(m[(r, c)]);
            }
        }
        MatrixSpec {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SetSpec {
    Vertices(Vec<Vec<f64>>),
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Zonotope { center: Vec<f64>, generators: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(rename = "A")]
    pub a: MatrixSpec,
    #[serde(rename = "B")]
    pub b: MatrixSpec,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<MatrixSpec>,
    #[serde(rename = "C_list", default, skip_serializing_if = "Option::is_none")]
    pub c_list: Option<Vec<MatrixSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetsSpec {
    pub secret: SetSpec,
    pub nonsecret: SetSpec,
    pub inputs: SetSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleSpec {
    Union,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversariesSpec {
    #[serde(rename = "C_list", default, skip_serializing_if = "Option::is_none")]
    pub c_list: Option<Vec<MatrixSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFileSpec {
    pub per_axis: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearSpec {
    pub f: Vec<String>,
    pub h: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridFileSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geom_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lp_eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gjk_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    pub sets: SetsSpec,
    pub schedule: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversaries: Option<AdversariesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinear: Option<NonlinearSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

/// A load failure located by field path and, when found, source line.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadError {
    pub path: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "<root>" } else { &self.path };
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "{path} (line {l}, column {c}): {}", self.message),
            (Some(l), None) => write!(f, "{path} (line {l}): {}", self.message),
            _ => write!(f, "{path}: {}", self.message),
        }
    }
}

impl std::error::Error for LoadError {}

/// Everything a command needs, converted and cross-checked.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub file: ScenarioFile,
    pub tol: Tolerances,
    /// Present whenever the file has a `system` section.
    pub scenario: Option<Scenario>,
    pub ensemble: Option<AdversaryEnsemble>,
    pub graph: Option<CommGraph>,
    pub nonlinear: Option<NlSystem>,
    pub grid: GridSpec,
    pub secret: VPolytope,
    pub nonsecret: VPolytope,
    pub inputs: ConvexSet,
}

pub fn load_path(path: &Path) -> Result<Loaded, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError {
        path: String::new(),
        line: None,
        column: None,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    load_str(&text)
}

pub fn load_str(text: &str) -> Result<Loaded, LoadError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        LoadError {
            path: e.path().to_string().trim_start_matches('.').to_string(),
            line: Some(inner.line()),
            column: Some(inner.column()),
            message: strip_position(&inner.to_string()),
        }
    })?;
    build(file).map_err(|(path, message)| {
        let pos = locate(text, &path);
        LoadError {
            path: render_path(&path),
            line: pos.map(|p| p.0),
            column: pos.map(|p| p.1),
            message,
        }
    })
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// One step of a field path.
#[derive(Debug, Clone, PartialEq)]
pub enum Seg {
    Key(&'static str),
    Index(usize),
}

type Path_ = Vec<Seg>;
type BuildError = (Path_, String);

fn render_path(path: &[Seg]) -> String {
    let mut s = String::new();
    for seg in path {
        match seg {
            Seg::Key(k) => {
                if !s.is_empty() {
                    s.push('.');
                }
                s.push_str(k);
            }
            Seg::Index(i) => s.push_str(&format!("[{i}]")),
        }
    }
    s
}

fn at(path: &[Seg], extra: &[Seg]) -> Path_ {
    path.iter().chain(extra).cloned().collect()
}

fn matrix(spec: &MatrixSpec, path: &[Seg]) -> Result<Matrix, BuildError> {
    if spec.rows == 0 || spec.cols == 0 {
        return Err((path.to_vec(), "matrix dimensions must be positive".into()));
    }
    if spec.data.len() != spec.rows * spec.cols {
        return Err((
            at(path, &[Seg::Key("data")]),
            format!(
                "expected {} entries for a {}x{} matrix, found {}",
                spec.rows * spec.cols,
                spec.rows,
                spec.cols,
                spec.data.len()
            ),
        ));
    }
    if spec.data.iter().any(|v| !v.is_finite()) {
        return Err((at(path, &[Seg::Key("data")]), "entries must be finite".into()));
    }
    matrix_from_row_major(spec.rows, spec.cols, &spec.data).map_err(|e| (path.to_vec(), e.to_string()))
}

fn check_point(v: &[f64], dim: usize, path: Path_) -> Result<Point, BuildError> {
    if v.len() != dim {
        return Err((path, format!("expected {dim} coordinates, found {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err((path, "coordinates must be finite".into()));
    }
    Ok(Point::from_column_slice(v))
}

fn convex_set(spec: &SetSpec, dim: usize, path: &[Seg], tol: &Tolerances) -> Result<ConvexSet, BuildError> {
    match spec {
        SetSpec::Vertices(vs) => {
            let p = at(path, &[Seg::Key("vertices")]);
            if vs.is_empty() {
                return Err((p, "vertex list must be nonempty".into()));
            }
            let pts = vs
                .iter()
                .enumerate()
                .map(|(i, v)| check_point(v, dim, at(&p, &[Seg::Index(i)])))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(ConvexSet::Poly(VPolytope::new(dim, pts).map_err(|e| (p, e.to_string()))?))
        }
        SetSpec::Box { lo, hi } => {
            let p = at(path, &[Seg::Key("box")]);
            let l = check_point(lo, dim, at(&p, &[Seg::Key("lo")]))?;
            let h = check_point(hi, dim, at(&p, &[Seg::Key("hi")]))?;
            if l.iter().zip(h.iter()).any(|(a, b)| a > b) {
                return Err((at(&p, &[Seg::Key("lo")]), "lower bound exceeds upper bound".into()));
            }
            let v = VPolytope::from_box(l.as_slice(), h.as_slice()).map_err(|e| (p, e.to_string()))?;
            Ok(ConvexSet::Poly(v))
        }
        SetSpec::Zonotope { center, generators } => {
            let p = at(path, &[Seg::Key("zonotope")]);
            let c = check_point(center, dim, at(&p, &[Seg::Key("center")]))?;
            let gp = at(&p, &[Seg::Key("generators")]);
            let gens = generators
                .iter()
                .enumerate()
                .map(|(i, g)| check_point(g, dim, at(&gp, &[Seg::Index(i)])))
                .collect::<Result<Vec<_>, _>>()?;
            let z = Zonotope::new(c, gens).map_err(|e| (p, e.to_string()))?;
            let _ = tol;
            Ok(ConvexSet::Zono(z))
        }
    }
}

fn vertex_set(spec: &SetSpec, dim: usize, path: &[Seg], tol: &Tolerances) -> Result<VPolytope, BuildError> {
    convex_set(spec, dim, path, tol)?
        .to_vpolytope(tol)
        .map_err(|e| (path.to_vec(), e.to_string()))
}

fn set_dim(spec: &SetSpec) -> usize {
    match spec {
        SetSpec::Vertices(vs) => vs.first().map_or(0, |v| v.len()),
        SetSpec::Box { lo, .. } => lo.len(),
        SetSpec::Zonotope { center, .. } => center.len(),
    }
}

fn build(file: ScenarioFile) -> Result<Loaded, BuildError> {
    let tol = match &file.tolerances {
        None => Tolerances::default(),
        Some(t) => {
            let d = Tolerances::default();
            Tolerances::new(
                t.geom_eps.unwrap_or(d.geom_eps),
                t.lp_eps.unwrap_or(d.lp_eps),
                t.gjk_eps.unwrap_or(d.gjk_eps),
            )
            .map_err(|e| (vec![Seg::Key("tolerances")], e.to_string()))?
        }
    };
    if file.schedule.is_empty() {
        return Err((vec![Seg::Key("schedule")], "schedule must list at least one time".into()));
    }
    if let Some(i) = file.schedule.iter().position(|&k| k == 0) {
        return Err((vec![Seg::Key("schedule"), Seg::Index(i)], "observation times start at 1".into()));
    }
    if let Some(eps) = file.epsilon {
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err((vec![Seg::Key("epsilon")], "epsilon must be finite and nonnegative".into()));
        }
    }
    if file.system.is_none() && file.nonlinear.is_none() {
        return Err((vec![Seg::Key("system")], "a system or a nonlinear section is required".into()));
    }

    let sets = vec![Seg::Key("sets")];
    let mut n = None;
    let mut m = None;
    let mut sys = None;
    let mut maps: Option<(Vec<Matrix>, Path_)> = None;
    if let Some(s) = &file.system {
        let sp = vec![Seg::Key("system")];
        let a = matrix(&s.a, &at(&sp, &[Seg::Key("A")]))?;
        if a.nrows() != a.ncols() {
            return Err((at(&sp, &[Seg::Key("A")]), format!("A must be square, found {}x{}", a.nrows(), a.ncols())));
        }
        let dim = a.nrows();
        let b = matrix(&s.b, &at(&sp, &[Seg::Key("B")]))?;
        if b.nrows() != dim {
            return Err((at(&sp, &[Seg::Key("B"), Seg::Key("rows")]), format!("B must have {dim} rows to match A, found {}", b.nrows())));
        }
        let mut list = Vec::new();
        if let Some(cl) = &s.c_list {
            let lp = at(&sp, &[Seg::Key("C_list")]);
            if cl.is_empty() {
                return Err((lp, "C_list must be nonempty".into()));
            }
            for (i, c) in cl.iter().enumerate() {
                let cp = at(&lp, &[Seg::Index(i)]);
                let cm = matrix(c, &cp)?;
                if cm.ncols() != dim {
                    return Err((at(&cp, &[Seg::Key("cols")]), format!("output map must have {dim} columns, found {}", cm.ncols())));
                }
                list.push(cm);
            }
            maps = Some((list.clone(), lp));
        }
        let c = match &s.c {
            Some(c) => {
                let cp = at(&sp, &[Seg::Key("C")]);
                let cm = matrix(c, &cp)?;
                if cm.ncols() != dim {
                    return Err((at(&cp, &[Seg::Key("cols")]), format!("C must have {dim} columns, found {}", cm.ncols())));
                }
                cm
            }
            None if !list.is_empty() => AdversaryEnsemble::new(list.clone(), dim)
                .map_err(|e| (at(&sp, &[Seg::Key("C_list")]), e.to_string()))?
                .stacked(),
            None => return Err((at(&sp, &[Seg::Key("C")]), "C or C_list is required".into())),
        };
        n = Some(dim);
        m = Some(b.ncols());
        sys = Some(LtiSystem::new(a, b, c).map_err(|e| (sp.clone(), e.to_string()))?);
    }

    let mut nonlinear = None;
    let mut grid = GridSpec::new(5);
    if let Some(nl) = &file.nonlinear {
        let np = vec![Seg::Key("nonlinear")];
        let nn = nl.f.len();
        if nn == 0 {
            return Err((at(&np, &[Seg::Key("f")]), "at least one state equation is required".into()));
        }
        if let Some(d) = n {
            if d != nn {
                return Err((at(&np, &[Seg::Key("f")]), format!("expected {d} state equations to match system.A, found {nn}")));
            }
        }
        let mm = m.unwrap_or_else(|| set_dim(&file.sets.inputs));
        let parse_all = |exprs: &[String], key: &'static str| {
            exprs
                .iter()
                .enumerate()
                .map(|(i, src)| {
                    parse_expr(src).map_err(|e| (at(&np, &[Seg::Key(key), Seg::Index(i)]), e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let f = parse_all(&nl.f, "f")?;
        let h = parse_all(&nl.h, "h")?;
        nonlinear = Some(NlSystem::new(nn, mm, f, h).map_err(|e| (np.clone(), e.to_string()))?);
        if let Some(g) = &nl.grid {
            if g.per_axis < 2 {
                return Err((at(&np, &[Seg::Key("grid"), Seg::Key("per_axis")]), "at least 2 points per axis".into()));
            }
            grid = GridSpec {
                per_axis: g.per_axis,
                cap: g.cap.unwrap_or(GridSpec::DEFAULT_CAP),
            };
        }
        n = Some(nn);
        m = Some(mm);
    }
    let n = n.expect("system or nonlinear present");
    let m = m.expect("system or nonlinear present");

    let secret = vertex_set(&file.sets.secret, n, &at(&sets, &[Seg::Key("secret")]), &tol)?;
    let nonsecret = vertex_set(&file.sets.nonsecret, n, &at(&sets, &[Seg::Key("nonsecret")]), &tol)?;
    let inputs = convex_set(&file.sets.inputs, m, &at(&sets, &[Seg::Key("inputs")]), &tol)?;

    let scenario = match sys {
        Some(sys) => Some(
            Scenario::new(sys, secret.clone(), nonsecret.clone(), inputs.clone(), file.schedule.clone(), tol)
                .map_err(|e| (Vec::new(), e.to_string()))?,
        ),
        None => None,
    };

    let mut ensemble = None;
    let mut graph = None;
    if let Some(adv) = &file.adversaries {
        let ap = vec![Seg::Key("adversaries")];
        if let Some(cl) = &adv.c_list {
            let lp = at(&ap, &[Seg::Key("C_list")]);
            let mut list = Vec::new();
            for (i, c) in cl.iter().enumerate() {
                let cp = at(&lp, &[Seg::Index(i)]);
                let cm = matrix(c, &cp)?;
                if cm.ncols() != n {
                    return Err((at(&cp, &[Seg::Key("cols")]), format!("output map must have {n} columns, found {}", cm.ncols())));
                }
                list.push(cm);
            }
            maps = Some((list, lp));
        }
        if let Some(g) = &adv.graph {
            let count = maps.as_ref().map_or(0, |m| m.0.len());
            let gp = at(&ap, &[Seg::Key("graph"), Seg::Key("edges")]);
            if let Some(i) = g.edges.iter().position(|&(a, b)| a >= count || b >= count) {
                return Err((at(&gp, &[Seg::Index(i)]), format!("edge endpoints must be adversary indices below {count}")));
            }
            graph = Some(CommGraph::new(count, &g.edges).map_err(|e| (gp, e.to_string()))?);
        }
    }
    if let Some((list, lp)) = maps {
        if list.is_empty() {
            return Err((lp, "at least one adversary map is required".into()));
        }
        ensemble = Some(AdversaryEnsemble::new(list, n).map_err(|e| (lp, e.to_string()))?);
    }

    Ok(Loaded {
        file,
        tol,
        scenario,
        ensemble,
        graph,
        nonlinear,
        grid,
        secret,
        nonsecret,
        inputs,
    })
}

/// Line and column (1-based) of the value at `path` in a JSON document.
pub fn locate(text: &str, path: &[Seg]) -> Option<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut pos = skip_ws(bytes, 0);
    for seg in path {
        pos = match seg {
            Seg::Key(k) => find_key(bytes, pos, k)?,
            Seg::Index(i) => find_index(bytes, pos, *i)?,
        };
    }
    let line = 1 + bytes[..pos].iter().filter(|&&b| b == b'\n').count();
    let col = 1 + pos - bytes[..pos].iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1);
    Some((line, col))
}

fn skip_ws(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

/// End of the string starting at `i` (which must be a quote).
fn skip_string(b: &[u8], mut i: usize) -> Option<usize> {
    i += 1;
    while i < b.len() {
        match b[i] {
            b'\\' => i += 2,
            b'"' => return Some(i + 1),
            _ => i += 1,
        }
    }
    None
}

fn skip_value(b: &[u8], i: usize) -> Option<usize> {
    let i = skip_ws(b, i);
    match *b.get(i)? {
        b'"' => skip_string(b, i),
        b'{' | b'[' => {
            let mut depth = 0usize;
            let mut j = i;
            while j < b.len() {
                match b[j] {
                    b'"' => {
                        j = skip_string(b, j)?;
                        continue;
                    }
                    b'{' | b'[' => depth += 1,
                    b'}' | b']' => {
                        depth -= 1;
                        if depth == 0 {
                            return Some(j + 1);
                        }
                    }
                    _ => {}
                }
                j += 1;
            }
            None
        }
        _ => {
            let mut j = i;
            while j < b.len() && !matches!(b[j], b',' | b'}' | b']') && !b[j].is_ascii_whitespace() {
                j += 1;
            }
            Some(j)
        }
    }
}

fn find_key(b: &[u8], i: usize, key: &str) -> Option<usize> {
    let mut j = skip_ws(b, i);
    if *b.get(j)? != b'{' {
        return None;
    }
    j += 1;
    loop {
        j = skip_ws(b, j);
        if *b.get(j)? == b'}' {
            return None;
        }
        let end = skip_string(b, j)?;
        let name = std::str::from_utf8(&b[j + 1..end - 1]).ok()?;
        j = skip_ws(b, end);
        if *b.get(j)? != b':' {
            return None;
        }
        let value = skip_ws(b, j + 1);
        if name == key {
            return Some(value);
        }
        j = skip_ws(b, skip_value(b, value)?);
        if *b.get(j)? == b',' {
            j += 1;
        }
    }
}

fn find_index(b: &[u8], i: usize, idx: usize) -> Option<usize> {
    let mut j = skip_ws(b, i);
    if *b.get(j)? != b'[' {
        return None;
    }
    j += 1;
    for k in 0.. {
        j = skip_ws(b, j);
        if *b.get(j)? == b']' {
            return None;
        }
        if k == idx {
            return Some(j);
        }
        j = skip_ws(b, skip_value(b, j)?);
        if *b.get(j)? == b',' {
            j += 1;
        }
    }
    None
}
