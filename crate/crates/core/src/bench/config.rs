//! Run configuration read from TOML with sections `[problem]`, `[material]`,
//! `[mesh]`, `[loading]`, `[solver]` and `[output]`.

use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::Spanned;

use crate::constitutive::{AtModel, MaterialParams};
use crate::error::{Error, Result};
use crate::oned::BarParams;
use crate::schemes::{Scheme, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Tensile,
    Shear,
    Lshape,
    Bar1d,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Tensile => "tensile",
            ProblemKind::Shear => "shear",
            ProblemKind::Lshape => "lshape",
            ProblemKind::Bar1d => "bar1d",
        }
    }
}

/// Material of a run: a plane-strain solid or the 1D bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Physics {
    Solid(MaterialParams),
    Bar(BarParams),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshSpec {
    /// Unit square with a notch from the left edge to the centre.
    NotchedSquare { nx: usize, ny: usize, side: f64 },
    LShape { h: f64 },
    /// Bar of unit length; `imperfection` weakens the middle element's `Gc`.
    Bar { n: usize, imperfection: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub dt: f64,
    pub until: f64,
}

/// Constant-rate displacement history, stepped segment by segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub rate: f64,
    pub segments: Vec<Segment>,
}

impl Schedule {
    pub fn validate(&self) -> Result<(), String> {
        if !self.rate.is_finite() {
            return Err(format!("loading rate {} is not finite", self.rate));
        }
        if self.segments.is_empty() {
            return Err("schedule has no segments".into());
        }
        let mut t = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.until > t) {
                return Err(format!(
                    "segment {} ends at t = {} which does not exceed the previous end {t}",
                    i + 1,
                    s.until
                ));
            }
            if !(s.dt > 0.0) || s.dt > s.until - t + 1e-12 * s.until {
                return Err(format!("segment {} has step {} outside (0, {}]", i + 1, s.dt, s.until - t));
            }
            t = s.until;
        }
        Ok(())
    }

    /// Times at the end of every load step. Each time is computed from the
    /// segment start so long segments do not accumulate round-off.
    pub fn times(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut start = 0.0;
        for s in &self.segments {
            let n = ((s.until - start) / s.dt - 1e-9).ceil().max(1.0) as usize;
            for k in 1..n {
                out.push(start + k as f64 * s.dt);
            }
            out.push(s.until);
            start = s.until;
        }
        out
    }

    pub fn displacement(&self, t: f64) -> f64 {
        self.rate * t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write a VTK snapshot every this many steps, plus the last one. Zero disables.
    pub vtk_every: usize,
    /// bar1d only: dump the damage profile after every staggered iteration of
    /// the most expensive step.
    pub profiles: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub scheme: Scheme,
    pub physics: Physics,
    pub mesh: MeshSpec,
    pub loading: Schedule,
    pub solver: SolverConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    problem: Spanned<RawProblem>,
    #[serde(default)]
    material: Option<Spanned<RawMaterial>>,
    #[serde(default)]
    mesh: Option<Spanned<RawMesh>>,
    #[serde(default)]
    loading: Option<Spanned<RawLoading>>,
    #[serde(default)]
    solver: Option<Spanned<SolverConfig>>,
    #[serde(default)]
    output: Option<Spanned<RawOutput>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: ProblemKind,
    #[serde(default)]
    scheme: Option<Scheme>,
    #[serde(default)]
    at_model: Option<AtModel>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    mu: Option<f64>,
    lambda: Option<f64>,
    young: Option<f64>,
    g_c: Option<f64>,
    length_l: Option<f64>,
    eta: Option<f64>,
    tol_ir: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    nx: Option<usize>,
    ny: Option<usize>,
    h: Option<f64>,
    n: Option<usize>,
    imperfection: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoading {
    rate: Option<f64>,
    steps: Option<Vec<Segment>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    vtk_every: Option<usize>,
    profiles: Option<bool>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

struct Here<'a> {
    text: &'a str,
    span: Range<usize>,
}

impl Here<'_> {
    fn err(&self, m: impl Into<String>) -> Error {
        Error::Config {
            line: line_of(self.text, self.span.start),
            message: m.into(),
        }
    }
}

/// Default schedule per problem. The L-panel rate is 1 mm/s: at the nominal
/// 1e-3 mm/s the panel would see at most 6e-4 mm and never crack.
pub fn default_schedule(kind: ProblemKind) -> Schedule {
    let seg = |dt, until| Segment { dt, until };
    match kind {
        ProblemKind::Tensile => Schedule {
            rate: 3e-5,
            segments: vec![seg(170.0, 170.0), seg(1.0, 220.0)],
        },
        ProblemKind::Shear => Schedule {
            rate: 3e-5,
            segments: vec![seg(250.0, 250.0), seg(1.0, 380.0)],
        },
        ProblemKind::Lshape => Schedule {
            rate: 1.0,
            segments: vec![seg(0.01, 0.2), seg(0.001, 0.6)],
        },
        ProblemKind::Bar1d => Schedule {
            rate: 0.01,
            segments: vec![seg(1.0, 220.0)],
        },
    }
}

pub const DEFAULT_SQUARE_CELLS: usize = 100;
pub const DEFAULT_LSHAPE_H: f64 = 250.0 / 32.0;
pub const DEFAULT_BAR_CELLS: usize = 100;
/// Relative `Gc` weakening of the middle bar element. A perfectly uniform bar
/// only localizes once round-off has grown, which takes a few extra steps.
pub const DEFAULT_BAR_IMPERFECTION: f64 = 1e-6;

/// Parses and validates a configuration held in memory.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;

    let problem_span = raw.problem.span();
    let problem = raw.problem.into_inner();
    let kind = problem.kind;
    let scheme = problem.scheme.unwrap_or(Scheme::ST);
    let at_model = problem.at_model.unwrap_or_default();

    let (mesh_span, mesh) = split(raw.mesh, problem_span.clone());
    let mesh_here = Here { text, span: mesh_span };
    let mesh = match kind {
        ProblemKind::Tensile | ProblemKind::Shear => {
            if mesh.h.is_some() || mesh.n.is_some() || mesh.imperfection.is_some() {
                return Err(mesh_here.err("notched-square meshes take only `nx` and `ny`"));
            }
            MeshSpec::NotchedSquare {
                nx: mesh.nx.unwrap_or(DEFAULT_SQUARE_CELLS),
                ny: mesh.ny.or(mesh.nx).unwrap_or(DEFAULT_SQUARE_CELLS),
                side: 1.0,
            }
        }
        ProblemKind::Lshape => {
            if mesh.nx.is_some() || mesh.ny.is_some() || mesh.n.is_some() || mesh.imperfection.is_some() {
                return Err(mesh_here.err("L-panel meshes take only `h`"));
            }
            MeshSpec::LShape {
                h: mesh.h.unwrap_or(DEFAULT_LSHAPE_H),
            }
        }
        ProblemKind::Bar1d => {
            if mesh.nx.is_some() || mesh.ny.is_some() || mesh.h.is_some() {
                return Err(mesh_here.err("bar meshes take only `n` and `imperfection`"));
            }
            let imperfection = mesh.imperfection.unwrap_or(DEFAULT_BAR_IMPERFECTION);
            if !(0.0..1.0).contains(&imperfection) {
                return Err(mesh_here.err(format!("imperfection {imperfection} outside [0, 1)")));
            }
            MeshSpec::Bar {
                n: mesh.n.unwrap_or(DEFAULT_BAR_CELLS),
                imperfection,
            }
        }
    };
    if let MeshSpec::NotchedSquare { nx, ny, .. } = mesh {
        if nx % 2 != 0 || ny % 2 != 0 || nx == 0 || ny == 0 {
            return Err(mesh_here.err(format!("nx = {nx}, ny = {ny} must be even and positive")));
        }
    }

    let (mat_span, m) = split(raw.material, problem_span.clone());
    let mat_here = Here { text, span: mat_span };
    let tol_ir = m.tol_ir.unwrap_or(MaterialParams::DEFAULT_TOL_IR);
    let physics = match kind {
        ProblemKind::Bar1d => {
            if m.mu.is_some() || m.lambda.is_some() {
                return Err(mat_here.err("the bar takes `young`, not `mu`/`lambda`"));
            }
            if at_model != AtModel::AT1 {
                return Err(mat_here.err("the bar supports AT1 only"));
            }
            let r = BarParams::reference();
            Physics::Bar(
                BarParams::new(
                    m.young.unwrap_or(r.young),
                    m.g_c.unwrap_or(r.g_c),
                    m.length_l.unwrap_or(r.length_l),
                    m.eta.unwrap_or(r.eta),
                    tol_ir,
                )
                .map_err(|e| mat_here.err(e.to_string()))?,
            )
        }
        _ => {
            if m.young.is_some() {
                return Err(mat_here.err("`young` applies to the bar only; give `mu` and `lambda`"));
            }
            let base = if kind == ProblemKind::Lshape {
                MaterialParams::lshape_defaults()
            } else {
                MaterialParams::notched_square_defaults()
            };
            // resolve the process zone with at least two cells unless l is given
            let h = match mesh {
                MeshSpec::NotchedSquare { nx, ny, side } => side / nx.min(ny) as f64,
                _ => 0.0,
            };
            let l = m.length_l.unwrap_or(base.length_l.max(2.0 * h));
            Physics::Solid(
                MaterialParams::with_tol_ir(
                    m.mu.unwrap_or(base.mu),
                    m.lambda.unwrap_or(base.lambda),
                    m.g_c.unwrap_or(base.g_c),
                    l,
                    m.eta.unwrap_or(base.eta),
                    at_model,
                    tol_ir,
                )
                .map_err(|e| mat_here.err(e.to_string()))?,
            )
        }
    };

    let (load_span, l) = split(raw.loading, problem_span.clone());
    let def = default_schedule(kind);
    let loading = Schedule {
        rate: l.rate.unwrap_or(def.rate),
        segments: l.steps.unwrap_or(def.segments),
    };
    loading
        .validate()
        .map_err(|m| Here { text, span: load_span }.err(m))?;

    let (solver_span, solver) = match raw.solver {
        Some(s) => (s.span(), s.into_inner()),
        None => (problem_span.clone(), SolverConfig::default()),
    };
    solver
        .validate()
        .map_err(|e| Here { text, span: solver_span }.err(e.to_string()))?;

    let (_, o) = split(raw.output, problem_span);
    let output = OutputConfig {
        dir: o.dir.unwrap_or_else(|| PathBuf::from("out")),
        vtk_every: o.vtk_every.unwrap_or(0),
        profiles: o.profiles.unwrap_or(false),
    };

    Ok(RunConfig {
        problem: kind,
        scheme,
        physics,
        mesh,
        loading,
        solver,
        output,
    })
}

fn split<T: Default>(s: Option<Spanned<T>>, fallback: Range<usize>) -> (Range<usize>, T) {
    match s {
        Some(s) => (s.span(), s.into_inner()),
        None => (fallback, T::default()),
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}
