//! Time loop of a benchmark: boundary conditions per problem, step records,
//! CSV and VTK output.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use super::config::{MeshSpec, Physics, ProblemKind, RunConfig};
use super::report::{self, RunReport, StepRow, Summary};
use crate::assembly::Assembler;
use crate::error::{Error, Result};
use crate::mesh::{self, Mesh};
use crate::oned::Bar1D;
use crate::schemes::{DirichletBc, Scheme, StaggeredSolver, StaggeredStats};
use crate::vtk;

enum Driver {
    Plane {
        solver: Box<StaggeredSolver>,
        fixed: Vec<(Vec<usize>, usize)>,
        loaded: (Vec<usize>, usize),
    },
    Bar {
        bar: Box<Bar1D>,
        mesh: Mesh,
    },
}

/// A benchmark advanced one load step at a time.
pub struct Benchmark {
    pub config: RunConfig,
    driver: Driver,
    times: Vec<f64>,
    next: usize,
    pub report: RunReport,
    /// bar1d: damage after each staggered iteration of the hardest step so far.
    pub worst_profiles: Vec<Vec<f64>>,
}

fn plane_problem(cfg: &RunConfig) -> Result<Driver> {
    let Physics::Solid(params) = cfg.physics else {
        return Err(Error::InvalidParameter("plane problems need solid parameters".into()));
    };
    let mesh = match cfg.mesh {
        MeshSpec::NotchedSquare { nx, ny, side } => mesh::build_notched_square(nx, ny, side, true)?,
        MeshSpec::LShape { h } => mesh::build_lshape_mesh(h)?,
        MeshSpec::Bar { .. } => return Err(Error::InvalidParameter("bar mesh for a plane problem".into())),
    };
    let set = |tag: &str| mesh.select_boundary(tag).map(<[usize]>::to_vec);
    let (fixed, loaded, pinned) = match cfg.problem {
        ProblemKind::Tensile => {
            let (b, t) = (set("bottom")?, set("top")?);
            (vec![(b.clone(), 0), (b, 1), (t.clone(), 0)], (t, 1), Vec::new())
        }
        ProblemKind::Shear => {
            let (b, t) = (set("bottom")?, set("top")?);
            (vec![(b.clone(), 0), (b, 1), (t.clone(), 1)], (t, 0), Vec::new())
        }
        ProblemKind::Lshape => {
            let (b, z) = (set("bottom_clamp")?, set("load_zone")?);
            (vec![(b.clone(), 0), (b, 1)], (z.clone(), 1), z)
        }
        ProblemKind::Bar1d => unreachable!("handled by the bar driver"),
    };
    let asm = Assembler::new(mesh)?;
    let mut solver = StaggeredSolver::new(asm, params, cfg.scheme, cfg.solver)?;
    for (nodes, c) in fixed.iter().chain(std::iter::once(&loaded)) {
        solver.fix_displacement(nodes, *c)?;
    }
    solver.pin_damage(&pinned)?;
    Ok(Driver::Plane {
        solver: Box::new(solver),
        fixed,
        loaded,
    })
}

impl Benchmark {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let driver = match (config.problem, config.physics, config.mesh) {
            (ProblemKind::Bar1d, Physics::Bar(p), MeshSpec::Bar { n, imperfection }) => {
                let mut bar = Bar1D::new(n, 1.0, p, config.solver)?.with_imperfection(imperfection);
                bar.record_profiles = config.output.profiles;
                Driver::Bar {
                    bar: Box::new(bar),
                    mesh: mesh::build_line_mesh(n, 1.0)?,
                }
            }
            (ProblemKind::Bar1d, ..) => {
                return Err(Error::InvalidParameter("bar1d needs bar parameters and a bar mesh".into()))
            }
            _ => plane_problem(config)?,
        };
        Ok(Benchmark {
            times: config.loading.times(),
            config: config.clone(),
            driver,
            next: 0,
            report: RunReport::new(config.scheme),
            worst_profiles: Vec::new(),
        })
    }

    pub fn mesh(&self) -> &Mesh {
        match &self.driver {
            Driver::Plane { solver, .. } => &solver.asm.mesh,
            Driver::Bar { mesh, .. } => mesh,
        }
    }

    pub fn damage(&self) -> &[f64] {
        match &self.driver {
            Driver::Plane { solver, .. } => &solver.state.d,
            Driver::Bar { bar, .. } => &bar.state.d,
        }
    }

    /// Nodal displacements with two components per node.
    pub fn displacement(&self) -> Vec<f64> {
        match &self.driver {
            Driver::Plane { solver, .. } => solver.state.u.clone(),
            Driver::Bar { bar, .. } => bar.state.u.iter().flat_map(|&u| [u, 0.0]).collect(),
        }
    }

    /// The plane solver, if this is a 2D problem.
    pub fn solver(&self) -> Option<&StaggeredSolver> {
        match &self.driver {
            Driver::Plane { solver, .. } => Some(solver),
            Driver::Bar { .. } => None,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn steps_done(&self) -> usize {
        self.next
    }

    pub fn finished(&self) -> bool {
        self.next == self.times.len()
    }

    fn step_inner(&mut self, ub: f64) -> Result<(StaggeredStats, f64)> {
        let scheme = self.config.scheme;
        match &mut self.driver {
            Driver::Plane { solver, fixed, loaded } => {
                let mut bcs: Vec<DirichletBc> = fixed
                    .iter()
                    .map(|(nodes, c)| DirichletBc {
                        nodes: nodes.clone(),
                        component: *c,
                        value: 0.0,
                    })
                    .collect();
                bcs.push(DirichletBc {
                    nodes: loaded.0.clone(),
                    component: loaded.1,
                    value: ub,
                });
                let stats = solver.staggered_step(&bcs)?;
                let reaction = solver.reaction(&loaded.0, loaded.1)?;
                Ok((stats, reaction))
            }
            Driver::Bar { bar, .. } => {
                let stats = bar.evolve_1d(ub, scheme)?;
                let reaction = stats.reaction;
                if bar.record_profiles && stats.n_stag > self.worst_profiles.len() {
                    self.worst_profiles = bar.profiles.clone();
                }
                Ok((stats, reaction))
            }
        }
    }

    /// Runs the next load step. Returns `None` once the schedule is exhausted.
    pub fn advance(&mut self) -> Result<Option<&StepRow>> {
        let Some(&time) = self.times.get(self.next) else {
            return Ok(None);
        };
        let ub = self.config.loading.displacement(time);
        let before = self.damage().to_vec();
        let clock = Instant::now();
        let (stats, reaction) = self.step_inner(ub).map_err(|e| Error::Step {
            step: self.next + 1,
            time,
            source: Box::new(e),
        })?;
        let wall = clock.elapsed().as_secs_f64();
        let min_increment = self
            .damage()
            .iter()
            .zip(&before)
            .map(|(d, b)| d - b)
            .fold(f64::INFINITY, f64::min);
        self.next += 1;
        log::info!(
            "{} {} step {} t = {time} u = {ub:e} F = {reaction:e} n_stag = {}",
            self.config.problem.name(),
            self.config.scheme,
            self.next,
            stats.n_stag
        );
        self.report.rows.push(StepRow {
            time,
            u: ub,
            reaction,
            n_stag: stats.n_stag,
            n_nr_u: stats.n_nr_u,
            n_nr_d: stats.n_nr_d,
            wall,
            wall_u: stats.time_u,
            wall_d: stats.time_d,
            min_increment,
            final_residual_u: stats.final_residual_u,
            final_residual_d: stats.final_residual_d,
            final_abs_u: stats.final_abs_u,
            final_abs_d: stats.final_abs_d,
            fallbacks: stats.fallbacks,
        });
        Ok(self.report.rows.last())
    }

    fn stem(&self) -> String {
        format!("{}_{}", self.config.problem.name(), self.config.scheme)
    }

    pub fn csv_path(&self) -> PathBuf {
        self.config.output.dir.join(format!("{}.csv", self.stem()))
    }

    pub fn write_snapshot(&self, path: &Path) -> Result<()> {
        vtk::write_vtk_snapshot(self.mesh(), &self.displacement(), self.damage(), path)
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs the whole schedule and writes `<dir>/<problem>_<scheme>.csv`, VTK
/// snapshots at the configured cadence and, for the bar, the damage profiles.
pub fn run_benchmark(config: &RunConfig) -> Result<RunReport> {
    let dir = &config.output.dir;
    ensure_dir(dir)?;
    let mut bench = Benchmark::new(config)?;
    let every = config.output.vtk_every;
    let n = bench.times().len();
    while bench.advance()?.is_some() {
        let k = bench.steps_done();
        if every > 0 && (k % every == 0 || k == n) {
            bench.write_snapshot(&dir.join(format!("{}_{k:04}.vtk", bench.stem())))?;
        }
    }
    report::write_csv(&bench.report, &bench.csv_path())?;
    if config.output.profiles && !bench.worst_profiles.is_empty() {
        let path = dir.join(format!("{}_profiles.csv", bench.stem()));
        report::write_profiles(&bench.worst_profiles, 1.0, &path)?;
    }
    Ok(bench.report)
}

/// Runs all four schemes on one configuration and writes
/// `<dir>/<problem>_sweep.csv`.
pub fn sweep(config: &RunConfig) -> Result<Vec<Summary>> {
    let reports: Vec<RunReport> = Scheme::ALL
        .par_iter()
        .map(|&scheme| {
            let mut c = config.clone();
            c.scheme = scheme;
            run_benchmark(&c)
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Summary> = reports.iter().map(RunReport::summary).collect();
    let path = config.output.dir.join(format!("{}_sweep.csv", config.problem.name()));
    report::write_sweep(&rows, &path)?;
    Ok(rows)
}
