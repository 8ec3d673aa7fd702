//! Staggered drivers: the standard alternation (ST) and the fixed-stress
//! variants S1 (volumetric), S2 (deviatoric) and S3 (both).

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::assembly::{self, Assembler, GaussPointState};
use crate::constitutive::{degradation, psi_plus_from, MaterialParams};
use crate::error::{Error, Result};
use crate::linsolve::{LinearSolverKind, SparseSolver};
use crate::oned::BACKTRACK_AFTER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    ST,
    S1,
    S2,
    S3,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::ST, Scheme::S1, Scheme::S2, Scheme::S3];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ST => "ST",
            Scheme::S1 => "S1",
            Scheme::S2 => "S2",
            Scheme::S3 => "S3",
        }
    }

    fn volumetric(self) -> bool {
        matches!(self, Scheme::S1 | Scheme::S3)
    }

    fn deviatoric(self) -> bool {
        matches!(self, Scheme::S2 | Scheme::S3)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ST" => Ok(Scheme::ST),
            "S1" => Ok(Scheme::S1),
            "S2" => Ok(Scheme::S2),
            "S3" => Ok(Scheme::S3),
            _ => Err(Error::InvalidParameter(format!(
                "unknown scheme `{s}` (expected ST, S1, S2 or S3)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_nr: f64,
    pub tol_st: f64,
    pub max_nr: usize,
    pub max_stag: usize,
    pub d_cap: f64,
    /// Absolute residual norm treated as converged regardless of the reference.
    pub residual_floor: f64,
    pub linear: LinearSolverKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_nr: 1e-7,
            tol_st: 1e-6,
            max_nr: 50,
            max_stag: 2000,
            d_cap: 0.95,
            residual_floor: 1e-12,
            linear: LinearSolverKind::Direct,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_nr > 0.0 && self.tol_st > self.tol_nr) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < tol_nr < tol_st, got tol_nr = {}, tol_st = {}",
                self.tol_nr, self.tol_st
            )));
        }
        if !(self.d_cap > 0.0 && self.d_cap < 1.0) {
            return Err(Error::InvalidParameter(format!("d_cap = {} outside (0, 1)", self.d_cap)));
        }
        if self.max_nr == 0 || self.max_stag == 0 {
            return Err(Error::InvalidParameter("iteration limits must be positive".into()));
        }
        Ok(())
    }
}

/// Per-step counters and residuals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StaggeredStats {
    pub n_stag: usize,
    pub n_nr_u: usize,
    pub n_nr_d: usize,
    /// Relative evolution residual after each staggered iteration.
    pub residual_history: Vec<f64>,
    pub reaction: f64,
    /// Staggered iterations where the extra stiffness was dropped.
    pub fallbacks: usize,
    pub final_residual_u: f64,
    pub final_residual_d: f64,
    /// Unscaled norms behind the two relative residuals above.
    pub final_abs_u: f64,
    pub final_abs_d: f64,
    /// Seconds spent in momentum and evolution solves.
    pub time_u: f64,
    pub time_d: f64,
}

/// Softening gate: active energy above the threshold and the history maximum,
/// damage below the cap.
pub fn gate_open(gp: &GaussPointState, p: &MaterialParams, d_cap: f64) -> bool {
    gp.psi_plus > p.psi_crit() && gp.psi_plus > gp.psi_max && gp.d_gp < d_cap
}

fn extra_unchecked(scheme: Scheme, gp: &GaussPointState, p: &MaterialParams) -> f64 {
    let mut x = 0.0;
    if scheme.volumetric() {
        x += p.bulk_k * gp.tr_eps_plus * gp.tr_eps_plus;
    }
    if scheme.deviatoric() {
        x += 2.0 * p.mu * gp.dev_dot_dev;
    }
    if x == 0.0 {
        return 0.0;
    }
    let r = 1.0 - gp.d_gp;
    -4.0 * r * r / degradation(gp.d_gp, p.eta).0 * x
}

/// Multiplier of `N^T N` added to the evolution tangent.
pub fn extra_stiffness(scheme: Scheme, gp: &GaussPointState, p: &MaterialParams, d_cap: f64) -> f64 {
    if scheme == Scheme::ST || !gate_open(gp, p, d_cap) {
        return 0.0;
    }
    extra_unchecked(scheme, gp, p)
}

/// Half-step prediction of the strain scalars for a damage increment `delta_d`.
/// Non-positive increments leave the point untouched.
pub fn update_active_energy(
    scheme: Scheme,
    gp: &GaussPointState,
    delta_d: f64,
    p: &MaterialParams,
) -> GaussPointState {
    let mut out = *gp;
    if scheme == Scheme::ST || !(delta_d > 0.0) {
        return out;
    }
    let d = gp.d_gp;
    let a = (1.0 - d) / degradation(d, p.eta).0;
    if scheme.volumetric() {
        out.tr_eps_plus += 2.0 * a * gp.tr_eps_plus * delta_d;
    }
    if scheme.deviatoric() {
        out.dev_dot_dev *= 1.0 + 4.0 * (a * delta_d + a * a * delta_d * delta_d);
    }
    out.psi_plus = psi_plus_from(out.tr_eps_plus, out.dev_dot_dev, p);
    out
}

/// Prescribed value on a set of dofs of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletBc {
    pub nodes: Vec<usize>,
    pub component: usize,
    pub value: f64,
}

/// Mutable fields of a run.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub u: Vec<f64>,
    pub d: Vec<f64>,
    /// Damage of the last accepted step.
    pub d_prev: Vec<f64>,
    pub gauss: Vec<GaussPointState>,
}

/// Phase-field problem on a quad mesh driven by one staggered scheme.
#[derive(Debug)]
pub struct StaggeredSolver {
    pub asm: Assembler,
    pub params: MaterialParams,
    pub scheme: Scheme,
    pub config: SolverConfig,
    pub state: FieldState,
    u_fixed: Vec<bool>,
    d_fixed: Vec<bool>,
    u_solver: SparseSolver,
    d_solver: SparseSolver,
}

struct NrOutcome {
    solves: usize,
    relative: f64,
    absolute: f64,
}

impl StaggeredSolver {
    pub fn new(asm: Assembler, params: MaterialParams, scheme: Scheme, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let n = asm.n_nodes();
        let state = FieldState {
            u: vec![0.0; 2 * n],
            d: vec![0.0; n],
            d_prev: vec![0.0; n],
            gauss: asm.fresh_states(),
        };
        Ok(StaggeredSolver {
            params,
            scheme,
            config,
            state,
            u_fixed: vec![false; 2 * n],
            d_fixed: vec![false; n],
            u_solver: SparseSolver::new(config.linear),
            d_solver: SparseSolver::new(config.linear),
            asm,
        })
    }

    /// Constrains `component` of `nodes`; the value comes with each step.
    pub fn fix_displacement(&mut self, nodes: &[usize], component: usize) -> Result<()> {
        assembly::mark_fixed(&mut self.u_fixed, nodes, 2, component)
    }

    /// Pins damage on `nodes` to its current value.
    pub fn pin_damage(&mut self, nodes: &[usize]) -> Result<()> {
        assembly::mark_fixed(&mut self.d_fixed, nodes, 1, 0)
    }

    pub fn u_fixed(&self) -> &[bool] {
        &self.u_fixed
    }

    /// Relative-norm reference and floor combined into one convergence test.
    fn converged(&self, norm: f64, reference: f64, tol: f64) -> bool {
        norm <= tol * reference || norm <= self.config.residual_floor
    }

    fn reference(&self, norm: f64) -> f64 {
        norm.max(self.config.residual_floor)
    }

    /// Newton iterations on the momentum balance at fixed damage.
    fn solve_momentum(&mut self, reference: &mut Option<f64>) -> Result<NrOutcome> {
        let p = self.params;
        let mut solves = 0;
        let mut history = Vec::new();
        loop {
            let r = self.asm.momentum_residual(&self.state.u, &self.state.d, &p)?;
            let norm = assembly::free_norm(&r, &self.u_fixed);
            let refn = *reference.get_or_insert_with(|| self.reference(norm));
            history.push(norm / refn);
            if self.converged(norm, refn, self.config.tol_nr) {
                return Ok(NrOutcome {
                    solves,
                    relative: norm / refn,
                    absolute: norm,
                });
            }
            if solves == self.config.max_nr {
                return Err(Error::NewtonDiverged {
                    solve: "momentum",
                    iterations: solves,
                    history,
                });
            }
            let mut sys = self.asm.assemble_momentum(&self.state.u, &self.state.d, &p)?;
            let zero = vec![0.0; sys.residual.len()];
            assembly::apply_dirichlet(&mut sys, &self.u_fixed, &zero)?;
            let rhs: Vec<f64> = sys.residual.iter().map(|v| -v).collect();
            let du = self.u_solver.solve(&sys.stiffness, &rhs)?;
            for (u, du) in self.state.u.iter_mut().zip(du) {
                *u += du;
            }
            solves += 1;
        }
    }

    /// Newton iterations on the evolution equation at frozen Gauss-point energies.
    /// The first iteration carries the scheme's extra stiffness and triggers the
    /// half-step energy update.
    fn solve_evolution(&mut self, reference: f64, stats: &mut StaggeredStats) -> Result<NrOutcome> {
        let p = self.params;
        let d_cap = self.config.d_cap;
        let d_gp = self.asm.interpolate(&self.state.d);
        for (s, d) in self.state.gauss.iter_mut().zip(d_gp) {
            s.d_gp = d;
        }
        let gated: Vec<bool> = self
            .state
            .gauss
            .iter()
            .map(|g| self.scheme != Scheme::ST && gate_open(g, &p, d_cap))
            .collect();
        let extra: Option<Vec<f64>> = gated.iter().any(|&g| g).then(|| {
            self.state
                .gauss
                .iter()
                .zip(&gated)
                .map(|(g, &on)| if on { extra_unchecked(self.scheme, g, &p) } else { 0.0 })
                .collect()
        });

        let mut solves = 0;
        let mut history = Vec::new();
        loop {
            let first = solves == 0;
            let with_extra = if first { extra.as_deref() } else { None };
            let mut sys = self.asm.assemble_evolution(
                &self.state.d,
                &self.state.d_prev,
                &self.state.gauss,
                with_extra,
                &p,
            )?;
            let norm = assembly::free_norm(&sys.residual, &self.d_fixed);
            history.push(norm / reference);
            if self.converged(norm, reference, self.config.tol_nr) {
                return Ok(NrOutcome {
                    solves,
                    relative: norm / reference,
                    absolute: norm,
                });
            }
            if solves == self.config.max_nr {
                return Err(Error::NewtonDiverged {
                    solve: "evolution",
                    iterations: solves,
                    history,
                });
            }
            let zero = vec![0.0; sys.residual.len()];
            assembly::apply_dirichlet(&mut sys, &self.d_fixed, &zero)?;
            let rhs: Vec<f64> = sys.residual.iter().map(|v| -v).collect();
            let dd = match self.d_solver.solve(&sys.stiffness, &rhs) {
                Err(Error::NotPositiveDefinite { index }) if with_extra.is_some() => {
                    log::debug!(
                        "{}: evolution tangent with extra stiffness lost definiteness at dof {index}; dropping it for this iteration",
                        self.scheme
                    );
                    stats.fallbacks += 1;
                    let mut plain = self.asm.assemble_evolution(
                        &self.state.d,
                        &self.state.d_prev,
                        &self.state.gauss,
                        None,
                        &p,
                    )?;
                    assembly::apply_dirichlet(&mut plain, &self.d_fixed, &zero)?;
                    self.d_solver.solve(&plain.stiffness, &rhs)?
                }
                other => other?,
            };
            let mut dd = dd;
            for (d, dd) in self.state.d.iter_mut().zip(&dd) {
                *d += dd;
            }
            if solves >= BACKTRACK_AFTER {
                let mut alpha = 1.0;
                while alpha > 1.0 / 256.0 && self.evolution_norm()? >= norm {
                    alpha *= 0.5;
                    for (d, v) in self.state.d.iter_mut().zip(dd.iter_mut()) {
                        *d -= 0.5 * *v;
                        *v *= 0.5;
                    }
                }
            }
            solves += 1;
            if first && extra.is_some() {
                let dd_gp = self.asm.interpolate(&dd);
                for ((s, &on), delta) in self.state.gauss.iter_mut().zip(&gated).zip(dd_gp) {
                    if on {
                        *s = update_active_energy(self.scheme, s, delta, &p);
                    }
                }
            }
        }
    }

    fn evolution_norm(&self) -> Result<f64> {
        let r = self
            .asm
            .evolution_residual(&self.state.d, &self.state.d_prev, &self.state.gauss, &self.params)?;
        Ok(assembly::free_norm(&r, &self.d_fixed))
    }

    /// Advances one load step with the given prescribed displacements.
    pub fn staggered_step(&mut self, bcs: &[DirichletBc]) -> Result<StaggeredStats> {
        for bc in bcs {
            for &n in &bc.nodes {
                let dof = 2 * n + bc.component;
                if !self.u_fixed.get(dof).copied().unwrap_or(false) {
                    return Err(Error::InvalidParameter(format!(
                        "dof {dof} receives a value but is not constrained"
                    )));
                }
                self.state.u[dof] = bc.value;
            }
        }
        let p = self.params;
        let mut stats = StaggeredStats::default();

        let mut ref_u = None;
        let clock = Instant::now();
        let out = self.solve_momentum(&mut ref_u)?;
        stats.time_u += clock.elapsed().as_secs_f64();
        stats.n_nr_u += out.solves;
        stats.final_residual_u = out.relative;
        stats.final_abs_u = out.absolute;
        self.asm
            .update_states(&self.state.u, &self.state.d, &mut self.state.gauss, &p)?;
        let ref_d = self.reference(self.evolution_norm()?);

        loop {
            if stats.n_stag == self.config.max_stag {
                return Err(Error::StaggeredDiverged {
                    iterations: stats.n_stag,
                    last: stats.residual_history.last().copied().unwrap_or(f64::NAN),
                });
            }
            stats.n_stag += 1;
            let clock = Instant::now();
            let ev = self.solve_evolution(ref_d, &mut stats)?;
            stats.time_d += clock.elapsed().as_secs_f64();
            stats.n_nr_d += ev.solves;

            let clock = Instant::now();
            let out = self.solve_momentum(&mut ref_u)?;
            stats.time_u += clock.elapsed().as_secs_f64();
            stats.n_nr_u += out.solves;
            stats.final_residual_u = out.relative;
        stats.final_abs_u = out.absolute;
            self.asm
                .update_states(&self.state.u, &self.state.d, &mut self.state.gauss, &p)?;

            let norm = self.evolution_norm()?;
            let rel = norm / ref_d;
            stats.residual_history.push(rel);
            stats.final_residual_d = rel;
            stats.final_abs_d = norm;
            log::trace!("{} stag {} |R_d| {rel:e}", self.scheme, stats.n_stag);
            if self.converged(norm, ref_d, self.config.tol_st) {
                break;
            }
        }
        if stats.fallbacks > 0 {
            log::warn!(
                "{}: extra stiffness dropped in {} of {} staggered iterations (indefinite evolution tangent)",
                self.scheme,
                stats.fallbacks,
                stats.n_stag
            );
        }
        self.commit();
        Ok(stats)
    }

    /// Accepts the current state as the new history.
    fn commit(&mut self) {
        for (prev, d) in self.state.d_prev.iter_mut().zip(&self.state.d) {
            // the penalty leaves a small negative drift in intact regions; a
            // running maximum keeps it from accumulating over steps
            *prev = prev.max(*d);
        }
        let dp = self.asm.interpolate(&self.state.d_prev);
        for (g, dp) in self.state.gauss.iter_mut().zip(dp) {
            g.psi_max = g.psi_max.max(g.psi_plus);
            g.d_prev_step = dp;
        }
    }

    /// Internal force summed over `nodes` in `component`.
    pub fn reaction(&self, nodes: &[usize], component: usize) -> Result<f64> {
        let r = self
            .asm
            .momentum_residual(&self.state.u, &self.state.d, &self.params)?;
        Ok(assembly::reaction_force(&r, nodes, component))
    }
}
