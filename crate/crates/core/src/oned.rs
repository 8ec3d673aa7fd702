//! Self-contained 1D bar under end displacement, solved with the same staggered
//! logic as the 2D driver. Small enough to run thousands of steps per second.
//!
//! The coupling energy is `psi = E eps^2`, so the evolution reads
//! `-(1-d) psi + Gc/(c_w l) (w'(d) - 2 l^2 d'') = 0` for AT1.

use crate::constitutive::degradation;
use crate::error::{Error, Result};
use crate::schemes::{Scheme, SolverConfig, StaggeredStats};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarParams {
    pub young: f64,
    pub g_c: f64,
    pub length_l: f64,
    pub eta: f64,
    pub c_w: f64,
    pub gamma: f64,
}

impl BarParams {
    /// AT1 bar with penalty tolerance `tol_ir`.
    pub fn new(young: f64, g_c: f64, length_l: f64, eta: f64, tol_ir: f64) -> Result<Self> {
        if !(young > 0.0 && g_c > 0.0 && length_l > 0.0 && eta >= 0.0 && tol_ir > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bar parameters E = {young}, Gc = {g_c}, l = {length_l}, eta = {eta}, tol_ir = {tol_ir}"
            )));
        }
        Ok(BarParams {
            young,
            g_c,
            length_l,
            eta,
            c_w: 8.0 / 3.0,
            gamma: 27.0 * g_c / (64.0 * length_l * tol_ir * tol_ir),
        })
    }

    /// `E = 1, Gc = 0.1, l = 0.01`.
    pub fn reference() -> Self {
        Self::new(1.0, 0.1, 0.01, 1e-6, 0.01).expect("valid")
    }

    pub fn psi_crit(&self) -> f64 {
        self.g_c / (self.c_w * self.length_l)
    }
}

/// Damage of a homogeneous AT1 bar at strain `eps`.
pub fn homogeneous_oracle(eps: f64, p: &BarParams) -> f64 {
    (1.0 - p.g_c / (p.c_w * p.length_l * p.young * eps * eps)).max(0.0)
}

/// Strain after the fixed-stress half step, `eps + 2 (1-d)/g eps dd` for `dd > 0`.
pub fn half_step_strain(eps: f64, d: f64, dd: f64, eta: f64) -> f64 {
    if dd > 0.0 {
        eps + 2.0 * (1.0 - d) / degradation(d, eta).0 * eps * dd
    } else {
        eps
    }
}

/// Newton steps taken at full length before backtracking is allowed. The
/// penalty makes the evolution residual piecewise linear, where plain Newton
/// can cycle between active sets.
pub(crate) const BACKTRACK_AFTER: usize = 2;

const G: f64 = 0.577_350_269_189_625_8;
/// Two-point Gauss rule on [0, 1]: positions and weights.
const GAUSS: [(f64, f64); 2] = [(0.5 - 0.5 * G, 0.5), (0.5 + 0.5 * G, 0.5)];

#[derive(Debug, Clone)]
pub struct Bar1DState {
    pub u: Vec<f64>,
    pub d: Vec<f64>,
    pub d_prev: Vec<f64>,
    pub eps: Vec<f64>,
    /// `E eps^2` per element, possibly a half-step prediction.
    pub psi: Vec<f64>,
    pub psi_max: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Bar1D {
    pub n: usize,
    pub length: f64,
    pub params: BarParams,
    pub config: SolverConfig,
    /// Per-element multiplier on Gc; a value below one seeds localization.
    pub gc_scale: Vec<f64>,
    pub state: Bar1DState,
    /// Damage profile after each staggered iteration of the last step.
    pub profiles: Vec<Vec<f64>>,
    pub record_profiles: bool,
}

/// Solves a symmetric tridiagonal system in place (Thomas algorithm).
/// `lower[i]` couples rows `i` and `i + 1`.
pub fn solve_tridiagonal(diag: &[f64], lower: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() + 1 != n || rhs.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut b = diag[0];
    if b == 0.0 {
        return Err(Error::SingularMatrix { index: 0 });
    }
    x[0] = rhs[0] / b;
    for i in 1..n {
        c[i] = lower[i - 1] / b;
        b = diag[i] - lower[i - 1] * c[i];
        if b == 0.0 {
            return Err(Error::SingularMatrix { index: i });
        }
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / b;
    }
    for i in (0..n - 1).rev() {
        let t = c[i + 1] * x[i + 1];
        x[i] -= t;
    }
    Ok(x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl Bar1D {
    pub fn new(n: usize, length: f64, params: BarParams, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        if n < 2 || !(length > 0.0) {
            return Err(Error::InvalidMesh(format!(
                "bar needs at least 2 elements and positive length, got {n} and {length}"
            )));
        }
        Ok(Bar1D {
            n,
            length,
            params,
            config,
            gc_scale: vec![1.0; n],
            state: Bar1DState {
                u: vec![0.0; n + 1],
                d: vec![0.0; n + 1],
                d_prev: vec![0.0; n + 1],
                eps: vec![0.0; n],
                psi: vec![0.0; n],
                psi_max: vec![0.0; n],
            },
            profiles: Vec::new(),
            record_profiles: false,
        })
    }

    /// Weakens the element at mid-length by the relative amount `delta`.
    pub fn with_imperfection(mut self, delta: f64) -> Self {
        let mid = self.n / 2;
        self.gc_scale[mid] = 1.0 - delta;
        self
    }

    fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    fn update_strains(&mut self) {
        let h = self.h();
        let s = &mut self.state;
        for e in 0..self.n {
            s.eps[e] = (s.u[e + 1] - s.u[e]) / h;
            s.psi[e] = self.params.young * s.eps[e] * s.eps[e];
        }
    }

    /// Tridiagonal momentum system for fixed damage: element stiffness `E <g> / h`.
    fn momentum_residual(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.h();
        let s = &self.state;
        let mut r = vec![0.0; self.n + 1];
        let mut k = vec![0.0; self.n];
        for e in 0..self.n {
            let gbar: f64 = GAUSS
                .iter()
                .map(|&(x, w)| {
                    let d = s.d[e] * (1.0 - x) + s.d[e + 1] * x;
                    w * degradation(d, self.params.eta).0
                })
                .sum();
            k[e] = self.params.young * gbar / h;
            let f = k[e] * (s.u[e + 1] - s.u[e]);
            r[e] -= f;
            r[e + 1] += f;
        }
        (r, k)
    }

    fn solve_momentum(&mut self, reference: &mut Option<f64>) -> Result<(usize, f64, f64)> {
        let n = self.n;
        let mut solves = 0;
        let mut history = Vec::new();
        loop {
            let (r, k) = self.momentum_residual();
            let nr = norm(&r[1..n]);
            let refn = *reference.get_or_insert(nr.max(self.config.residual_floor));
            history.push(nr / refn);
            if nr <= self.config.tol_nr * refn || nr <= self.config.residual_floor {
                return Ok((solves, nr / refn, nr));
            }
            if solves == self.config.max_nr {
                return Err(Error::NewtonDiverged {
                    solve: "momentum",
                    iterations: solves,
                    history,
                });
            }
            // interior unknowns 1..n-1
            let diag: Vec<f64> = (1..n).map(|i| k[i - 1] + k[i]).collect();
            let lower: Vec<f64> = (1..n - 1).map(|i| -k[i]).collect();
            let rhs: Vec<f64> = r[1..n].iter().map(|v| -v).collect();
            let du = solve_tridiagonal(&diag, &lower, &rhs)?;
            for (i, v) in du.into_iter().enumerate() {
                self.state.u[i + 1] += v;
            }
            solves += 1;
        }
    }

    /// Residual and tridiagonal tangent of the evolution equation.
    fn evolution_system(&self, extra: Option<&[f64]>) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let h = self.h();
        let p = &self.params;
        let s = &self.state;
        let m = self.n + 1;
        let (mut r, mut diag, mut lower) = (vec![0.0; m], vec![0.0; m], vec![0.0; self.n]);
        for e in 0..self.n {
            let gc = p.g_c * self.gc_scale[e];
            let psi_c = gc / (p.c_w * p.length_l);
            let grad = 2.0 * gc * p.length_l / p.c_w;
            let slope = (s.d[e + 1] - s.d[e]) / h;
            let psi = s.psi[e];
            let mut ke = [[grad / h, -grad / h], [-grad / h, grad / h]];
            let mut re = [-grad * slope, grad * slope];
            for &(x, w) in &GAUSS {
                let n = [1.0 - x, x];
                let d = s.d[e] * n[0] + s.d[e + 1] * n[1];
                let dp = s.d_prev[e] * n[0] + s.d_prev[e + 1] * n[1];
                let local = -(1.0 - d) * psi + psi_c;
                let on = d < dp || (d == dp && local > 0.0);
                let src = local + if d < dp { p.gamma * (d - dp) } else { 0.0 };
                let mut mass = psi + if on { p.gamma } else { 0.0 };
                if let Some(x) = extra {
                    mass += x[e];
                }
                for a in 0..2 {
                    re[a] += w * h * n[a] * src;
                    for b in 0..2 {
                        ke[a][b] += w * h * n[a] * n[b] * mass;
                    }
                }
            }
            r[e] += re[0];
            r[e + 1] += re[1];
            diag[e] += ke[0][0];
            diag[e + 1] += ke[1][1];
            lower[e] += ke[0][1];
        }
        (r, diag, lower)
    }

    fn gate_open(&self, e: usize) -> bool {
        let s = &self.state;
        let psi_c = self.params.g_c * self.gc_scale[e] / (self.params.c_w * self.params.length_l);
        let d_mid = 0.5 * (s.d[e] + s.d[e + 1]);
        s.psi[e] > psi_c && s.psi[e] > s.psi_max[e] && d_mid < self.config.d_cap
    }

    fn solve_evolution(&mut self, scheme: Scheme, reference: f64) -> Result<(usize, f64)> {
        let eta = self.params.eta;
        let gated: Vec<bool> = (0..self.n)
            .map(|e| scheme != Scheme::ST && self.gate_open(e))
            .collect();
        let extra: Option<Vec<f64>> = gated.iter().any(|&g| g).then(|| {
            (0..self.n)
                .map(|e| {
                    if !gated[e] {
                        return 0.0;
                    }
                    let d = 0.5 * (self.state.d[e] + self.state.d[e + 1]);
                    let r = 1.0 - d;
                    -4.0 * r * r / degradation(d, eta).0 * self.state.psi[e]
                })
                .collect()
        });
        let mut solves = 0;
        let mut history = Vec::new();
        loop {
            let first = solves == 0;
            let (r, diag, lower) = self.evolution_system(if first { extra.as_deref() } else { None });
            let nr = norm(&r);
            history.push(nr / reference);
            if nr <= self.config.tol_nr * reference || nr <= self.config.residual_floor {
                return Ok((solves, nr / reference));
            }
            if solves == self.config.max_nr {
                return Err(Error::NewtonDiverged {
                    solve: "evolution",
                    iterations: solves,
                    history,
                });
            }
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let mut dd = solve_tridiagonal(&diag, &lower, &rhs)?;
            for (d, v) in self.state.d.iter_mut().zip(&dd) {
                *d += v;
            }
            if solves >= BACKTRACK_AFTER {
                let mut alpha = 1.0;
                while alpha > 1.0 / 256.0 && self.evolution_norm() >= nr {
                    alpha *= 0.5;
                    for (d, v) in self.state.d.iter_mut().zip(dd.iter_mut()) {
                        *d -= 0.5 * *v;
                        *v *= 0.5;
                    }
                }
            }
            solves += 1;
            if first && extra.is_some() {
                for e in 0..self.n {
                    if gated[e] {
                        let s = &mut self.state;
                        // d at the start of the solve
                        let d0 = 0.5 * (s.d[e] + s.d[e + 1] - dd[e] - dd[e + 1]);
                        let delta = 0.5 * (dd[e] + dd[e + 1]);
                        s.eps[e] = half_step_strain(s.eps[e], d0, delta, eta);
                        s.psi[e] = self.params.young * s.eps[e] * s.eps[e];
                    }
                }
            }
        }
    }

    fn evolution_norm(&self) -> f64 {
        norm(&self.evolution_system(None).0)
    }

    /// One load step with the right end at `u_right`. `ST` uses no prediction;
    /// any fast scheme applies the combined 1D fixed-stress update.
    pub fn evolve_1d(&mut self, u_right: f64, scheme: Scheme) -> Result<StaggeredStats> {
        self.state.u[self.n] = u_right;
        self.profiles.clear();
        let mut stats = StaggeredStats::default();
        let mut ref_u = None;
        let (k, r, a) = self.solve_momentum(&mut ref_u)?;
        stats.n_nr_u += k;
        stats.final_residual_u = r;
        stats.final_abs_u = a;
        self.update_strains();
        let ref_d = self.evolution_norm().max(self.config.residual_floor);
        loop {
            if stats.n_stag == self.config.max_stag {
                return Err(Error::StaggeredDiverged {
                    iterations: stats.n_stag,
                    last: stats.residual_history.last().copied().unwrap_or(f64::NAN),
                });
            }
            stats.n_stag += 1;
            let (k, _) = self.solve_evolution(scheme, ref_d)?;
            stats.n_nr_d += k;
            if self.record_profiles {
                self.profiles.push(self.state.d.clone());
            }
            let (k, r, a) = self.solve_momentum(&mut ref_u)?;
            stats.n_nr_u += k;
            stats.final_residual_u = r;
            stats.final_abs_u = a;
            self.update_strains();
            let nr = self.evolution_norm();
            let rel = nr / ref_d;
            stats.residual_history.push(rel);
            stats.final_residual_d = rel;
            stats.final_abs_d = nr;
            if nr <= self.config.tol_st * ref_d || nr <= self.config.residual_floor {
                break;
            }
        }
        let s = &mut self.state;
        for (p, d) in s.d_prev.iter_mut().zip(&s.d) {
            *p = p.max(*d);
        }
        for (m, p) in s.psi_max.iter_mut().zip(&s.psi) {
            *m = m.max(*p);
        }
        stats.reaction = self.momentum_residual().0[self.n];
        Ok(stats)
    }
}
