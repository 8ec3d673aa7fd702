//! Global assembly of the momentum and evolution systems on bilinear quads.
//!
//! Element kernels run in parallel and are merged in element order, so the
//! assembled arrays do not depend on the thread count.

use rayon::prelude::*;

use crate::constitutive::{self, MaterialParams, StrainState};
use crate::element::{GaussPoint, GAUSS_2X2};
use crate::error::{Error, Result};
use crate::linsolve::CsrMatrix;
use crate::mesh::{CellKind, Mesh};

/// History and coupling scalars carried by one Gauss point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GaussPointState {
    pub eps: StrainState,
    pub d_gp: f64,
    pub tr_eps_plus: f64,
    pub dev_dot_dev: f64,
    /// Active energy, possibly replaced by a half-step prediction.
    pub psi_plus: f64,
    pub psi_max: f64,
    pub d_prev_step: f64,
}

impl GaussPointState {
    pub fn set_strain(&mut self, eps: StrainState, p: &MaterialParams) {
        self.eps = eps;
        self.tr_eps_plus = eps.tr_plus();
        self.dev_dot_dev = eps.dev_dot_dev;
        self.psi_plus = constitutive::split_energies(&eps, p).0;
    }
}

/// Residual and tangent of one field.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub residual: Vec<f64>,
    pub stiffness: CsrMatrix,
    /// Dofs per node.
    pub dofs_per_node: usize,
}

impl GlobalSystem {
    pub fn dof(&self, node: usize, component: usize) -> usize {
        node * self.dofs_per_node + component
    }
}

/// Symmetric pattern of one nodal field plus per-cell scatter positions.
#[derive(Debug, Clone)]
struct DofPattern {
    template: CsrMatrix,
    /// `(npc*ndf)^2` value positions per cell, row-major in local dofs.
    scatter: Vec<usize>,
    ndf: usize,
}

impl DofPattern {
    fn new(mesh: &Mesh, ndf: usize) -> Self {
        let n = mesh.n_nodes();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for c in mesh.cells() {
            for &a in c {
                adj[a].extend_from_slice(c);
            }
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        for nbrs in &mut adj {
            nbrs.sort_unstable();
            nbrs.dedup();
            for _ in 0..ndf {
                for &m in nbrs.iter() {
                    col_idx.extend((0..ndf).map(|c| m * ndf + c));
                }
                row_ptr.push(col_idx.len());
            }
        }
        let template = CsrMatrix {
            n: n * ndf,
            values: vec![0.0; col_idx.len()],
            row_ptr,
            col_idx,
        };
        let nl = mesh.kind.nodes_per_cell() * ndf;
        let mut scatter = Vec::with_capacity(mesh.n_cells() * nl * nl);
        for c in mesh.cells() {
            let dofs: Vec<usize> = c
                .iter()
                .flat_map(|&a| (0..ndf).map(move |k| a * ndf + k))
                .collect();
            for &i in &dofs {
                for &j in &dofs {
                    scatter.push(template.find(i, j).expect("pattern covers cell"));
                }
            }
        }
        DofPattern {
            template,
            scatter,
            ndf,
        }
    }
}

/// Element-level output: local residual followed by the row-major local matrix.
type Local<const R: usize, const M: usize> = ([f64; R], [f64; M]);

/// Precomputed geometry and sparsity for a quad mesh.
#[derive(Debug, Clone)]
pub struct Assembler {
    pub mesh: Mesh,
    /// Four Gauss points per cell, cell-major.
    pub gauss: Vec<GaussPoint>,
    u_pat: DofPattern,
    d_pat: DofPattern,
}

impl Assembler {
    pub fn new(mesh: Mesh) -> Result<Self> {
        if mesh.kind != CellKind::Quad4 {
            return Err(Error::InvalidMesh("assembly needs a quad mesh".into()));
        }
        let mut gauss = Vec::with_capacity(4 * mesh.n_cells());
        for e in 0..mesh.n_cells() {
            let x = mesh.cell_coords(e);
            for p in GAUSS_2X2 {
                let gp = GaussPoint::new(&x, p);
                if !(gp.weight > 0.0) {
                    return Err(Error::SingularElement {
                        element: e,
                        det_j: gp.weight,
                    });
                }
                gauss.push(gp);
            }
        }
        let u_pat = DofPattern::new(&mesh, 2);
        let d_pat = DofPattern::new(&mesh, 1);
        Ok(Assembler {
            mesh,
            gauss,
            u_pat,
            d_pat,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.mesh.n_nodes()
    }

    pub fn n_gauss(&self) -> usize {
        self.gauss.len()
    }

    pub fn fresh_states(&self) -> Vec<GaussPointState> {
        vec![GaussPointState::default(); self.n_gauss()]
    }

    fn check(&self, what: usize, len: usize) -> Result<()> {
        if what != len {
            return Err(Error::SizeMismatch {
                expected: len,
                got: what,
            });
        }
        Ok(())
    }

    fn gather_u(&self, e: usize, u: &[f64]) -> [f64; 8] {
        let c = self.mesh.quad(e);
        let mut ue = [0.0; 8];
        for a in 0..4 {
            ue[2 * a] = u[2 * c[a]];
            ue[2 * a + 1] = u[2 * c[a] + 1];
        }
        ue
    }

    fn gather_d(&self, e: usize, d: &[f64]) -> [f64; 4] {
        self.mesh.quad(e).map(|n| d[n])
    }

    /// Strain at every Gauss point.
    pub fn strains(&self, u: &[f64]) -> Vec<StrainState> {
        (0..self.mesh.n_cells())
            .into_par_iter()
            .flat_map_iter(|e| {
                let ue = self.gather_u(e, u);
                (0..4).map(move |q| StrainState::from_voigt(self.gauss[4 * e + q].strain(&ue)))
            })
            .collect()
    }

    /// Recomputes the strain scalars and active energy of every Gauss point from `u`.
    pub fn update_states(
        &self,
        u: &[f64],
        d: &[f64],
        states: &mut [GaussPointState],
        p: &MaterialParams,
    ) -> Result<()> {
        self.check(u.len(), 2 * self.n_nodes())?;
        self.check(d.len(), self.n_nodes())?;
        self.check(states.len(), self.n_gauss())?;
        let strains = self.strains(u);
        for (i, (s, eps)) in states.iter_mut().zip(strains).enumerate() {
            s.set_strain(eps, p);
            s.d_gp = self.gauss[i].interp(&self.gather_d(i / 4, d));
        }
        Ok(())
    }

    /// Nodal field interpolated at every Gauss point.
    pub fn interpolate(&self, f: &[f64]) -> Vec<f64> {
        (0..self.n_gauss())
            .map(|i| self.gauss[i].interp(&self.gather_d(i / 4, f)))
            .collect()
    }

    fn momentum_local(&self, e: usize, u: &[f64], d: &[f64], p: &MaterialParams) -> Local<8, 64> {
        let ue = self.gather_u(e, u);
        let de = self.gather_d(e, d);
        let mut re = [0.0; 8];
        let mut ke = [0.0; 64];
        for q in 0..4 {
            let gp = &self.gauss[4 * e + q];
            let eps = StrainState::from_voigt(gp.strain(&ue));
            let dq = gp.interp(&de);
            let sig = constitutive::stress(&eps, dq, p);
            let c = constitutive::tangent_uu(&eps, dq, p);
            // plane components xx, yy, xy
            let s3 = [sig[0], sig[1], sig[3]];
            let c3 = [
                [c[0][0], c[0][1], c[0][3]],
                [c[1][0], c[1][1], c[1][3]],
                [c[3][0], c[3][1], c[3][3]],
            ];
            // B columns for local dof 2a (x) and 2a+1 (y)
            let mut b = [[0.0; 3]; 8];
            for a in 0..4 {
                let [nx, ny] = gp.dn[a];
                b[2 * a] = [nx, 0.0, ny];
                b[2 * a + 1] = [0.0, ny, nx];
            }
            let w = gp.weight;
            for i in 0..8 {
                re[i] += w * (b[i][0] * s3[0] + b[i][1] * s3[1] + b[i][2] * s3[2]);
                let mut cb = [0.0; 3];
                for r in 0..3 {
                    cb[r] = c3[r][0] * b[i][0] + c3[r][1] * b[i][1] + c3[r][2] * b[i][2];
                }
                for j in 0..8 {
                    ke[8 * j + i] += w * (b[j][0] * cb[0] + b[j][1] * cb[1] + b[j][2] * cb[2]);
                }
            }
        }
        (re, ke)
    }

    /// Internal force `F_u` and tangent `K_uu` at fixed `d`.
    pub fn assemble_momentum(
        &self,
        u: &[f64],
        d: &[f64],
        p: &MaterialParams,
    ) -> Result<GlobalSystem> {
        self.check(u.len(), 2 * self.n_nodes())?;
        self.check(d.len(), self.n_nodes())?;
        let locals: Vec<Local<8, 64>> = (0..self.mesh.n_cells())
            .into_par_iter()
            .map(|e| self.momentum_local(e, u, d, p))
            .collect();
        Ok(self.merge(&self.u_pat, &locals))
    }

    /// Internal force only.
    pub fn momentum_residual(&self, u: &[f64], d: &[f64], p: &MaterialParams) -> Result<Vec<f64>> {
        self.check(u.len(), 2 * self.n_nodes())?;
        self.check(d.len(), self.n_nodes())?;
        let locals: Vec<[f64; 8]> = (0..self.mesh.n_cells())
            .into_par_iter()
            .map(|e| {
                let ue = self.gather_u(e, u);
                let de = self.gather_d(e, d);
                let mut re = [0.0; 8];
                for q in 0..4 {
                    let gp = &self.gauss[4 * e + q];
                    let eps = StrainState::from_voigt(gp.strain(&ue));
                    let sig = constitutive::stress(&eps, gp.interp(&de), p);
                    for a in 0..4 {
                        let [nx, ny] = gp.dn[a];
                        re[2 * a] += gp.weight * (nx * sig[0] + ny * sig[3]);
                        re[2 * a + 1] += gp.weight * (ny * sig[1] + nx * sig[3]);
                    }
                }
                re
            })
            .collect();
        let mut r = vec![0.0; 2 * self.n_nodes()];
        for (e, re) in locals.iter().enumerate() {
            for (a, &n) in self.mesh.cell(e).iter().enumerate() {
                r[2 * n] += re[2 * a];
                r[2 * n + 1] += re[2 * a + 1];
            }
        }
        Ok(r)
    }

    #[allow(clippy::too_many_arguments)]
    fn evolution_local(
        &self,
        e: usize,
        d: &[f64],
        d_prev: &[f64],
        states: &[GaussPointState],
        extra: Option<&[f64]>,
        p: &MaterialParams,
        with_matrix: bool,
    ) -> Local<4, 16> {
        let de = self.gather_d(e, d);
        let dpe = self.gather_d(e, d_prev);
        let psi_c = p.psi_crit();
        let grad_coef = 2.0 * p.g_c * p.length_l / p.c_w;
        let mut re = [0.0; 4];
        let mut ke = [0.0; 16];
        for q in 0..4 {
            let i = 4 * e + q;
            let gp = &self.gauss[i];
            let psi = states[i].psi_plus;
            let dq = gp.interp(&de);
            let dp = gp.interp(&dpe);
            let gd = gp.grad(&de);
            let local = -2.0 * (1.0 - dq) * psi + psi_c * p.at_model.dw(dq);
            let penalty_on = dq < dp || (dq == dp && local > 0.0);
            let pen = if dq < dp { p.gamma * (dq - dp) } else { 0.0 };
            let src = local + pen;
            let w = gp.weight;
            for a in 0..4 {
                re[a] += w * (gp.n[a] * src + grad_coef * (gp.dn[a][0] * gd[0] + gp.dn[a][1] * gd[1]));
            }
            if with_matrix {
                let mut m = 2.0 * psi + psi_c * p.at_model.ddw();
                if penalty_on {
                    m += p.gamma;
                }
                if let Some(x) = extra {
                    m += x[i];
                }
                for a in 0..4 {
                    for b in 0..4 {
                        ke[4 * a + b] += w
                            * (gp.n[a] * gp.n[b] * m
                                + grad_coef * (gp.dn[a][0] * gp.dn[b][0] + gp.dn[a][1] * gp.dn[b][1]));
                    }
                }
            }
        }
        (re, ke)
    }

    /// Evolution residual `F_d` and tangent `K_dd` at the Gauss-point energies in `states`.
    /// `extra` adds a per-Gauss-point multiplier of `N^T N` to the tangent.
    pub fn assemble_evolution(
        &self,
        d: &[f64],
        d_prev: &[f64],
        states: &[GaussPointState],
        extra: Option<&[f64]>,
        p: &MaterialParams,
    ) -> Result<GlobalSystem> {
        self.check_evolution(d, d_prev, states, extra)?;
        let locals: Vec<Local<4, 16>> = (0..self.mesh.n_cells())
            .into_par_iter()
            .map(|e| self.evolution_local(e, d, d_prev, states, extra, p, true))
            .collect();
        Ok(self.merge(&self.d_pat, &locals))
    }

    pub fn evolution_residual(
        &self,
        d: &[f64],
        d_prev: &[f64],
        states: &[GaussPointState],
        p: &MaterialParams,
    ) -> Result<Vec<f64>> {
        self.check_evolution(d, d_prev, states, None)?;
        let locals: Vec<Local<4, 16>> = (0..self.mesh.n_cells())
            .into_par_iter()
            .map(|e| self.evolution_local(e, d, d_prev, states, None, p, false))
            .collect();
        let mut r = vec![0.0; self.n_nodes()];
        for (e, (re, _)) in locals.iter().enumerate() {
            for (a, &n) in self.mesh.cell(e).iter().enumerate() {
                r[n] += re[a];
            }
        }
        Ok(r)
    }

    fn check_evolution(
        &self,
        d: &[f64],
        d_prev: &[f64],
        states: &[GaussPointState],
        extra: Option<&[f64]>,
    ) -> Result<()> {
        self.check(d.len(), self.n_nodes())?;
        self.check(d_prev.len(), self.n_nodes())?;
        self.check(states.len(), self.n_gauss())?;
        if let Some(x) = extra {
            self.check(x.len(), self.n_gauss())?;
        }
        Ok(())
    }

    fn merge<const R: usize, const M: usize>(
        &self,
        pat: &DofPattern,
        locals: &[Local<R, M>],
    ) -> GlobalSystem {
        let mut k = pat.template.clone();
        let mut r = vec![0.0; k.n];
        let ndf = pat.ndf;
        for (e, (re, ke)) in locals.iter().enumerate() {
            for (a, &n) in self.mesh.cell(e).iter().enumerate() {
                for c in 0..ndf {
                    r[n * ndf + c] += re[a * ndf + c];
                }
            }
            let map = &pat.scatter[e * M..(e + 1) * M];
            for (pos, v) in map.iter().zip(ke.iter()) {
                k.values[*pos] += v;
            }
        }
        GlobalSystem {
            residual: r,
            stiffness: k,
            dofs_per_node: ndf,
        }
    }
}

/// Expands node ids into dof ids for one component.
pub fn node_dofs(nodes: &[usize], dofs_per_node: usize, component: usize) -> Vec<usize> {
    nodes.iter().map(|n| n * dofs_per_node + component).collect()
}

/// Eliminates constrained dofs symmetrically so that solving `K x = -R` yields
/// `x[i] = increment[i]` on every constrained dof.
pub fn apply_dirichlet(system: &mut GlobalSystem, fixed: &[bool], increment: &[f64]) -> Result<()> {
    let k = &mut system.stiffness;
    if fixed.len() != k.n || increment.len() != k.n {
        return Err(Error::SizeMismatch {
            expected: k.n,
            got: fixed.len().min(increment.len()),
        });
    }
    let r = &mut system.residual;
    for i in 0..k.n {
        for pos in k.row_ptr[i]..k.row_ptr[i + 1] {
            let j = k.col_idx[pos];
            if fixed[i] {
                if i != j {
                    k.values[pos] = 0.0;
                }
            } else if fixed[j] {
                r[i] += k.values[pos] * increment[j];
                k.values[pos] = 0.0;
            }
        }
    }
    for i in 0..k.n {
        if fixed[i] {
            let pos = k.find(i, i).expect("diagonal stored");
            if k.values[pos] == 0.0 {
                k.values[pos] = 1.0;
            }
            r[i] = -k.values[pos] * increment[i];
        }
    }
    Ok(())
}

/// Marks the dofs of `nodes` for `component`; fails on unknown nodes.
pub fn mark_fixed(fixed: &mut [bool], nodes: &[usize], dofs_per_node: usize, component: usize) -> Result<()> {
    let n_nodes = fixed.len() / dofs_per_node;
    for &n in nodes {
        if n >= n_nodes {
            return Err(Error::UnknownNode { node: n, n_nodes });
        }
        fixed[n * dofs_per_node + component] = true;
    }
    Ok(())
}

/// L2 norm over the free dofs.
pub fn free_norm(r: &[f64], fixed: &[bool]) -> f64 {
    r.iter()
        .zip(fixed)
        .filter(|(_, f)| !**f)
        .map(|(v, _)| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Sum of the internal force over `nodes` in `component` (0 = x, 1 = y).
pub fn reaction_force(internal: &[f64], nodes: &[usize], component: usize) -> f64 {
    nodes.iter().map(|n| internal[2 * n + component]).sum()
}
