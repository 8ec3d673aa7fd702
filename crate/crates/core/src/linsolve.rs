//! Sparse symmetric solves: supernodal Cholesky with symbolic reuse, a Jacobi
//! preconditioned CG, and an LDL^T pivot scan for definiteness diagnostics.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt::factor::{LltError, LltRegularization};
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form with sorted column indices.
/// Symmetric matrices store both triangles, so the arrays double as CSC.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (j, v) in r {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    /// Position of `(i, j)` in the value array.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .binary_search(&j)
            .ok()
            .map(|k| r.start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.find(i, j).map_or(0.0, |k| self.values[k])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    fn same_pattern(&self, other: &CsrMatrix) -> bool {
        self.n == other.n && self.row_ptr == other.row_ptr && self.col_idx == other.col_idx
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LinearSolverKind {
    #[default]
    Direct,
    Cg,
}

struct Symbolic {
    pattern: CsrMatrix,
    symbolic: SymbolicCholesky<usize>,
    l_values: Vec<f64>,
    buffer: MemBuffer,
}

/// Reusable solver. The direct path keeps the symbolic analysis of the last pattern.
pub struct SparseSolver {
    kind: LinearSolverKind,
    cache: Option<Symbolic>,
    pub cg_tol: f64,
}

impl std::fmt::Debug for SparseSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseSolver")
            .field("kind", &self.kind)
            .field("cached", &self.cache.is_some())
            .finish()
    }
}

impl SparseSolver {
    pub fn new(kind: LinearSolverKind) -> Self {
        SparseSolver {
            kind,
            cache: None,
            cg_tol: 1e-13,
        }
    }

    pub fn kind(&self) -> LinearSolverKind {
        self.kind
    }

    /// Solves `A x = b` for symmetric positive definite `A`.
    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != a.n {
            return Err(Error::SizeMismatch {
                expected: a.n,
                got: b.len(),
            });
        }
        match self.kind {
            LinearSolverKind::Direct => self.solve_direct(a, b),
            LinearSolverKind::Cg => cg(a, b, self.cg_tol, 20 * a.n + 100),
        }
    }

    fn symbolic(&mut self, a: &CsrMatrix) -> Result<&mut Symbolic> {
        let stale = match &self.cache {
            Some(c) => !c.pattern.same_pattern(a),
            None => true,
        };
        if stale {
            let sym = SymbolicSparseColMatRef::new_checked(a.n, a.n, &a.row_ptr, None, &a.col_idx);
            let symbolic = factorize_symbolic_cholesky(
                sym,
                Side::Lower,
                SymmetricOrdering::Amd,
                CholeskySymbolicParams::default(),
            )
            .map_err(|e| Error::Backend(format!("{e:?}")))?;
            let scratch = symbolic
                .factorize_numeric_llt_scratch::<f64>(Par::Seq, Default::default())
                .or(symbolic.solve_in_place_scratch::<f64>(1, Par::Seq));
            self.cache = Some(Symbolic {
                pattern: CsrMatrix {
                    n: a.n,
                    row_ptr: a.row_ptr.clone(),
                    col_idx: a.col_idx.clone(),
                    values: Vec::new(),
                },
                l_values: vec![0.0; symbolic.len_val()],
                symbolic,
                buffer: MemBuffer::new(scratch),
            });
        }
        Ok(self.cache.as_mut().expect("just filled"))
    }

    fn solve_direct(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let n = a.n;
        let c = self.symbolic(a)?;
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &a.row_ptr, None, &a.col_idx);
        let mat = SparseColMatRef::new(sym, &a.values);
        let llt = c
            .symbolic
            .factorize_numeric_llt(
                &mut c.l_values,
                mat,
                Side::Lower,
                LltRegularization::default(),
                Par::Seq,
                MemStack::new(&mut c.buffer),
                Default::default(),
            )
            .map_err(|e| match e {
                LltError::NonPositivePivot { index } => {
                    let index = match c.symbolic.perm() {
                        Some(p) => p.arrays().0[index.min(n - 1)],
                        None => index,
                    };
                    Error::NotPositiveDefinite { index }
                }
            })?;
        let mut x = b.to_vec();
        llt.solve_in_place_with_conj(
            Conj::No,
            MatMut::from_column_major_slice_mut(&mut x, n, 1),
            Par::Seq,
            MemStack::new(&mut c.buffer),
        );
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { index: 0 });
        }
        Ok(x)
    }
}

/// One-shot direct solve.
pub fn factor_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SparseSolver::new(LinearSolverKind::Direct).solve(a, b)
}

/// Jacobi-preconditioned conjugate gradients.
pub fn cg(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite { index: i });
    }
    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 0..max_iter {
        let ap = a.mul_vec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            let d = check_spd(a);
            return Err(Error::NotPositiveDefinite {
                index: d.first_non_positive.unwrap_or(d.min_index),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm2(&r) / b_norm;
        if res < tol {
            return Ok(x);
        }
        if it + 1 == max_iter {
            return Err(Error::IterativeStall {
                iterations: max_iter,
                residual: res,
            });
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(x)
}

/// Pivot report of an LDL^T factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpdDiagnosis {
    pub min_pivot: f64,
    /// Dof (original numbering) carrying the smallest pivot.
    pub min_index: usize,
    pub first_non_positive: Option<usize>,
}

impl SpdDiagnosis {
    pub fn is_positive_definite(&self) -> bool {
        self.first_non_positive.is_none()
    }
}

/// Runs an up-looking LDL^T on the fill-reducing permutation of `a` and reports
/// the smallest pivot. Stops at the first exactly-zero pivot.
pub fn check_spd(a: &CsrMatrix) -> SpdDiagnosis {
    let n = a.n;
    if n == 0 {
        return SpdDiagnosis {
            min_pivot: f64::INFINITY,
            min_index: 0,
            first_non_positive: None,
        };
    }
    let sym = SymbolicSparseColMatRef::new_checked(n, n, &a.row_ptr, None, &a.col_idx);
    let (fwd, inv): (Vec<usize>, Vec<usize>) = match factorize_symbolic_cholesky(
        sym,
        Side::Lower,
        SymmetricOrdering::Amd,
        CholeskySymbolicParams::default(),
    )
    .ok()
    .as_ref()
    .and_then(|s| s.perm().map(|p| (p.arrays().0.to_vec(), p.arrays().1.to_vec())))
    {
        Some(p) => p,
        None => ((0..n).collect(), (0..n).collect()),
    };

    // upper triangle of the permuted matrix, by column
    let col = |k: usize| {
        a.row(fwd[k])
            .map(|(j, v)| (inv[j], v))
            .filter(move |&(i, _)| i <= k)
    };

    const NONE: usize = usize::MAX;
    let mut parent = vec![NONE; n];
    let mut flag = vec![NONE; n];
    let mut lnz = vec![0usize; n];
    for k in 0..n {
        flag[k] = k;
        for (mut i, _) in col(k) {
            while i < k && flag[i] != k {
                if parent[i] == NONE {
                    parent[i] = k;
                }
                lnz[i] += 1;
                flag[i] = k;
                i = parent[i];
            }
        }
    }
    let mut lp = vec![0usize; n + 1];
    for k in 0..n {
        lp[k + 1] = lp[k] + lnz[k];
    }
    let mut li = vec![0usize; lp[n]];
    let mut lx = vec![0.0; lp[n]];
    let mut y = vec![0.0; n];
    let mut pattern = vec![0usize; n];
    let mut d = vec![0.0; n];
    flag.fill(NONE);
    lnz.fill(0);

    let mut out = SpdDiagnosis {
        min_pivot: f64::INFINITY,
        min_index: 0,
        first_non_positive: None,
    };
    for k in 0..n {
        let mut top = n;
        flag[k] = k;
        for (i0, v) in col(k) {
            y[i0] += v;
            let mut len = 0;
            let mut i = i0;
            while flag[i] != k {
                pattern[len] = i;
                len += 1;
                flag[i] = k;
                i = parent[i];
            }
            while len > 0 {
                top -= 1;
                len -= 1;
                pattern[top] = pattern[len];
            }
        }
        d[k] = y[k];
        y[k] = 0.0;
        for &i in &pattern[top..n] {
            let yi = y[i];
            y[i] = 0.0;
            for p in lp[i]..lp[i] + lnz[i] {
                y[li[p]] -= lx[p] * yi;
            }
            let l_ki = yi / d[i];
            d[k] -= l_ki * yi;
            let p = lp[i] + lnz[i];
            li[p] = k;
            lx[p] = l_ki;
            lnz[i] += 1;
        }
        if d[k] < out.min_pivot {
            out.min_pivot = d[k];
            out.min_index = fwd[k];
        }
        if !(d[k] > 0.0) && out.first_non_positive.is_none() {
            out.first_non_positive = Some(fwd[k]);
        }
        if d[k] == 0.0 {
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Fixed-free bar of `n` unit elements with unit stiffness.
    fn bar(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for e in 0..n {
            // node 0 fixed: dofs are nodes 1..=n shifted down by one
            let (a, b) = (e as isize - 1, e as isize);
            for (i, j, v) in [(a, a, 1.0), (b, b, 1.0), (a, b, -1.0), (b, a, -1.0)] {
                if i >= 0 && j >= 0 {
                    t.push((i as usize, j as usize, v));
                }
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    fn rel_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.mul_vec(x);
        let r: Vec<f64> = ax.iter().zip(b).map(|(p, q)| p - q).collect();
        norm2(&r) / norm2(b)
    }

    #[test]
    fn identity_solve() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        assert_eq!(factor_solve(&a, &b).unwrap(), b);
    }

    #[test]
    fn bar_tip_deflection() {
        // tip load P on a bar of n unit springs in series: u_tip = n P
        let n = 50;
        let a = bar(n);
        let mut b = vec![0.0; n];
        b[n - 1] = 2.0;
        let x = factor_solve(&a, &b).unwrap();
        assert!((x[n - 1] - 2.0 * n as f64).abs() < 1e-10);
        for (i, xi) in x.iter().enumerate() {
            assert!((xi - 2.0 * (i + 1) as f64).abs() < 1e-10);
        }
        let y = cg(&a, &b, 1e-13, 1000).unwrap();
        assert!(rel_residual(&a, &y, &b) < 1e-12);
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        assert!(factor_solve(&a, &[1.0, 1.0]).is_err());
        let a = CsrMatrix::from_triplets(1, &[(0, 0, -1.0)]);
        assert!(matches!(
            factor_solve(&a, &[1.0]),
            Err(Error::NotPositiveDefinite { index: 0 })
        ));
        let d = check_spd(&a);
        assert_eq!(d.min_pivot, -1.0);
        assert_eq!(d.first_non_positive, Some(0));
    }

    #[test]
    fn indefinite_pivot_points_at_bad_dof() {
        let mut a = bar(20);
        let k = a.find(7, 7).unwrap();
        a.values[k] = -5.0;
        let d = check_spd(&a);
        assert!(!d.is_positive_definite());
        match factor_solve(&a, &vec![1.0; 20]) {
            Err(Error::NotPositiveDefinite { index }) => assert!(index < 20),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn spd_pivots_positive() {
        let d = check_spd(&bar(30));
        assert!(d.is_positive_definite());
        assert!(d.min_pivot > 0.0);
    }

    #[test]
    fn symbolic_reuse_and_determinism() {
        let a = bar(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let mut s = SparseSolver::new(LinearSolverKind::Direct);
        let x1 = s.solve(&a, &b).unwrap();
        let mut a2 = a.clone();
        for v in &mut a2.values {
            *v *= 2.0;
        }
        let x2 = s.solve(&a2, &b).unwrap();
        let x3 = s.solve(&a, &b).unwrap();
        assert_eq!(x1, x3);
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - 2.0 * q).abs() < 1e-9 * p.abs().max(1.0));
        }
    }

    fn spd_matrix() -> impl Strategy<Value = CsrMatrix> {
        (3usize..25, prop::collection::vec(-1.0..1.0f64, 60)).prop_map(|(n, w)| {
            // graph Laplacian of a ring with random positive weights plus a shift
            let mut t = Vec::new();
            for i in 0..n {
                let j = (i + 1) % n;
                let c = 1.0 + w[i % w.len()].abs();
                t.extend([(i, i, c), (j, j, c), (i, j, -c), (j, i, -c)]);
                t.push((i, i, 0.1 + w[(i + 7) % w.len()].abs()));
            }
            CsrMatrix::from_triplets(n, &t)
        })
    }

    proptest! {
        #[test]
        fn direct_residual_bound(a in spd_matrix()) {
            let b: Vec<f64> = (0..a.n).map(|i| 1.0 + i as f64).collect();
            let x = factor_solve(&a, &b).unwrap();
            prop_assert!(rel_residual(&a, &x, &b) < 1e-12);
            let y = cg(&a, &b, 1e-14, 10_000).unwrap();
            prop_assert!(rel_residual(&a, &y, &b) < 1e-12);
            prop_assert!(check_spd(&a).is_positive_definite());
        }

        #[test]
        fn ldl_matches_llt_verdict(a in spd_matrix(), shift in 0.0..6.0f64) {
            let mut a = a;
            for i in 0..a.n {
                let k = a.find(i, i).unwrap();
                a.values[k] -= shift;
            }
            let ldl = check_spd(&a).is_positive_definite();
            let llt = factor_solve(&a, &vec![1.0; a.n]).is_ok();
            // the two factorizations disagree only on near-singular matrices
            let near = check_spd(&a).min_pivot.abs() < 1e-9;
            prop_assert!(ldl == llt || near);
        }
    }
}
