//! Compressed sparse row matrices and Krylov solvers.
//!
//! All reductions run sequentially in index order so results are bit-for-bit
//! reproducible.

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("solver breakdown at iteration {0}")]
    Breakdown(usize),
    #[error("zero pivot in row {0}")]
    ZeroPivot(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b - Ax‖ / ‖b‖` at exit.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Square matrix from `(row, col, value)` entries; duplicates are summed in
    /// input order.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, T)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, c, _) in triplets {
            assert!(r < n && c < n, "entry ({r}, {c}) outside {n}x{n}");
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut raw = vec![(0usize, T::zero()); triplets.len()];
        for &(r, c, v) in triplets {
            raw[fill[r]] = (c, v);
            fill[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for r in 0..n {
            let row = &mut raw[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i).find(|&(c, _)| c == j).map_or(T::zero(), |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Copy of the matrix with `d[i]` added to each diagonal entry, which must
    /// be stored.
    pub fn with_added_diagonal(&self, d: &[T]) -> Self {
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            let p = (self.row_ptr[i]..self.row_ptr[i + 1])
                .find(|&p| self.col_idx[p] == i)
                .expect("diagonal entry stored");
            out.values[p] += di;
        }
        out
    }

    pub fn mul_vec(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).fold(T::zero(), |s, (c, v)| s + v * x[c]);
        }
    }

    pub fn is_symmetric(&self, rel_tol: T) -> bool {
        (0..self.n).all(|i| {
            self.row(i).all(|(j, v)| {
                let w = self.get(j, i);
                (v - w).abs() <= rel_tol * v.abs().max(w.abs())
            })
        })
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub trait Preconditioner<T> {
    /// `z = M⁻¹ r`.
    fn apply(&self, r: &[T], z: &mut [T]);
}

pub struct Identity;

impl<T: Real> Preconditioner<T> for Identity {
    fn apply(&self, r: &[T], z: &mut [T]) {
        z.copy_from_slice(r);
    }
}

pub struct Jacobi<T> {
    inv_diag: Vec<T>,
}

impl<T: Real> Jacobi<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self, SolverError> {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .enumerate()
            .map(|(i, d)| if d == T::zero() { Err(SolverError::ZeroPivot(i)) } else { Ok(T::one() / d) })
            .collect::<Result<_, _>>()?;
        Ok(Self { inv_diag })
    }
}

impl<T: Real> Preconditioner<T> for Jacobi<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        for ((zi, &ri), &d) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * d;
        }
    }
}

/// Incomplete LU with the sparsity pattern of `A`. On a symmetric matrix the
/// factors satisfy `U = D Lᵀ`, so it also serves as an IC(0) preconditioner.
pub struct Ilu0<T> {
    a: CsrMatrix<T>,
    diag_pos: Vec<usize>,
}

impl<T: Real> Ilu0<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self, SolverError> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.col_idx[p] == i {
                    diag_pos[i] = p;
                }
            }
            if diag_pos[i] == usize::MAX {
                return Err(SolverError::ZeroPivot(i));
            }
        }
        let mut pos_in_row = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for p in start..end {
                pos_in_row[lu.col_idx[p]] = p;
            }
            for p in start..end {
                let k = lu.col_idx[p];
                if k >= i {
                    break;
                }
                let pivot = lu.values[diag_pos[k]];
                if pivot == T::zero() {
                    return Err(SolverError::ZeroPivot(k));
                }
                let factor = lu.values[p] / pivot;
                lu.values[p] = factor;
                for q in diag_pos[k] + 1..lu.row_ptr[k + 1] {
                    let j = lu.col_idx[q];
                    let target = pos_in_row[j];
                    if target != usize::MAX {
                        let u = lu.values[q];
                        lu.values[target] -= factor * u;
                    }
                }
            }
            for p in start..end {
                pos_in_row[lu.col_idx[p]] = usize::MAX;
            }
            if lu.values[diag_pos[i]] == T::zero() {
                return Err(SolverError::ZeroPivot(i));
            }
        }
        Ok(Self { a: lu, diag_pos })
    }
}

impl<T: Real> Preconditioner<T> for Ilu0<T> {
    fn apply(&self, r: &[T], z: &mut [T]) {
        let lu = &self.a;
        for i in 0..lu.n {
            let mut s = r[i];
            for p in lu.row_ptr[i]..self.diag_pos[i] {
                s -= lu.values[p] * z[lu.col_idx[p]];
            }
            z[i] = s;
        }
        for i in (0..lu.n).rev() {
            let mut s = z[i];
            for p in self.diag_pos[i] + 1..lu.row_ptr[i + 1] {
                s -= lu.values[p] * z[lu.col_idx[p]];
            }
            z[i] = s / lu.values[self.diag_pos[i]];
        }
    }
}

fn relative_residual<T: Real>(a: &CsrMatrix<T>, b: &[T], x: &[T]) -> f64 {
    let mut ax = vec![T::zero(); b.len()];
    a.mul_vec(x, &mut ax);
    let r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let nb = norm(b);
    if nb == T::zero() {
        norm(&r).to_f64_lossy()
    } else {
        (norm(&r) / nb).to_f64_lossy()
    }
}

/// Preconditioned conjugate gradients for SPD systems; `x` holds the initial
/// guess on entry.
pub fn pcg<T: Real, P: Preconditioner<T>>(
    a: &CsrMatrix<T>,
    b: &[T],
    x: &mut [T],
    precond: &P,
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats, SolverError> {
    let n = a.dim();
    let nb = norm(b);
    if nb == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(SolveStats { iterations: 0, residual: 0.0 });
    }
    let tol_abs = T::lit(tol) * nb;
    let mut r = vec![T::zero(); n];
    a.mul_vec(x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z = vec![T::zero(); n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for it in 0..max_iter {
        if norm(&r) <= tol_abs {
            return Ok(SolveStats { iterations: it, residual: relative_residual(a, b, x) });
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(SolverError::Breakdown(it));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond.apply(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = relative_residual(a, b, x);
    if residual <= tol {
        Ok(SolveStats { iterations: max_iter, residual })
    } else {
        Err(SolverError::NotConverged { iterations: max_iter, residual })
    }
}

/// Right-preconditioned BiCGSTAB for general nonsingular systems.
pub fn bicgstab<T: Real, P: Preconditioner<T>>(
    a: &CsrMatrix<T>,
    b: &[T],
    x: &mut [T],
    precond: &P,
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats, SolverError> {
    let n = a.dim();
    let nb = norm(b);
    if nb == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(SolveStats { iterations: 0, residual: 0.0 });
    }
    let tol_abs = T::lit(tol) * nb;
    let mut r = vec![T::zero(); n];
    a.mul_vec(x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (T::one(), T::one(), T::one());
    let mut v = vec![T::zero(); n];
    let mut p = vec![T::zero(); n];
    let mut p_hat = vec![T::zero(); n];
    let mut s = vec![T::zero(); n];
    let mut s_hat = vec![T::zero(); n];
    let mut t = vec![T::zero(); n];
    for it in 0..max_iter {
        if norm(&r) <= tol_abs {
            return Ok(SolveStats { iterations: it, residual: relative_residual(a, b, x) });
        }
        let rho_next = dot(&r_hat, &r);
        if rho_next == T::zero() || omega == T::zero() {
            return Err(SolverError::Breakdown(it));
        }
        let beta = (rho_next / rho) * (alpha / omega);
        rho = rho_next;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        precond.apply(&p, &mut p_hat);
        a.mul_vec(&p_hat, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == T::zero() {
            return Err(SolverError::Breakdown(it));
        }
        alpha = rho / rv;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= tol_abs {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            return Ok(SolveStats { iterations: it + 1, residual: relative_residual(a, b, x) });
        }
        precond.apply(&s, &mut s_hat);
        a.mul_vec(&s_hat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt == T::zero() { T::zero() } else { dot(&t, &s) / tt };
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
    }
    let residual = relative_residual(a, b, x);
    if residual <= tol {
        Ok(SolveStats { iterations: max_iter, residual })
    } else {
        Err(SolverError::NotConverged { iterations: max_iter, residual })
    }
}
