//! Small dense linear algebra used by the separation analyzer: Cholesky,
//! LU solves (dense and tridiagonal, both with partial pivoting) and power
//! iteration. Kept in-crate so the numeric path stays auditable end to end.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMat<F> {
    n: usize,
    data: Vec<F>,
}

impl<F: Scalar> SquareMat<F> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![F::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(
                "matrix rows must be square".into(),
            ));
        }
        Ok(Self {
            n,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Maximum absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> F {
        let mut worst = F::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = (self.get(i, j) - self.get(j, i)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// True when every entry with `|i - j| >= 2` is exactly zero.
    pub fn is_tridiagonal(&self) -> bool {
        for i in 0..self.n {
            let row = self.row(i);
            for (j, &v) in row.iter().enumerate() {
                if (i as i64 - j as i64).abs() >= 2 && v != F::zero() {
                    return false;
                }
            }
        }
        true
    }

    /// Principal submatrix over the given (not necessarily sorted) indices;
    /// indices are deduplicated and sorted first.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Result<SquareMat<F>> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument(
                "submatrix index set is empty".into(),
            ));
        }
        let mut idx: Vec<usize> = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if *idx.last().unwrap() >= self.n {
            return Err(Error::InvalidArgument(format!(
                "submatrix index {} out of range [0, {})",
                idx.last().unwrap(),
                self.n
            )));
        }
        let m = idx.len();
        let mut out = SquareMat::zeros(m);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out.set(a, b, self.get(i, j));
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, x: &[F]) -> Vec<F> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }
}

/// Lower-triangular Cholesky factor `L` with `L L^T = A`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor<F> {
    l: SquareMat<F>,
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Fails with the index of the first non-positive pivot when the matrix is
/// not positive definite.
pub fn cholesky<F: Scalar>(a: &SquareMat<F>) -> Result<CholeskyFactor<F>> {
    let n = a.dim();
    let mut l = SquareMat::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if s <= F::zero() || !s.is_finite() {
                    return Err(Error::NotPositiveDefinite {
                        pivot: i,
                        value: s.as_f64(),
                    });
                }
                l.set(i, j, s.sqrt());
            } else {
                l.set(i, j, s / l.get(j, j));
            }
        }
    }
    Ok(CholeskyFactor { l })
}

impl<F: Scalar> CholeskyFactor<F> {
    pub fn lower(&self) -> &SquareMat<F> {
        &self.l
    }

    /// Solves `A x = b` by forward then back substitution.
    #[allow(clippy::needless_range_loop)]
    pub fn solve(&self, b: &[F]) -> Vec<F> {
        let n = self.l.dim();
        let mut y = vec![F::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s -= self.l.get(i, k) * y[k];
            }
            y[i] = s / self.l.get(i, i);
        }
        let mut x = vec![F::zero(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= self.l.get(k, i) * x[k];
            }
            x[i] = s / self.l.get(i, i);
        }
        x
    }

    /// Reconstruction `L L^T`.
    pub fn reconstruct(&self) -> SquareMat<F> {
        let n = self.l.dim();
        let mut out = SquareMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s = F::zero();
                for k in 0..=i.min(j) {
                    s += self.l.get(i, k) * self.l.get(j, k);
                }
                out.set(i, j, s);
            }
        }
        out
    }
}

/// Solves `A x = b` by dense LU with partial pivoting; handles any
/// nonsingular matrix, including symmetric indefinite ones.
#[allow(clippy::needless_range_loop)]
pub fn lu_solve<F: Scalar>(a: &SquareMat<F>, b: &[F]) -> Result<Vec<F>> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "rhs has {} entries for a {n}x{n} matrix",
            b.len()
        )));
    }
    let mut m = a.clone();
    let mut x: Vec<F> = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        let mut best = m.get(col, col).abs();
        for r in (col + 1)..n {
            let v = m.get(r, col).abs();
            if v > best {
                best = v;
                pivot = r;
            }
        }
        if best == F::zero() || !best.is_finite() {
            return Err(Error::Singular { column: col });
        }
        if pivot != col {
            for j in 0..n {
                let (a1, a2) = (m.get(col, j), m.get(pivot, j));
                m.set(col, j, a2);
                m.set(pivot, j, a1);
            }
            x.swap(col, pivot);
        }
        let d = m.get(col, col);
        for r in (col + 1)..n {
            let factor = m.get(r, col) / d;
            if factor == F::zero() {
                continue;
            }
            for j in col..n {
                let v = m.get(r, j) - factor * m.get(col, j);
                m.set(r, j, v);
            }
            x[r] = x[r] - factor * x[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for j in (i + 1)..n {
            s -= m.get(i, j) * x[j];
        }
        x[i] = s / m.get(i, i);
    }
    Ok(x)
}

/// Solves a tridiagonal system by banded LU with partial pivoting in O(n).
///
/// `diag` has length n, `sub` and `sup` length n-1. Pivoting introduces one
/// extra superdiagonal of fill-in, as in the classic banded solvers.
pub fn tridiag_solve<F: Scalar>(diag: &[F], sub: &[F], sup: &[F], b: &[F]) -> Result<Vec<F>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty system".into()));
    }
    if sub.len() != n - 1 || sup.len() != n - 1 || b.len() != n {
        return Err(Error::DimensionMismatch("tridiagonal band lengths".into()));
    }
    // Working bands: d = main, u1 = first super, u2 = second super (fill-in).
    let mut d: Vec<F> = diag.to_vec();
    let mut l: Vec<F> = sub.to_vec();
    let mut u1: Vec<F> = sup.to_vec();
    let mut u2: Vec<F> = vec![F::zero(); n.saturating_sub(2)];
    let mut x: Vec<F> = b.to_vec();

    for i in 0..n - 1 {
        let below = l[i];
        if below.abs() > d[i].abs() {
            // Swap rows i and i+1, band by band; l[i] then holds old d[i].
            std::mem::swap(&mut d[i], &mut l[i]);
            std::mem::swap(&mut u1[i], &mut d[i + 1]);
            if i + 2 < n {
                // u2[i] is still zero before this step's fill-in.
                std::mem::swap(&mut u2[i], &mut u1[i + 1]);
            }
            x.swap(i, i + 1);
        }
        if d[i] == F::zero() || !d[i].is_finite() {
            return Err(Error::Singular { column: i });
        }
        let factor = l[i] / d[i];
        d[i + 1] -= factor * u1[i];
        if i + 2 < n {
            u1[i + 1] -= factor * u2[i];
        }
        x[i + 1] = x[i + 1] - factor * x[i];
    }
    if d[n - 1] == F::zero() || !d[n - 1].is_finite() {
        return Err(Error::Singular { column: n - 1 });
    }

    for i in (0..n).rev() {
        let mut s = x[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }
    Ok(x)
}

/// Extracts the three bands of a tridiagonal matrix.
pub fn bands_of<F: Scalar>(a: &SquareMat<F>) -> (Vec<F>, Vec<F>, Vec<F>) {
    let n = a.dim();
    let diag: Vec<F> = (0..n).map(|i| a.get(i, i)).collect();
    let sub: Vec<F> = (1..n).map(|i| a.get(i, i - 1)).collect();
    let sup: Vec<F> = (0..n - 1).map(|i| a.get(i, i + 1)).collect();
    (diag, sub, sup)
}

/// Dominant eigenvalue (largest magnitude) of a symmetric matrix by power
/// iteration with Rayleigh-quotient convergence.
///
/// Stops when successive Rayleigh quotients differ by at most `tol`
/// (relative) or after `max_iter` iterations, returning the last estimate.
pub fn dominant_eigenvalue<F: Scalar>(a: &SquareMat<F>, tol: f64, max_iter: usize) -> F {
    let n = a.dim();
    // Tridiagonal matrices multiply in O(n) per iteration.
    let bands = if n >= 3 && a.is_tridiagonal() {
        Some(bands_of(a))
    } else {
        None
    };
    let mul = |v: &[F]| -> Vec<F> {
        match &bands {
            Some((diag, sub, sup)) => (0..n)
                .map(|i| {
                    let mut s = diag[i] * v[i];
                    if i > 0 {
                        s += sub[i - 1] * v[i - 1];
                    }
                    if i + 1 < n {
                        s += sup[i] * v[i + 1];
                    }
                    s
                })
                .collect(),
            None => a.mat_vec(v),
        }
    };

    let norm0 = F::of_f64(1.0 / (n as f64).sqrt());
    let mut v: Vec<F> = vec![norm0; n];
    let mut lambda = F::zero();
    for _ in 0..max_iter {
        let w = mul(&v);
        // v is unit length, so the Rayleigh quotient is v . (A v).
        let next: F = v.iter().zip(&w).map(|(&x, &y)| x * y).sum();
        let norm: F = w.iter().map(|&x| x * x).sum::<F>().sqrt();
        if norm == F::zero() {
            return F::zero(); // zero matrix
        }
        for (vi, &wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        let scale = next.abs().max(F::one());
        if (next - lambda).abs() <= F::of_f64(tol) * scale {
            return next;
        }
        lambda = next;
    }
    lambda
}
