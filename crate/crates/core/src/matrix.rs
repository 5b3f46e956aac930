// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dense row-major matrices and the few factorizations the solvers need.
//!
//! Everything here is deliberately small and allocation-honest: state
//! dimensions stay in single digits and Gram systems in the hundreds, so a
//! naive O(n^3) kernel with partial pivoting is both fast enough and easy to
//! audit.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row-major data. Fails if the length is off.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "matrix data",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Mat { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                let orow = k * other.cols;
                let trow = i * other.cols;
                for j in 0..other.cols {
                    out.data[trow + j] += aik * other.data[orow + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            out[i] = dot(self.row(i), v);
        }
        out
    }

    /// self^T * v without forming the transpose.
    pub fn matvec_transposed(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "matvec_transposed dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            let row = self.row(i);
            for j in 0..self.cols {
                out[j] += vi * row[j];
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Mat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    /// Maximum absolute column sum (the induced 1-norm).
    pub fn norm_one(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.cols {
            let mut s = 0.0;
            for i in 0..self.rows {
                s += abs(self.get(i, j));
            }
            best = best.max(s);
        }
        best
    }

    /// Maximum absolute row sum (the induced infinity norm).
    pub fn norm_inf(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.rows {
            let s: f64 = self.row(i).iter().map(|v| abs(*v)).sum();
            best = best.max(s);
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(abs(*v)))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[inline]
fn abs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four independent accumulators break the additive dependency chain,
    // which otherwise serializes the loop at one add latency per element
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a.chunks_exact(4).zip(b.chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut s = (acc[0] + acc[2]) + (acc[1] + acc[3]);
    let rem = a.len() / 4 * 4;
    for i in rem..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub fn norm_inf_vec(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(abs(*x)))
}

pub fn norm2_vec(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// Compensated dot product: returns sum(a[i]*b[i]) with the running error of
/// both the products and the additions folded back in. Used where a plain
/// accumulation would lose the residual to cancellation.
pub fn dot_compensated(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for i in 0..a.len() {
        let p = a[i] * b[i];
        let ep = libm::fma(a[i], b[i], -p);
        let t = s + p;
        let es = if abs(s) >= abs(p) {
            (s - t) + p
        } else {
            (p - t) + s
        };
        s = t;
        c += ep + es;
    }
    s + c
}

/// LU factorization with partial pivoting, PA = LU packed in one matrix.
#[derive(Debug)]
pub struct LuFactors {
    lu: Mat,
    piv: Vec<usize>,
}

pub fn lu_factor(a: &Mat) -> Result<LuFactors> {
    assert!(a.is_square(), "LU factorization needs a square matrix");
    let n = a.rows();
    let mut lu = a.clone();
    let mut piv: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut p = k;
        let mut best = abs(lu.get(k, k));
        for i in k + 1..n {
            let v = abs(lu.get(i, k));
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularSystem);
        }
        if p != k {
            for j in 0..n {
                let tmp = lu.get(k, j);
                lu.set(k, j, lu.get(p, j));
                lu.set(p, j, tmp);
            }
            piv.swap(k, p);
        }
        let pivot = lu.get(k, k);
        for i in k + 1..n {
            let m = lu.get(i, k) / pivot;
            lu.set(i, k, m);
            if m != 0.0 {
                for j in k + 1..n {
                    let v = lu.get(i, j) - m * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
    }
    Ok(LuFactors { lu, piv })
}

impl LuFactors {
    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.rows();
        assert_eq!(b.len(), n);
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = b[self.piv[i]];
        }
        // forward: L has unit diagonal
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s;
        }
        // backward
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu.get(i, j) * x[j];
            }
            x[i] = s / self.lu.get(i, i);
        }
        x
    }

    pub fn solve_mat(&self, b: &Mat) -> Mat {
        let n = self.lu.rows();
        assert_eq!(b.rows(), n);
        let mut out = Mat::zeros(n, b.cols());
        let mut col = vec![0.0; n];
        for j in 0..b.cols() {
            for i in 0..n {
                col[i] = b.get(i, j);
            }
            let x = self.solve_vec(&col);
            for i in 0..n {
                out.set(i, j, x[i]);
            }
        }
        out
    }
}

/// Cholesky factorization A = L L^T for symmetric positive definite input.
pub fn cholesky(a: &Mat) -> Result<Mat> {
    assert!(a.is_square());
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            let v = l.get(j, k);
            d -= v * v;
        }
        if d <= 0.0 {
            return Err(Error::SingularSystem);
        }
        let dj = libm::sqrt(d);
        l.set(j, j, dj);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / dj);
        }
    }
    Ok(l)
}

/// Cholesky that tolerates a positive semidefinite input: any pivot at or
/// below `tol` pins the corresponding variable to zero instead of failing.
/// Solving with the factor then returns the minimum-energy solution on the
/// unpinned block; pinned coordinates come back as exact zeros.
#[derive(Debug)]
pub struct PinnedCholesky {
    l: Mat,
    pinned: Vec<bool>,
}

pub fn cholesky_pinned(a: &Mat, tol: f64) -> PinnedCholesky {
    assert!(a.is_square());
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    let mut pinned = vec![false; n];
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            if pinned[k] {
                continue;
            }
            let v = l.get(j, k);
            d -= v * v;
        }
        if d <= tol {
            pinned[j] = true;
            l.set(j, j, 1.0);
            for i in j + 1..n {
                l.set(i, j, 0.0);
            }
            continue;
        }
        let dj = libm::sqrt(d);
        l.set(j, j, dj);
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                if pinned[k] {
                    continue;
                }
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / dj);
        }
    }
    PinnedCholesky { l, pinned }
}

impl PinnedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows();
        assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            if self.pinned[i] {
                y[i] = 0.0;
                continue;
            }
            let mut s = b[i];
            for j in 0..i {
                s -= self.l.get(i, j) * y[j];
            }
            y[i] = s / self.l.get(i, i);
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            if self.pinned[i] {
                x[i] = 0.0;
                continue;
            }
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.l.get(j, i) * x[j];
            }
            x[i] = s / self.l.get(i, i);
        }
        x
    }

    pub fn any_pinned(&self) -> bool {
        self.pinned.iter().any(|p| *p)
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi sweeps, descending.
/// Only used on small matrices (rank tests, PSD checks), where Jacobi's
/// robustness beats anything fancier.
pub fn symmetric_eigenvalues(a: &Mat) -> Vec<f64> {
    assert!(a.is_square());
    let n = a.rows();
    let mut m = a.clone();
    // symmetrize defensively; callers pass analytically symmetric input
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    let scale = m.max_abs();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(abs(m.get(i, j)));
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if abs(apq) <= 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + libm::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    eig
}

/// Singular values via the eigenvalues of A^T A, descending. Adequate for the
/// small rank decisions this crate makes; not a general-purpose SVD.
pub fn singular_values(a: &Mat) -> Vec<f64> {
    let ata = a.transpose().matmul(a);
    symmetric_eigenvalues(&ata)
        .into_iter()
        .map(|l| libm::sqrt(l.max(0.0)))
        .collect()
}
