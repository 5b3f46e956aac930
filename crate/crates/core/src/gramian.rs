// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! The Gram matrix of time-shifted impulse responses, assembled analytically.
//!
//! Entry (i, j) is the L2 inner product of g(t_i - .) and g(t_j - .) over
//! [0, T]. Because g vanishes for negative arguments the integral truncates
//! at t_min = min(t_i, t_j), and substituting s = t_min - t gives the closed
//! form
//!
//!   G_ij = c' W_c(t_min) exp(A' (t_max - t_min)) c,
//!
//! with W_c the finite-horizon controllability Gramian. One augmented matrix
//! exponential per distinct sample time plus one small exponential per
//! distinct time gap covers the whole matrix; nothing is integrated
//! numerically except in the deliberately independent quadrature oracle.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lti::{impulse_response, matrix_exponential, StateSpace};
use crate::matrix::{dot, Mat};

/// Checks 0 < t_1 < t_2 < ... and finiteness; returns the horizon t_N.
pub(crate) fn validate_times(times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::InvalidParameter {
            what: "times must be non-empty",
        });
    }
    let mut prev = 0.0;
    for &t in times {
        if !t.is_finite() {
            return Err(Error::NonFiniteInput { what: "sample times" });
        }
        if t <= 0.0 {
            return Err(Error::NonPositiveTime { value: t });
        }
        if t <= prev && prev > 0.0 {
            return Err(Error::NonIncreasingTimes);
        }
        prev = t;
    }
    Ok(prev)
}

/// Finite-horizon controllability Gramian W_c(t) = int_0^t e^{As} b b' e^{A's} ds,
/// computed from one exponential of the 2n x 2n Van Loan block matrix
/// [[-A, bb'], [0, A']] rather than by quadrature.
pub fn controllability_gramian(sys: &StateSpace, t: f64) -> Result<Mat> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter {
            what: "gramian horizon must be finite and nonnegative",
        });
    }
    let n = sys.dim();
    if t == 0.0 {
        return Ok(Mat::zeros(n, n));
    }
    let a = sys.a();
    let b = sys.b();
    let mut block = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            block.set(i, j, -a.get(i, j));
            block.set(i, n + j, b[i] * b[j]);
            block.set(n + i, n + j, a.get(j, i));
        }
    }
    let f = matrix_exponential(&block.scaled(t))?;
    // W_c(t) = F22' F12
    let mut w = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += f.get(n + k, n + i) * f.get(k, n + j);
            }
            w.set(i, j, s);
        }
    }
    Ok(w)
}

/// Shared kernel evaluator: k(ta, tb) = c' W_c(min) exp(A' |ta - tb|) c.
///
/// Both the Gram assembly and off-sample curve evaluation go through this
/// exact code path, so the identity "curve at sample times = G theta" holds
/// to the last bit rather than merely to rounding. Factors are cached per
/// distinct time (W_c(t) c) and per distinct gap (exp(A' gap) c); the caches
/// stop growing past a size cap so that dense evaluation grids, whose gaps
/// are mostly unique, stay within bounded memory. Cached and freshly
/// computed values are bitwise identical because the computation is
/// deterministic.
pub(crate) struct KernelTable<'a> {
    sys: &'a StateSpace,
    at: Mat,
    wc_c: BTreeMap<u64, Vec<f64>>,
    psi: BTreeMap<u64, Vec<f64>>,
}

const KERNEL_CACHE_CAP: usize = 8192;

fn cache_or_compute(
    map: &mut BTreeMap<u64, Vec<f64>>,
    key: u64,
    compute: impl FnOnce() -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    if let Some(v) = map.get(&key) {
        return Ok(v.clone());
    }
    let v = compute()?;
    if map.len() < KERNEL_CACHE_CAP {
        map.insert(key, v.clone());
    }
    Ok(v)
}

impl<'a> KernelTable<'a> {
    pub(crate) fn new(sys: &'a StateSpace) -> Self {
        KernelTable {
            sys,
            at: sys.a().transpose(),
            wc_c: BTreeMap::new(),
            psi: BTreeMap::new(),
        }
    }

    pub(crate) fn entry(&mut self, ta: f64, tb: f64) -> Result<f64> {
        let (tmin, tmax) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        let gap = tmax - tmin;
        let sys = self.sys;
        let wc = cache_or_compute(&mut self.wc_c, tmin.to_bits(), || {
            Ok(controllability_gramian(sys, tmin)?.matvec(sys.c()))
        })?;
        let at = &self.at;
        let psi = cache_or_compute(&mut self.psi, gap.to_bits(), || {
            Ok(matrix_exponential(&at.scaled(gap))?.matvec(sys.c()))
        })?;
        Ok(dot(&wc, &psi))
    }
}

/// Gram matrix G_ij = int_0^T g(t_i - t) g(t_j - t) dt via the closed form.
/// Symmetric by construction: (i, j) and (j, i) are the same evaluation.
pub fn gram_matrix(sys: &StateSpace, times: &[f64]) -> Result<Mat> {
    validate_times(times)?;
    let n = times.len();
    let mut table = KernelTable::new(sys);
    let mut g = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = table.entry(times[i], times[j])?;
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    Ok(g)
}

/// Initial-state response matrix: row j is c' exp(A t_j), so that H x0 is the
/// unforced output at the sample times.
pub fn h_matrix(sys: &StateSpace, times: &[f64]) -> Result<Mat> {
    validate_times(times)?;
    let n = sys.dim();
    let at = sys.a().transpose();
    let mut h = Mat::zeros(times.len(), n);
    for (j, &t) in times.iter().enumerate() {
        let e = matrix_exponential(&at.scaled(t))?;
        let row = e.matvec(sys.c());
        for k in 0..n {
            h.set(j, k, row[k]);
        }
    }
    Ok(h)
}

// 15-point Kronrod nodes with the embedded 7-point Gauss rule (QUADPACK
// values). Gauss points are the odd-indexed Kronrod abscissae plus center.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

const PANEL_BUDGET: usize = 1_000_000;

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let hw = 0.5 * (b - a);
    let ctr = 0.5 * (a + b);
    let fc = f(ctr);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for k in 0..7 {
        let x = hw * XGK[k];
        let f1 = f(ctr - x);
        let f2 = f(ctr + x);
        resk += WGK[k] * (f1 + f2);
        if k % 2 == 1 {
            resg += WG[k / 2] * (f1 + f2);
        }
    }
    (resk * hw, libm::fabs((resk - resg) * hw))
}

/// Adaptive bisection quadrature of f over [a, b] to absolute tolerance tol.
fn adaptive_quadrature<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let total = b - a;
    if total <= 0.0 {
        return Ok(0.0);
    }
    let mut stack: Vec<(f64, f64)> = Vec::new();
    stack.push((a, b));
    let mut sum = 0.0;
    let mut panels = 0usize;
    while let Some((lo, hi)) = stack.pop() {
        panels += 1;
        if panels > PANEL_BUDGET {
            return Err(Error::QuadratureNonConvergence);
        }
        let (val, err) = gauss_kronrod(f, lo, hi);
        if err <= tol * ((hi - lo) / total) {
            sum += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid));
            stack.push((mid, hi));
        }
    }
    Ok(sum)
}

/// Direct numerical evaluation of the Gram integrals; the test oracle for
/// `gram_matrix`. Same contract, but each entry is integrated adaptively to
/// absolute tolerance `tol` instead of using the closed form.
pub fn gram_matrix_quadrature(sys: &StateSpace, times: &[f64], tol: f64) -> Result<Mat> {
    let horizon = validate_times(times)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            what: "quadrature tolerance must be positive",
        });
    }
    let n = times.len();
    let mut g = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let (ti, tj) = (times[i], times[j]);
            let tmin = if ti < tj { ti } else { tj };
            let f = |t: f64| {
                impulse_response(sys, ti - t, horizon) * impulse_response(sys, tj - t, horizon)
            };
            let v = adaptive_quadrature(&f, 0.0, tmin, tol)?;
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    Ok(g)
}

/// The Gram matrix, the initial-state matrix, and the horizon, bundled for
/// the solvers: everything the finite-dimensional problem needs besides data.
#[derive(Debug, Clone)]
pub struct GramOperator {
    g: Mat,
    h: Mat,
    times: Vec<f64>,
    horizon: f64,
}

impl GramOperator {
    pub fn new(sys: &StateSpace, times: &[f64]) -> Result<Self> {
        let horizon = validate_times(times)?;
        Ok(GramOperator {
            g: gram_matrix(sys, times)?,
            h: h_matrix(sys, times)?,
            times: times.to_vec(),
            horizon,
        })
    }

    pub fn gram(&self) -> &Mat {
        &self.g
    }

    pub fn initial_state_matrix(&self) -> &Mat {
        &self.h
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}
