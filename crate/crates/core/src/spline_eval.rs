// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! Reconstructs the fitted curve and its driving control from a coefficient
//! vector, and reports sparsity statistics.
//!
//! The control is u(t) = sum_i theta_i g(t_i - t) with g the impulse
//! response. The output curve has the closed form
//!
//!   y(t) = c' exp(At) x0 + sum_i theta_i k(t, t_i),
//!
//! where k is the same kernel the Gram matrix is built from, so evaluating
//! the curve at the sample times reproduces G theta exactly rather than up
//! to quadrature error. The spline's domain is [0, t_N]: the last sample
//! time doubles as the horizon, and evaluation outside the domain is an
//! error by design (the basis functions are windowed, so extrapolated values
//! would be silently meaningless).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gramian::{validate_times, KernelTable};
use crate::lti::{matrix_exponential, StateSpace};
use crate::matrix::dot;
use crate::solver_l1::{L1Config, SolverReport};
use crate::solver_l2::L2Config;

/// Which solver produced a fit, with the parameters it ran under.
#[derive(Debug, Clone)]
pub enum FitConfig {
    L2(L2Config),
    L1(L1Config),
}

/// A fitted spline: everything needed to evaluate the curve anywhere in its
/// domain and to audit how it was produced.
#[derive(Debug, Clone)]
pub struct SplineFit {
    pub theta: Vec<f64>,
    /// Freely estimated initial state, when the fit included one.
    pub x0: Option<Vec<f64>>,
    pub times: Vec<f64>,
    pub system: StateSpace,
    pub config: FitConfig,
    /// Iterative-solver diagnostics; the closed-form path has none.
    pub report: Option<SolverReport>,
}

impl SplineFit {
    pub fn new(
        system: StateSpace,
        times: Vec<f64>,
        theta: Vec<f64>,
        x0: Option<Vec<f64>>,
        config: FitConfig,
        report: Option<SolverReport>,
    ) -> Result<Self> {
        validate_times(&times)?;
        if theta.len() != times.len() {
            return Err(Error::DimensionMismatch {
                what: "coefficient vector",
                expected: times.len(),
                got: theta.len(),
            });
        }
        if !theta.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput {
                what: "coefficient vector",
            });
        }
        if let Some(x) = &x0 {
            if x.len() != system.dim() {
                return Err(Error::DimensionMismatch {
                    what: "initial state",
                    expected: system.dim(),
                    got: x.len(),
                });
            }
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteInput { what: "initial state" });
            }
        }
        Ok(SplineFit {
            theta,
            x0,
            times,
            system,
            config,
            report,
        })
    }

    /// The spline domain is [0, horizon] with the horizon at the last
    /// sample time.
    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("validated fit has samples")
    }
}

/// Evaluates one fit at many points, amortizing the per-fit setup.
///
/// The control evaluation uses the factored form
/// u(t) = (sum_{t_i >= t} theta_i c' exp(A t_i)) exp(-A t) b: the bracketed
/// suffix sums are precomputed per fit, leaving one small matrix exponential
/// per query point.
pub struct CurveEvaluator<'a> {
    fit: &'a SplineFit,
    table: KernelTable<'a>,
    /// suffix[k] = sum over i >= k of theta_i c' exp(A t_i).
    suffix: Vec<Vec<f64>>,
    /// Scratch row of kernel values, reused across output queries so the
    /// sum runs through the same dot product the Gram matvec uses.
    row: Vec<f64>,
    horizon: f64,
}

impl<'a> CurveEvaluator<'a> {
    pub fn new(fit: &'a SplineFit) -> Result<Self> {
        let n = fit.system.dim();
        let at = fit.system.a().transpose();
        let mut suffix = alloc::vec![alloc::vec![0.0; n]; fit.times.len() + 1];
        for i in (0..fit.times.len()).rev() {
            let e = matrix_exponential(&at.scaled(fit.times[i]))?;
            let v = e.matvec(fit.system.c());
            for k in 0..n {
                suffix[i][k] = suffix[i + 1][k] + fit.theta[i] * v[k];
            }
        }
        Ok(CurveEvaluator {
            fit,
            table: KernelTable::new(&fit.system),
            suffix,
            row: alloc::vec![0.0; fit.times.len()],
            horizon: fit.horizon(),
        })
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// u(t) = sum_i theta_i g(t_i - t); samples earlier than t contribute
    /// nothing because the impulse response vanishes at negative lags.
    pub fn control(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let k = self.fit.times.partition_point(|&ti| ti < t);
        let e = matrix_exponential(&self.fit.system.a().scaled(-t))?;
        let eb = e.matvec(self.fit.system.b());
        Ok(dot(&self.suffix[k], &eb))
    }

    /// y(t) = c' exp(At) x0 + sum_i theta_i k(t, t_i).
    ///
    /// The kernel values are gathered and then contracted with theta by the
    /// same dot product the Gram matvec uses, so at a sample time the result
    /// is bitwise the matching entry of G theta.
    pub fn output(&mut self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        for (i, &ti) in self.fit.times.iter().enumerate() {
            self.row[i] = self.table.entry(t, ti)?;
        }
        let mut s = dot(&self.row, &self.fit.theta);
        if let Some(x0) = &self.fit.x0 {
            let at = self.fit.system.a().transpose();
            let e = matrix_exponential(&at.scaled(t))?;
            s += dot(&e.matvec(self.fit.system.c()), x0);
        }
        Ok(s)
    }
}

/// The control signal at a single instant. For many instants build one
/// `CurveEvaluator` instead; this convenience sets up and tears down the
/// suffix table per call.
pub fn control_signal(fit: &SplineFit, t: f64) -> Result<f64> {
    CurveEvaluator::new(fit)?.control(t)
}

/// The fitted curve at each grid point. All grid points must lie in the
/// spline domain [0, t_N].
pub fn output_curve(fit: &SplineFit, grid: &[f64]) -> Result<Vec<f64>> {
    let mut ev = CurveEvaluator::new(fit)?;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        out.push(ev.output(t)?);
    }
    Ok(out)
}

/// How sparse a coefficient vector is: how many entries exceed the
/// threshold in magnitude, which ones (0-based), and the l1 norm.
pub fn sparsity_report(theta: &[f64], threshold: f64) -> (usize, Vec<usize>, f64) {
    assert!(threshold >= 0.0, "sparsity threshold must be nonnegative");
    let mut indices = Vec::new();
    let mut l1 = 0.0f64;
    for (i, &v) in theta.iter().enumerate() {
        l1 += libm::fabs(v);
        if libm::fabs(v) > threshold {
            indices.push(i);
        }
    }
    (indices.len(), indices, l1)
}

/// RMSE and maximum absolute deviation between the fitted curve and a
/// reference signal on a grid. An empty grid yields (0, 0).
pub fn fit_error<F: Fn(f64) -> f64>(
    fit: &SplineFit,
    reference: F,
    grid: &[f64],
) -> Result<(f64, f64)> {
    let sampled: Vec<f64> = grid.iter().map(|&t| reference(t)).collect();
    fit_error_sampled(fit, &sampled, grid)
}

/// As `fit_error`, with the reference already sampled on the grid.
pub fn fit_error_sampled(
    fit: &SplineFit,
    reference: &[f64],
    grid: &[f64],
) -> Result<(f64, f64)> {
    if reference.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            what: "sampled reference",
            expected: grid.len(),
            got: reference.len(),
        });
    }
    let curve = output_curve(fit, grid)?;
    let mut sq = 0.0f64;
    let mut worst = 0.0f64;
    for (c, r) in curve.iter().zip(reference) {
        let d = c - r;
        sq += d * d;
        worst = worst.max(libm::fabs(d));
    }
    let rmse = if grid.is_empty() {
        0.0
    } else {
        libm::sqrt(sq / grid.len() as f64)
    };
    Ok((rmse, worst))
}
