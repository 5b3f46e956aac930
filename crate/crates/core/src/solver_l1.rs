// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! Sparse spline coefficients: minimize eta ||theta||_1 + ||W (G theta - y)||_p^p.
//!
//! Two first-order solvers, chosen by the loss exponent:
//!
//! * p = 2: monotone FISTA. The smooth part has Lipschitz gradient with
//!   constant 2 sigma_max(WG)^2, estimated by power iteration; the monotone
//!   variant never lets the objective increase, and a failed plain step
//!   doubles the Lipschitz estimate, so a slightly low power-iteration result
//!   cannot destabilize it.
//! * p = 1: ADMM on the splitting z1 = theta, z2 = W(G theta - y), which
//!   turns both nonsmooth terms into soft-threshold updates. The linear
//!   system in the theta update does not depend on the penalty rho, so its
//!   Cholesky factor survives residual-balancing rho changes.
//!
//! Both handle an optional free initial state x0 (never penalized): FISTA by
//! exempting the x0 coordinates from the prox, ADMM by keeping x0 in the
//! smooth block of the consensus solve.
//!
//! Weights follow the objective literally: W sits inside the norm and the
//! norm is raised to p, so each sample is weighted by w_i^p. This is w_i^2
//! for p = 2, intentionally different from the quadratic solver's w_i.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{cholesky_pinned, dot, norm_inf_vec, Mat};
use crate::rng::SplitMix64;

#[derive(Debug, Clone)]
pub struct L1Config {
    pub eta: f64,
    /// Loss exponent, 1 or 2.
    pub p: u8,
    pub weights: Vec<f64>,
    pub estimate_x0: bool,
    pub max_iter: usize,
    /// Convergence target: KKT residual for p = 2, the absolute part of the
    /// primal/dual thresholds for p = 1.
    pub tol_abs: f64,
    /// Relative part of the ADMM stopping thresholds.
    pub tol_rel: f64,
    /// Initial ADMM penalty; adapted online by residual balancing.
    pub rho: f64,
}

impl L1Config {
    pub fn new(eta: f64, p: u8, n: usize) -> Self {
        L1Config {
            eta,
            p,
            weights: vec![1.0; n],
            estimate_x0: false,
            max_iter: 50_000,
            tol_abs: 1e-6,
            tol_rel: 1e-4,
            rho: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverReport {
    pub iterations: usize,
    pub objective_history: Vec<f64>,
    /// Optimality certificate at termination. For the FISTA path this is the
    /// subgradient KKT residual; for ADMM it is the maximum violation of the
    /// consensus KKT conditions assembled from the scaled duals.
    pub kkt_residual: f64,
    pub converged: bool,
    pub solver_name: &'static str,
}

#[inline]
fn sgn0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[inline]
fn soft1(v: f64, kappa: f64) -> f64 {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

/// Elementwise sign(v_i) * max(|v_i| - kappa, 0), the proximal operator of
/// kappa * ||.||_1. Entries inside the dead zone come out as exact zeros.
pub fn soft_threshold(v: &[f64], kappa: f64) -> Vec<f64> {
    assert!(kappa >= 0.0, "soft threshold needs kappa >= 0");
    v.iter().map(|&x| soft1(x, kappa)).collect()
}

fn l1_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| libm::fabs(*x)).sum()
}

fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}

/// Residual G theta + H x0 - y.
fn data_residual(
    theta: &[f64],
    x0: Option<&[f64]>,
    g: &Mat,
    h: Option<&Mat>,
    y: &[f64],
) -> Vec<f64> {
    let mut r = g.matvec(theta);
    if let (Some(hm), Some(x)) = (h, x0) {
        let hx = hm.matvec(x);
        for (ri, hi) in r.iter_mut().zip(&hx) {
            *ri += hi;
        }
    }
    for (ri, yi) in r.iter_mut().zip(y) {
        *ri -= yi;
    }
    r
}

/// eta ||theta||_1 + ||W (G theta + H x0 - y)||_p^p.
pub fn objective(
    theta: &[f64],
    x0: Option<&[f64]>,
    g: &Mat,
    h: Option<&Mat>,
    weights: &[f64],
    y: &[f64],
    eta: f64,
    p: u8,
) -> f64 {
    assert!(p == 1 || p == 2, "loss exponent must be 1 or 2");
    let r = data_residual(theta, x0, g, h, y);
    let loss: f64 = match p {
        1 => r.iter().zip(weights).map(|(ri, wi)| libm::fabs(wi * ri)).sum(),
        _ => r.iter().zip(weights).map(|(ri, wi)| {
            let v = wi * ri;
            v * v
        }).sum(),
    };
    eta * l1_norm(theta) + loss
}

/// Distance of the optimality condition from satisfaction at (theta, x0).
///
/// For p = 2 this is exact: the loss is smooth, so the residual is the
/// distance of the negative gradient from eta times the l1 subdifferential,
/// plus the plain gradient norm in the x0 block.
///
/// For p = 1 the loss itself is nonsmooth and the true residual would be a
/// minimization over subgradient selections; this function fixes the
/// canonical selection sign(residual) and therefore reports a conservative
/// upper bound. Solvers certify p = 1 solutions through their own dual
/// variables instead (see `SolverReport::kkt_residual`).
pub fn kkt_residual(
    theta: &[f64],
    x0: Option<&[f64]>,
    g: &Mat,
    h: Option<&Mat>,
    weights: &[f64],
    y: &[f64],
    eta: f64,
    p: u8,
) -> f64 {
    assert!(p == 1 || p == 2, "loss exponent must be 1 or 2");
    let r = data_residual(theta, x0, g, h, y);
    let (gtheta, gx0) = match p {
        2 => {
            let wr: Vec<f64> = r
                .iter()
                .zip(weights)
                .map(|(ri, wi)| 2.0 * (wi * wi) * ri)
                .collect();
            let gt = g.matvec_transposed(&wr);
            let gx = h.map(|hm| hm.matvec_transposed(&wr));
            (gt, gx)
        }
        _ => {
            let ws: Vec<f64> = r.iter().zip(weights).map(|(ri, wi)| wi * sgn0(*ri)).collect();
            let gt = g.matvec_transposed(&ws);
            let gx = h.map(|hm| hm.matvec_transposed(&ws));
            (gt, gx)
        }
    };
    let mut worst = 0.0f64;
    for (ti, gi) in theta.iter().zip(&gtheta) {
        let d = if *ti != 0.0 {
            libm::fabs(gi + eta * sgn0(*ti))
        } else {
            (libm::fabs(*gi) - eta).max(0.0)
        };
        worst = worst.max(d);
    }
    if x0.is_some() {
        if let Some(gx) = gx0 {
            worst = worst.max(norm_inf_vec(&gx));
        }
    }
    worst
}

fn validate_problem(
    g: &Mat,
    h: Option<&Mat>,
    weights: &[f64],
    y: &[f64],
    eta: f64,
    cfg: &L1Config,
) -> Result<()> {
    let n = y.len();
    if !g.is_square() || g.rows() != n {
        return Err(Error::DimensionMismatch {
            what: "gram matrix",
            expected: n,
            got: g.rows(),
        });
    }
    if weights.len() != n {
        return Err(Error::DimensionMismatch {
            what: "weights",
            expected: n,
            got: weights.len(),
        });
    }
    if let Some(hm) = h {
        if hm.rows() != n {
            return Err(Error::DimensionMismatch {
                what: "initial-state matrix rows",
                expected: n,
                got: hm.rows(),
            });
        }
        if hm.cols() == 0 {
            return Err(Error::InvalidParameter {
                what: "initial-state matrix must have at least one column",
            });
        }
        if !hm.is_finite() {
            return Err(Error::NonFiniteInput {
                what: "initial-state matrix",
            });
        }
    }
    if !g.is_finite() {
        return Err(Error::NonFiniteInput { what: "gram matrix" });
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput { what: "observations" });
    }
    for &w in weights {
        if !(w > 0.0) || !w.is_finite() {
            return Err(Error::NonPositiveWeight { value: w });
        }
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter {
            what: "eta must be positive and finite",
        });
    }
    if cfg.max_iter == 0 {
        return Err(Error::InvalidParameter {
            what: "max_iter must be positive",
        });
    }
    if !(cfg.tol_abs > 0.0) || !(cfg.tol_rel > 0.0) || !(cfg.rho > 0.0) {
        return Err(Error::InvalidParameter {
            what: "tolerances and rho must be positive",
        });
    }
    Ok(())
}

/// Largest singular value of W [G H] by power iteration on the normal
/// operator, deterministic start, relative tolerance 1e-8, cap 10^4 rounds.
fn sigma_max(g: &Mat, h: Option<&Mat>, weights: &[f64]) -> Result<f64> {
    let n = g.rows();
    let k = h.map_or(0, Mat::cols);
    let dim = n + k;
    let gt = g.transpose();
    let ht = h.map(Mat::transpose);
    let mut rng = SplitMix64::new(0x00C0_FFEE);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.uniform_symmetric()).collect();
    let nv = norm2(&v);
    for vi in &mut v {
        *vi /= nv;
    }
    let mut prev = 0.0f64;
    for _ in 0..10_000 {
        // u = W (G v_theta + H v_x)
        let mut u = g.matvec(&v[..n]);
        if let Some(hm) = h {
            let hx = hm.matvec(&v[n..]);
            for (ui, hi) in u.iter_mut().zip(&hx) {
                *ui += hi;
            }
        }
        for (ui, wi) in u.iter_mut().zip(weights) {
            *ui *= wi;
        }
        let sigma = norm2(&u);
        if sigma == 0.0 {
            return Ok(0.0);
        }
        // z = [G' W u; H' W u]
        let wu: Vec<f64> = u.iter().zip(weights).map(|(ui, wi)| ui * wi).collect();
        let mut z = gt.matvec(&wu);
        if let Some(hm) = &ht {
            z.extend_from_slice(&hm.matvec(&wu));
        }
        let nz = norm2(&z);
        if nz == 0.0 {
            return Ok(sigma);
        }
        for zi in &mut z {
            *zi /= nz;
        }
        v = z;
        if libm::fabs(sigma - prev) <= 1e-8 * sigma {
            return Ok(sigma);
        }
        prev = sigma;
    }
    Err(Error::StepSizeFailure)
}

struct StackedProblem<'a> {
    g: &'a Mat,
    h: Option<&'a Mat>,
    y: &'a [f64],
    n: usize,
    k: usize,
}

impl<'a> StackedProblem<'a> {
    fn residual(&self, phi: &[f64]) -> Vec<f64> {
        let x0 = if self.k > 0 { Some(&phi[self.n..]) } else { None };
        data_residual(&phi[..self.n], x0, self.g, self.h, self.y)
    }
}

/// Monotone FISTA for the p = 2 objective over the stacked variable
/// (theta, x0); the prox leaves the x0 coordinates untouched.
fn mfista_solve(
    g: &Mat,
    h: Option<&Mat>,
    weights: &[f64],
    y: &[f64],
    eta: f64,
    cfg: &L1Config,
    warm: Option<&[f64]>,
) -> Result<(Vec<f64>, Option<Vec<f64>>, SolverReport)> {
    validate_problem(g, h, weights, y, eta, cfg)?;
    let n = y.len();
    let k = h.map_or(0, Mat::cols);
    let dim = n + k;
    let prob = StackedProblem { g, h, y, n, k };

    let sigma = sigma_max(g, h, weights)?;
    let mut lip = (2.0 * sigma * sigma * (1.0 + 1e-6)).max(1e-300);

    let w2: Vec<f64> = weights.iter().map(|w| w * w).collect();
    let loss = |r: &[f64]| -> f64 { r.iter().zip(&w2).map(|(ri, w2i)| w2i * ri * ri).sum() };
    let value = |phi: &[f64], r: &[f64]| -> f64 { eta * l1_norm(&phi[..n]) + loss(r) };

    // transposes are formed once so every gradient runs as a row-contiguous
    // matvec instead of a scatter over columns
    let gt = g.transpose();
    let ht = h.map(Mat::transpose);

    // gradient of the smooth part in the stacked space
    let grad_at = |r: &[f64]| -> Vec<f64> {
        let wr: Vec<f64> = r.iter().zip(&w2).map(|(ri, w2i)| 2.0 * w2i * ri).collect();
        let mut gr = gt.matvec(&wr);
        if let Some(hm) = &ht {
            gr.extend_from_slice(&hm.matvec(&wr));
        }
        gr
    };
    let kkt_of = |phi: &[f64], r: &[f64]| -> f64 {
        let gr = grad_at(r);
        let mut worst = 0.0f64;
        for i in 0..n {
            let d = if phi[i] != 0.0 {
                libm::fabs(gr[i] + eta * sgn0(phi[i]))
            } else {
                (libm::fabs(gr[i]) - eta).max(0.0)
            };
            worst = worst.max(d);
        }
        for gi in gr.iter().skip(n) {
            worst = worst.max(libm::fabs(*gi));
        }
        worst
    };

    let mut x = match warm {
        Some(start) => {
            debug_assert_eq!(start.len(), dim);
            start.to_vec()
        }
        None => vec![0.0; dim],
    };
    let mut rx = prob.residual(&x);
    let mut fx = value(&x, &rx);
    let mut yv = x.clone();
    let mut ry = rx.clone();
    let mut t = 1.0f64;
    let mut z_prev = x.clone();

    let mut history = Vec::with_capacity(cfg.max_iter.min(65_536) + 1);
    history.push(fx);
    let mut converged = false;
    let mut iterations = 0;
    let check_every = if dim <= 128 { 1 } else { 10 };
    #[cfg(test)]
    let mut dbg_restarts = 0usize;
    #[cfg(test)]
    let mut dbg_doublings = 0usize;

    for it in 1..=cfg.max_iter {
        iterations = it;
        let step = 1.0 / lip;
        let gr = grad_at(&ry);
        let mut z = Vec::with_capacity(dim);
        for i in 0..dim {
            let cand = yv[i] - step * gr[i];
            z.push(if i < n { soft1(cand, step * eta) } else { cand });
        }
        let rz = prob.residual(&z);
        let fz = value(&z, &rz);

        // a non-accelerated step that clearly ascends means the Lipschitz
        // estimate is low: double it and retry. the margin keeps rounding
        // jitter near the objective floor from triggering the branch; a
        // genuinely short step diverges geometrically and clears any
        // margin within a few iterations
        let plain_step = t == 1.0;
        if plain_step && fz > fx + 1e-9 * (1.0 + libm::fabs(fx)) {
            lip *= 2.0;
            history.push(fx);
            #[cfg(test)]
            {
                dbg_doublings += 1;
            }
            continue;
        }

        // adaptive restart: momentum has swung past the valley when the
        // latest prox displacement points against the step direction
        let mut overshoot = 0.0;
        for i in 0..dim {
            overshoot += (yv[i] - z[i]) * (z[i] - z_prev[i]);
        }

        let t_next = 0.5 * (1.0 + libm::sqrt(1.0 + 4.0 * t * t));
        let (x_prev, rx_prev);
        if fz <= fx {
            x_prev = core::mem::replace(&mut x, z.clone());
            rx_prev = core::mem::replace(&mut rx, rz.clone());
            fx = fz;
        } else {
            // keep the anchor; the momentum recursion still advances
            // through z so acceleration is not lost on a bad step
            x_prev = x.clone();
            rx_prev = rx.clone();
        }
        history.push(fx);

        if overshoot > 0.0 {
            t = 1.0;
            yv = x.clone();
            ry = rx.clone();
            #[cfg(test)]
            {
                dbg_restarts += 1;
            }
        } else {
            let a = t / t_next;
            let b = (t - 1.0) / t_next;
            let mut y_next = Vec::with_capacity(dim);
            let mut ry_next = Vec::with_capacity(n);
            for i in 0..dim {
                y_next.push(x[i] + a * (z[i] - x[i]) + b * (x[i] - x_prev[i]));
            }
            for i in 0..n {
                ry_next.push(rx[i] + a * (rz[i] - rx[i]) + b * (rx[i] - rx_prev[i]));
            }
            t = t_next;
            yv = y_next;
            ry = ry_next;
        }
        z_prev = z;

        #[cfg(test)]
        if it % 200_000 == 0 {
            let x0_part = if k > 0 { Some(&x[n..]) } else { None };
            let fresh = kkt_residual(&x[..n], x0_part, g, h, weights, y, eta, 2);
            let cnt = x[..n].iter().filter(|v| libm::fabs(**v) > 1e-3).count();
            std::eprintln!(
                "it {} lip {:e} kkt {:e} obj {} count {} restarts {} doublings {}",
                it, lip, fresh, fx, cnt, dbg_restarts, dbg_doublings
            );
            dbg_restarts = 0;
        }

        if it % check_every == 0 || it == cfg.max_iter {
            // the running residual is maintained by affine recombination and
            // carries a little drift; confirm candidate termination with the
            // same from-scratch certificate that lands in the report
            if kkt_of(&x, &rx) <= cfg.tol_abs {
                let x0_part = if k > 0 { Some(&x[n..]) } else { None };
                let fresh = kkt_residual(&x[..n], x0_part, g, h, weights, y, eta, 2);
                if fresh <= cfg.tol_abs {
                    converged = true;
                    break;
                }
                rx = prob.residual(&x);
            }
        }
    }

    // recompute the certificate from scratch at the returned point
    let theta = x[..n].to_vec();
    let x0 = if k > 0 { Some(x[n..].to_vec()) } else { None };
    let kkt = kkt_residual(
        &theta,
        x0.as_deref(),
        g,
        h,
        weights,
        y,
        eta,
        2,
    );
    Ok((
        theta,
        x0,
        SolverReport {
            iterations,
            objective_history: history,
            kkt_residual: kkt,
            converged,
            solver_name: "mfista",
        },
    ))
}

/// Relaxation factor for the consensus updates. Values in (1, 2) are a
/// standard accelerant; 1.6 is a common conservative pick.
const OVER_RELAXATION: f64 = 1.6;

/// Iterations between penalty rebalancing checks.
const RHO_ADAPT_PERIOD: usize = 100;

/// ADMM for the p = 1 objective over the stacked variable (theta, x0).
fn admm_solve(
    g: &Mat,
    h: Option<&Mat>,
    weights: &[f64],
    y: &[f64],
    eta: f64,
    cfg: &L1Config,
) -> Result<(Vec<f64>, Option<Vec<f64>>, SolverReport)> {
    validate_problem(g, h, weights, y, eta, cfg)?;
    let n = y.len();
    let k = h.map_or(0, Mat::cols);
    let dim = n + k;

    // row-scaled blocks WG, WH and the data vector Wy
    let scale_rows = |m: &Mat| -> Mat {
        let mut out = m.clone();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.set(i, j, weights[i] * m.get(i, j));
            }
        }
        out
    };
    let wg = scale_rows(g);
    let wh = h.map(|hm| scale_rows(hm));
    let wgt = wg.transpose();
    let wht = wh.as_ref().map(Mat::transpose);
    let wy: Vec<f64> = y.iter().zip(weights).map(|(yi, wi)| yi * wi).collect();

    // P = [[I + (WG)'(WG), (WG)'(WH)], [(WH)'(WG), (WH)'(WH)]]
    // independent of rho, so the factorization is computed exactly once
    let mut p = Mat::zeros(dim, dim);
    let gtg = wg.transpose().matmul(&wg);
    for i in 0..n {
        for j in 0..n {
            p.set(i, j, gtg.get(i, j));
        }
        p.set(i, i, p.get(i, i) + 1.0);
    }
    if let Some(whm) = &wh {
        let gth = wg.transpose().matmul(whm);
        let hth = whm.transpose().matmul(whm);
        for i in 0..n {
            for j in 0..k {
                p.set(i, n + j, gth.get(i, j));
                p.set(n + j, i, gth.get(i, j));
            }
        }
        for i in 0..k {
            for j in 0..k {
                p.set(n + i, n + j, hth.get(i, j));
            }
        }
    }
    let mut max_diag = 0.0f64;
    for i in 0..dim {
        max_diag = max_diag.max(p.get(i, i));
    }
    // pivots at this level are noise: pin them (covers H = 0 and other
    // unidentifiable x0 blocks; theta diagonals are >= 1 and never pin)
    let factor = cholesky_pinned(&p, 1e-12 * max_diag.max(1.0));

    let mut rho = cfg.rho;
    let mut phi = vec![0.0; dim];
    let mut z1 = vec![0.0; n];
    let mut z2: Vec<f64> = wy.iter().map(|v| -v).collect();
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];

    let mut history = Vec::with_capacity(cfg.max_iter.min(65_536));
    let mut best_phi = phi.clone();
    let mut best_obj = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut q = vec![0.0; n];

    for it in 1..=cfg.max_iter {
        iterations = it;

        // phi-update: (F'F) phi = F1'(z1 - u1) + F2'(Wy + z2 - u2)
        let v2: Vec<f64> = (0..n).map(|i| wy[i] + z2[i] - u2[i]).collect();
        let gv = wgt.matvec(&v2);
        let mut rhs = Vec::with_capacity(dim);
        for i in 0..n {
            rhs.push(z1[i] - u1[i] + gv[i]);
        }
        if let Some(whtm) = &wht {
            rhs.extend_from_slice(&whtm.matvec(&v2));
        }
        phi = factor.solve(&rhs);

        // q = WG theta + WH x0 - Wy
        q = wg.matvec(&phi[..n]);
        if let Some(whm) = &wh {
            let hx = whm.matvec(&phi[n..]);
            for (qi, hi) in q.iter_mut().zip(&hx) {
                *qi += hi;
            }
        }
        for (qi, wyi) in q.iter_mut().zip(&wy) {
            *qi -= wyi;
        }

        // over-relaxed images of the constraint maps; the dual updates use
        // the same relaxed points, so rho*u stays an exact subgradient
        let hat1: Vec<f64> = (0..n)
            .map(|i| OVER_RELAXATION * phi[i] + (1.0 - OVER_RELAXATION) * z1[i])
            .collect();
        let hat2: Vec<f64> = (0..n)
            .map(|i| OVER_RELAXATION * q[i] + (1.0 - OVER_RELAXATION) * z2[i])
            .collect();
        let z1_old = core::mem::take(&mut z1);
        let z2_old = core::mem::take(&mut z2);
        z1 = (0..n).map(|i| soft1(hat1[i] + u1[i], eta / rho)).collect();
        z2 = (0..n).map(|i| soft1(hat2[i] + u2[i], 1.0 / rho)).collect();
        for i in 0..n {
            u1[i] += hat1[i] - z1[i];
            u2[i] += hat2[i] - z2[i];
        }

        // objective of the feasible candidate theta (and x0)
        let obj = eta * l1_norm(&phi[..n]) + l1_norm(&q);
        history.push(obj);
        if obj < best_obj {
            best_obj = obj;
            best_phi = phi.clone();
        }

        // stopping: Boyd-style primal/dual residuals
        let r1: Vec<f64> = (0..n).map(|i| phi[i] - z1[i]).collect();
        let r2: Vec<f64> = (0..n).map(|i| q[i] - z2[i]).collect();
        let r_pri = libm::sqrt(dot(&r1, &r1) + dot(&r2, &r2));

        let dz2: Vec<f64> = (0..n).map(|i| z2[i] - z2_old[i]).collect();
        let gdz = wgt.matvec(&dz2);
        let mut s_sq = 0.0;
        for i in 0..n {
            let v = (z1[i] - z1_old[i]) + gdz[i];
            s_sq += v * v;
        }
        if let Some(whtm) = &wht {
            let hdz = whtm.matvec(&dz2);
            s_sq += dot(&hdz, &hdz);
        }
        let s_dual = rho * libm::sqrt(s_sq);

        let fphi = libm::sqrt({
            let qs: f64 = q.iter().zip(&wy).map(|(qi, wyi)| {
                let v = qi + wyi;
                v * v
            }).sum();
            dot(&phi[..n], &phi[..n]) + qs
        });
        let zn = libm::sqrt(dot(&z1, &z1) + dot(&z2, &z2));
        let cn = norm2(&wy);
        let eps_pri = libm::sqrt(2.0 * n as f64) * cfg.tol_abs
            + cfg.tol_rel * fphi.max(zn).max(cn);

        let gu = wgt.matvec(&u2);
        let mut d_sq = 0.0;
        for i in 0..n {
            let v = u1[i] + gu[i];
            d_sq += v * v;
        }
        if let Some(whtm) = &wht {
            let hu = whtm.matvec(&u2);
            d_sq += dot(&hu, &hu);
        }
        let eps_dual = libm::sqrt(dim as f64) * cfg.tol_abs + cfg.tol_rel * rho * libm::sqrt(d_sq);

        if r_pri <= eps_pri && s_dual <= eps_dual {
            converged = true;
            break;
        }

        // residual balancing keeps the two residuals within an order of
        // magnitude; u is rescaled so rho * u stays the same dual variable.
        // the update runs on a fixed period: between changes the iteration
        // is a plain fixed-rho ADMM and keeps its contraction property,
        // while adapting every iteration can trap the pair (rho, u) in a
        // cycle that never lets the residuals settle
        if it % RHO_ADAPT_PERIOD == 0 {
            if r_pri > 10.0 * s_dual && rho < 1e6 {
                rho *= 2.0;
                for v in u1.iter_mut().chain(u2.iter_mut()) {
                    *v *= 0.5;
                }
            } else if s_dual > 10.0 * r_pri && rho > 1e-6 {
                rho *= 0.5;
                for v in u1.iter_mut().chain(u2.iter_mut()) {
                    *v *= 2.0;
                }
            }
        }
    }

    // certificate from the final duals: lambda1 = rho u1 lies in
    // eta d||z1||_1 and lambda2 = rho u2 in d||z2||_1 exactly, so the gaps
    // are the consensus distances and the stationarity defects
    let gu = wgt.matvec(&u2);
    let mut stat = 0.0f64;
    for i in 0..n {
        stat = stat.max(libm::fabs(u1[i] + gu[i]));
    }
    let mut kkt = norm_inf_vec(&(0..n).map(|i| phi[i] - z1[i]).collect::<Vec<_>>())
        .max(norm_inf_vec(&(0..n).map(|i| q[i] - z2[i]).collect::<Vec<_>>()))
        .max(rho * stat);
    if let Some(whtm) = &wht {
        let hu = whtm.matvec(&u2);
        kkt = kkt.max(rho * norm_inf_vec(&hu));
    }

    let chosen = if converged { phi } else { best_phi };
    let theta = chosen[..n].to_vec();
    let x0 = if k > 0 { Some(chosen[n..].to_vec()) } else { None };
    Ok((
        theta,
        x0,
        SolverReport {
            iterations,
            objective_history: history,
            kkt_residual: kkt,
            converged,
            solver_name: "admm",
        },
    ))
}

/// p = 2: eta ||theta||_1 + ||W (G theta - y)||_2^2 by monotone FISTA.
/// `eta` and `weights` come from the arguments; `cfg` supplies iteration and
/// tolerance tuning only.
pub fn solve_l1_p2(
    g: &Mat,
    weights: &[f64],
    y: &[f64],
    eta: f64,
    cfg: &L1Config,
) -> Result<(Vec<f64>, SolverReport)> {
    let (theta, _, report) = mfista_solve(g, None, weights, y, eta, cfg, None)?;
    Ok((theta, report))
}

/// p = 1: eta ||theta||_1 + ||W (G theta - y)||_1 by ADMM. On hitting the
/// iteration cap the best iterate seen is returned with converged = false.
pub fn solve_l1_p1(
    g: &Mat,
    weights: &[f64],
    y: &[f64],
    eta: f64,
    cfg: &L1Config,
) -> Result<(Vec<f64>, SolverReport)> {
    let (theta, _, report) = admm_solve(g, None, weights, y, eta, cfg)?;
    Ok((theta, report))
}

/// Joint minimization over (x0, theta) with x0 free (not penalized).
pub fn solve_with_initial_state(
    g: &Mat,
    h: &Mat,
    weights: &[f64],
    y: &[f64],
    eta: f64,
    p: u8,
    cfg: &L1Config,
) -> Result<(Vec<f64>, Vec<f64>, SolverReport)> {
    if p != 1 && p != 2 {
        return Err(Error::InvalidParameter {
            what: "loss exponent p must be 1 or 2",
        });
    }
    let (theta, x0, report) = if p == 2 {
        mfista_solve(g, Some(h), weights, y, eta, cfg, None)?
    } else {
        admm_solve(g, Some(h), weights, y, eta, cfg)?
    };
    Ok((x0.expect("x0 present when H given"), theta, report))
}
