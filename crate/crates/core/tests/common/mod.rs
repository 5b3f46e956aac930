// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! Shared helpers for the integration suites: random stable test systems and
//! brute-force reference solutions that the production code is checked
//! against. Everything here favors obviousness over speed, and none of it
//! calls into the solver paths it is used to judge.

#![allow(dead_code)]

use ctspline_core::rng::SplitMix64;
use ctspline_core::{make_state_space, CurveEvaluator, Mat, SplineFit, StateSpace};

/// Multiply two polynomials given as coefficient slices, highest power first.
fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Random asymptotically stable single-input single-output system with
/// dimension in 1..=max_dim, in controllable companion form. Poles get real
/// part in [-2, -0.3]; complex pairs get imaginary part in [0.3, 2]. The
/// readout vector is redrawn whenever the realization happens to be
/// unobservable.
pub fn random_stable_system(rng: &mut SplitMix64, max_dim: usize) -> StateSpace {
    loop {
        let n = 1 + (rng.next_u64() % max_dim as u64) as usize;
        let mut poly = vec![1.0];
        let mut remaining = n;
        while remaining > 0 {
            if remaining >= 2 && rng.uniform_open() < 0.5 {
                let re = -rng.uniform_in(0.3, 2.0);
                let im = rng.uniform_in(0.3, 2.0);
                poly = poly_mul(&poly, &[1.0, -2.0 * re, re * re + im * im]);
                remaining -= 2;
            } else {
                let p = -rng.uniform_in(0.3, 2.0);
                poly = poly_mul(&poly, &[1.0, -p]);
                remaining -= 1;
            }
        }
        let mut a = Mat::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a.set(i, i + 1, 1.0);
        }
        for j in 0..n {
            a.set(n - 1, j, -poly[n - j]);
        }
        let mut b = vec![0.0; n];
        b[n - 1] = 1.0;
        let c: Vec<f64> = (0..n)
            .map(|_| {
                let sign = if rng.uniform_open() < 0.5 { -1.0 } else { 1.0 };
                sign * rng.uniform_in(0.2, 1.5)
            })
            .collect();
        if let Ok(sys) = make_state_space(a, b, c) {
            return sys;
        }
    }
}

/// Strictly increasing positive sample times with gaps in [0.05, 0.6].
pub fn random_times(rng: &mut SplitMix64, count: usize) -> Vec<f64> {
    let mut t = 0.0;
    (0..count)
        .map(|_| {
            t += rng.uniform_in(0.05, 0.6);
            t
        })
        .collect()
}

/// eta ||theta||_1 + sum_i |w_i ((G theta)_i - y_i)|, written out directly
/// so oracle objective values never depend on solver code.
pub fn l1_objective(g: &Mat, weights: &[f64], y: &[f64], eta: f64, theta: &[f64]) -> f64 {
    let mut obj = eta * theta.iter().map(|v| v.abs()).sum::<f64>();
    for i in 0..y.len() {
        let mut r = -y[i];
        for (j, tj) in theta.iter().enumerate() {
            r += g.get(i, j) * tj;
        }
        obj += (weights[i] * r).abs();
    }
    obj
}

/// Brute-force minimum of the one-point problem eta |t| + |w (g t - y)|:
/// a dense scan over a bracket that contains both kinks, then the exact
/// kink locations as polish candidates. Returns (argmin, min).
pub fn scalar_p1_oracle(g: f64, w: f64, y: f64, eta: f64) -> (f64, f64) {
    let gm = Mat::from_rows(&[vec![g]]).unwrap();
    let obj = |t: f64| l1_objective(&gm, &[w], &[y], eta, &[t]);
    let lo = (y / g).min(0.0) - 1.0;
    let hi = (y / g).max(0.0) + 1.0;
    let steps = 200_000usize;
    let mut best_t = lo;
    let mut best = f64::INFINITY;
    for k in 0..=steps {
        let t = lo + (hi - lo) * (k as f64) / (steps as f64);
        let v = obj(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    for t in [0.0, y / g] {
        let v = obj(t);
        if v < best {
            best = v;
            best_t = t;
        }
    }
    (best_t, best)
}

/// 3x3 Gaussian elimination with partial pivoting, used only to enumerate
/// kink intersections. Returns None for (near-)singular systems.
fn solve3(m: &Mat, rhs: &[f64; 3]) -> Option<[f64; 3]> {
    let mut a = [[0.0f64; 4]; 3];
    let mut scale = 0.0f64;
    for r in 0..3 {
        for c in 0..3 {
            a[r][c] = m.get(r, c);
            scale = scale.max(a[r][c].abs());
        }
        a[r][3] = rhs[r];
    }
    if scale == 0.0 {
        return None;
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()
        })?;
        if a[piv][col].abs() < 1e-10 * scale {
            return None;
        }
        a.swap(col, piv);
        for r in (col + 1)..3 {
            let f = a[r][col] / a[col][col];
            for c in col..4 {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    let mut x = [0.0f64; 3];
    for r in (0..3).rev() {
        let mut s = a[r][3];
        for c in (r + 1)..3 {
            s -= a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Some(x)
}

/// Exhaustive reference for the 3-point p = 1 problem. The objective is
/// convex piecewise linear and coercive, so some minimizer sits where three
/// independent kink hyperplanes meet; the kinks are {theta_k = 0} and
/// {(G theta - y)_i = 0}. All C(6,3) = 20 triples are solved and the best
/// candidate wins. Returns (argmin, min).
pub fn n3_p1_oracle(g: &Mat, weights: &[f64], y: &[f64], eta: f64) -> (Vec<f64>, f64) {
    assert_eq!(g.rows(), 3);
    assert_eq!(g.cols(), 3);
    let mut best_theta = vec![0.0; 3];
    let mut best = l1_objective(g, weights, y, eta, &best_theta);
    for a in 0..6usize {
        for b in (a + 1)..6 {
            for c in (b + 1)..6 {
                let mut m = Mat::zeros(3, 3);
                let mut rhs = [0.0f64; 3];
                for (r, &which) in [a, b, c].iter().enumerate() {
                    if which < 3 {
                        m.set(r, which, 1.0);
                    } else {
                        let i = which - 3;
                        for j in 0..3 {
                            m.set(r, j, g.get(i, j));
                        }
                        rhs[r] = y[i];
                    }
                }
                if let Some(theta) = solve3(&m, &rhs) {
                    let v = l1_objective(g, weights, y, eta, &theta);
                    if v < best {
                        best = v;
                        best_theta = theta.to_vec();
                    }
                }
            }
        }
    }
    (best_theta, best)
}

/// Classical fixed-step fourth-order Runge-Kutta integration of
/// xdot = A x + b u(t), y = c' x, reporting y at every grid point. The
/// control is read through the public evaluator; `substeps` steps are taken
/// between consecutive grid points, and the state is never extrapolated
/// past the final grid time.
pub fn integrate_ode(fit: &SplineFit, grid: &[f64], substeps: usize) -> Vec<f64> {
    assert!(substeps > 0);
    let eval = CurveEvaluator::new(fit).unwrap();
    let sys = &fit.system;
    let n = sys.dim();
    let horizon = fit.horizon();
    let a = sys.a();
    let u_at = |t: f64| eval.control(t.clamp(0.0, horizon)).unwrap();
    let deriv = |xs: &[f64], t: f64| -> Vec<f64> {
        let u = u_at(t);
        let mut dx = a.matvec(xs);
        for (di, bi) in dx.iter_mut().zip(sys.b()) {
            *di += bi * u;
        }
        dx
    };
    let mut x: Vec<f64> = fit.x0.clone().unwrap_or_else(|| vec![0.0; n]);
    let mut t_now = 0.0f64;
    let mut out = Vec::with_capacity(grid.len());
    for &tg in grid {
        assert!(tg + 1e-12 >= t_now, "grid must be non-decreasing");
        if tg > t_now {
            let h = (tg - t_now) / substeps as f64;
            for s in 0..substeps {
                let t0 = t_now + s as f64 * h;
                let k1 = deriv(&x, t0);
                let mid1: Vec<f64> =
                    x.iter().zip(&k1).map(|(xi, ki)| xi + 0.5 * h * ki).collect();
                let k2 = deriv(&mid1, t0 + 0.5 * h);
                let mid2: Vec<f64> =
                    x.iter().zip(&k2).map(|(xi, ki)| xi + 0.5 * h * ki).collect();
                let k3 = deriv(&mid2, t0 + 0.5 * h);
                let end: Vec<f64> = x.iter().zip(&k3).map(|(xi, ki)| xi + h * ki).collect();
                let k4 = deriv(&end, t0 + h);
                for i in 0..n {
                    x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            t_now = tg;
        }
        let yt: f64 = sys.c().iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
        out.push(yt);
    }
    out
}

/// Root-mean-square and maximum absolute difference of two equal-length
/// sequences.
pub fn rmse_and_max(a: &[f64], b: &[f64]) -> (f64, f64) {
    assert_eq!(a.len(), b.len());
    assert!(!a.is_empty());
    let mut sq = 0.0f64;
    let mut mx = 0.0f64;
    for (ai, bi) in a.iter().zip(b) {
        let d = ai - bi;
        sq += d * d;
        mx = mx.max(d.abs());
    }
    ((sq / a.len() as f64).sqrt(), mx)
}
