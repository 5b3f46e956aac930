// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! The linear system that generates the spline basis.
//!
//! A spline here is the output of x' = Ax + bu, y = c'x. Everything the rest
//! of the crate does reduces to evaluating the impulse response
//! g(tau) = c' exp(A tau) b on [0, T] and inner products of its shifts.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::{lu_factor, singular_values, Mat};

/// A validated, immutable state-space triple (A, b, c).
///
/// Construction enforces controllability of (A, b) and observability of
/// (c, A); both are required for the Gram matrix of the shifted impulse
/// responses to be positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: Mat,
    b: Vec<f64>,
    c: Vec<f64>,
    n: usize,
}

impl StateSpace {
    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Validates dimensions, finiteness, controllability, and observability.
pub fn make_state_space(a: Mat, b: Vec<f64>, c: Vec<f64>) -> Result<StateSpace> {
    let n = a.rows();
    if !a.is_square() || n == 0 {
        return Err(Error::DimensionMismatch {
            what: "state matrix A",
            expected: n.max(1),
            got: a.cols(),
        });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            what: "input vector b",
            expected: n,
            got: b.len(),
        });
    }
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            what: "output vector c",
            expected: n,
            got: c.len(),
        });
    }
    if !a.is_finite() {
        return Err(Error::NonFiniteInput { what: "state matrix A" });
    }
    if !b.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput { what: "input vector b" });
    }
    if !c.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteInput { what: "output vector c" });
    }

    let ctrl_rank = krylov_rank(&a, &b);
    if ctrl_rank < n {
        return Err(Error::NotControllable { rank: ctrl_rank, dim: n });
    }
    let obs_rank = krylov_rank(&a.transpose(), &c);
    if obs_rank < n {
        return Err(Error::NotObservable { rank: obs_rank, dim: n });
    }

    Ok(StateSpace { a, b, c, n })
}

/// Numerical rank of [v, Mv, ..., M^{n-1}v] with the usual singular-value
/// threshold sigma > n * eps * sigma_max.
fn krylov_rank(m: &Mat, v: &[f64]) -> usize {
    let n = m.rows();
    let mut k = Mat::zeros(n, n);
    let mut col = v.to_vec();
    for j in 0..n {
        for i in 0..n {
            k.set(i, j, col[i]);
        }
        if j + 1 < n {
            col = m.matvec(&col);
        }
    }
    let sv = singular_values(&k);
    let smax = sv[0];
    if smax == 0.0 {
        return 0;
    }
    let thresh = n as f64 * f64::EPSILON * smax;
    sv.iter().filter(|s| **s > thresh).count()
}

// Degree-13 Pade numerator coefficients for exp, Higham's values.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// 1-norm bound under which the degree-13 approximant is full precision.
const PADE13_THETA: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant. Relative error is near machine precision for any input the
/// scaling step can bring under the theta bound.
pub fn matrix_exponential(m: &Mat) -> Result<Mat> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            what: "matrix exponential input",
            expected: m.rows(),
            got: m.cols(),
        });
    }
    if !m.is_finite() {
        return Err(Error::NonFiniteInput {
            what: "matrix exponential input",
        });
    }
    let n = m.rows();

    let mut norm = m.norm_one();
    let mut squarings = 0u32;
    while norm > PADE13_THETA {
        norm *= 0.5;
        squarings += 1;
    }
    let a = m.scaled(libm::exp2(-(squarings as f64)));

    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a2.matmul(&a4);
    let ident = Mat::identity(n);

    // U = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = a6
        .scaled(PADE13[13])
        .add(&a4.scaled(PADE13[11]))
        .add(&a2.scaled(PADE13[9]));
    let w = a6
        .matmul(&w1)
        .add(&a6.scaled(PADE13[7]))
        .add(&a4.scaled(PADE13[5]))
        .add(&a2.scaled(PADE13[3]))
        .add(&ident.scaled(PADE13[1]));
    let u = a.matmul(&w);

    // V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let z1 = a6
        .scaled(PADE13[12])
        .add(&a4.scaled(PADE13[10]))
        .add(&a2.scaled(PADE13[8]));
    let v = a6
        .matmul(&z1)
        .add(&a6.scaled(PADE13[6]))
        .add(&a4.scaled(PADE13[4]))
        .add(&a2.scaled(PADE13[2]))
        .add(&ident.scaled(PADE13[0]));

    // r = (V - U)^{-1} (V + U); the denominator is well conditioned by the
    // theta bound, so plain pivoted LU is enough
    let denom = v.sub(&u);
    let numer = v.add(&u);
    let lu = lu_factor(&denom)?;
    let mut r = lu.solve_mat(&numer);

    for _ in 0..squarings {
        r = r.matmul(&r);
    }
    Ok(r)
}

/// Impulse response g(tau) = c' exp(A tau) b for tau in [0, horizon], and
/// exactly zero outside that window (in particular for all negative tau).
pub fn impulse_response(sys: &StateSpace, tau: f64, horizon: f64) -> f64 {
    debug_assert!(horizon > 0.0, "horizon must be positive");
    if !(0.0..=horizon).contains(&tau) {
        return 0.0;
    }
    let e = matrix_exponential(&sys.a.scaled(tau)).expect("finite A stays finite");
    let eb = e.matvec(&sys.b);
    crate::matrix::dot(&sys.c, &eb)
}

pub mod presets {
    //! Built-in example systems.

    use super::*;

    /// Companion realization of the transfer function 1/(s^3 + 1).
    ///
    /// Poles at -1 and (1 +/- i sqrt(3))/2; the complex pair sits in the right
    /// half plane, which makes this a usefully hard smoothing basis: the
    /// impulse response grows along the horizon instead of decaying.
    pub fn cubic() -> StateSpace {
        let a = Mat::from_rows(&[
            vec![0.0, 0.0, -1.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        make_state_space(a, vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0])
            .expect("builtin system is controllable and observable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn mat2(a: f64, b: f64, c: f64, d: f64) -> Mat {
        Mat::from_rows(&[vec![a, b], vec![c, d]]).unwrap()
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = Mat::zeros(3, 3);
        let e = matrix_exponential(&z).unwrap();
        assert!(e.sub(&Mat::identity(3)).max_abs() == 0.0);
    }

    #[test]
    fn exp_of_nilpotent_terminates() {
        let m = mat2(0.0, 1.0, 0.0, 0.0);
        let e = matrix_exponential(&m).unwrap();
        let expect = mat2(1.0, 1.0, 0.0, 1.0);
        assert!(e.sub(&expect).max_abs() < 1e-15);
    }

    #[test]
    fn exp_of_diagonal() {
        let m = mat2(-1.0, 0.0, 0.0, 2.0);
        let e = matrix_exponential(&m).unwrap();
        assert!((e.get(0, 0) - libm::exp(-1.0)).abs() < 1e-15);
        assert!((e.get(1, 1) - libm::exp(2.0)).abs() < 1e-13);
        assert_eq!(e.get(0, 1), 0.0);
        assert_eq!(e.get(1, 0), 0.0);
    }

    #[test]
    fn exp_of_rotation_hits_trig_closed_form() {
        // also exercises the scaling path via the large angle
        for theta in [0.3, 1.3, 17.0] {
            let m = mat2(0.0, -theta, theta, 0.0);
            let e = matrix_exponential(&m).unwrap();
            let (s, c) = (libm::sin(theta), libm::cos(theta));
            assert!((e.get(0, 0) - c).abs() < 1e-12, "theta {theta}");
            assert!((e.get(0, 1) + s).abs() < 1e-12);
            assert!((e.get(1, 0) - s).abs() < 1e-12);
            assert!((e.get(1, 1) - c).abs() < 1e-12);
        }
    }

    #[test]
    fn exp_semigroup_and_inverse_properties() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..20 {
            let n = 3;
            let mut a = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a.set(i, j, rng.uniform_in(-2.0, 2.0));
                }
            }
            let s = rng.uniform_in(0.1, 1.5);
            let t = rng.uniform_in(0.1, 1.5);
            let est = matrix_exponential(&a.scaled(s + t)).unwrap();
            let es = matrix_exponential(&a.scaled(s)).unwrap();
            let et = matrix_exponential(&a.scaled(t)).unwrap();
            assert!(est.sub(&es.matmul(&et)).max_abs() < 1e-10);

            let e = matrix_exponential(&a).unwrap();
            let einv = matrix_exponential(&a.scaled(-1.0)).unwrap();
            assert!(e.matmul(&einv).sub(&Mat::identity(n)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn exp_rejects_nonfinite_and_nonsquare() {
        let mut m = Mat::zeros(2, 2);
        m.set(0, 1, f64::NAN);
        assert!(matches!(
            matrix_exponential(&m),
            Err(Error::NonFiniteInput { .. })
        ));
        let r = Mat::zeros(2, 3);
        assert!(matches!(
            matrix_exponential(&r),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn cubic_preset_is_valid_with_dim_three() {
        let sys = presets::cubic();
        assert_eq!(sys.dim(), 3);
        assert_eq!(sys.b(), &[1.0, 0.0, 0.0]);
        assert_eq!(sys.c(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn scalar_system_is_valid() {
        let sys = make_state_space(
            Mat::from_rows(&[vec![-1.0]]).unwrap(),
            vec![1.0],
            vec![1.0],
        )
        .unwrap();
        assert_eq!(sys.dim(), 1);
    }

    #[test]
    fn zero_dynamics_is_not_controllable() {
        let err = make_state_space(Mat::zeros(2, 2), vec![1.0, 0.0], vec![1.0, 0.0]);
        assert_eq!(err.unwrap_err(), Error::NotControllable { rank: 1, dim: 2 });
    }

    #[test]
    fn decoupled_output_is_not_observable() {
        let a = mat2(-1.0, 0.0, 0.0, -2.0);
        let err = make_state_space(a, vec![1.0, 1.0], vec![1.0, 0.0]);
        assert_eq!(err.unwrap_err(), Error::NotObservable { rank: 1, dim: 2 });
    }

    #[test]
    fn dimension_and_finiteness_checks() {
        let a = mat2(0.0, 1.0, -1.0, 0.0);
        assert!(matches!(
            make_state_space(a.clone(), vec![1.0], vec![1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            make_state_space(a, vec![1.0, f64::INFINITY], vec![1.0, 0.0]),
            Err(Error::NonFiniteInput { .. })
        ));
    }

    #[test]
    fn impulse_response_support_window() {
        let sys = presets::cubic();
        assert_eq!(impulse_response(&sys, -0.5, 5.1), 0.0);
        assert_eq!(impulse_response(&sys, 5.2, 5.1), 0.0);
        // g(0) = c'b = 0 for this system
        assert_eq!(impulse_response(&sys, 0.0, 5.1), 0.0);
    }

    #[test]
    fn scalar_impulse_response_is_decaying_exponential() {
        let sys = make_state_space(
            Mat::from_rows(&[vec![-1.0]]).unwrap(),
            vec![1.0],
            vec![1.0],
        )
        .unwrap();
        let g = impulse_response(&sys, 1.0, 5.0);
        assert!((g - libm::exp(-1.0)).abs() < 1e-14);
    }

    #[test]
    fn impulse_response_is_continuous_inside_the_window() {
        let sys = presets::cubic();
        let mut rng = SplitMix64::new(9);
        for _ in 0..100 {
            let tau = rng.uniform_in(0.01, 5.0);
            let d = impulse_response(&sys, tau + 1e-8, 5.1) - impulse_response(&sys, tau, 5.1);
            assert!(d.abs() < 1e-6);
        }
    }

    #[test]
    fn rank_tests_survive_similarity_transforms() {
        let sys = presets::cubic();
        let mut rng = SplitMix64::new(77);
        for _ in 0..3 {
            let n = sys.dim();
            let mut t = Mat::identity(n);
            for i in 0..n {
                for j in 0..n {
                    t.set(i, j, t.get(i, j) + 0.4 * rng.uniform_symmetric());
                }
            }
            let lu = lu_factor(&t).unwrap();
            let t_inv = lu.solve_mat(&Mat::identity(n));
            let a2 = t.matmul(sys.a()).matmul(&t_inv);
            let b2 = t.matvec(sys.b());
            let c2 = t_inv.transpose().matvec(sys.c());
            assert!(make_state_space(a2, b2, c2).is_ok());
        }
    }
}
