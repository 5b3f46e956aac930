// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! Control-theoretic smoothing splines.
//!
//! Fits a curve to noisy samples (t_i, y_i) by driving a linear system
//! x' = Ax + bu, y = c'x with a control of the form
//! u(t) = sum_i theta_i g(t_i - t), where g is the system's impulse response.
//! The coefficient vector theta comes from either
//!
//! * the classical quadratic program: theta = (lambda I + W G)^{-1} W y, or
//! * an l1-regularized convex program minimizing
//!   eta ||theta||_1 + ||W (G theta - y)||_p^p for p in {1, 2},
//!   optionally with a jointly estimated free initial state x0,
//!
//! where G is the Gram matrix of the time-shifted impulse responses. The l1
//! path yields sparse coefficient vectors, and p = 1 additionally tolerates
//! heavy-tailed (Laplacian) noise.
//!
//! The crate is `no_std` + `alloc`; all file formats and IO live in the
//! companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod data_io;
pub mod error;
pub mod gramian;
pub mod lti;
pub mod matrix;
pub mod rng;
pub mod solver_l1;
pub mod solver_l2;
pub mod spline_eval;

pub use error::{Error, Result};
pub use gramian::{controllability_gramian, gram_matrix, gram_matrix_quadrature, h_matrix, GramOperator};
pub use lti::{impulse_response, make_state_space, matrix_exponential, StateSpace};
pub use matrix::Mat;
pub use solver_l1::{
    kkt_residual, objective, soft_threshold, solve_l1_p1, solve_l1_p2, solve_with_initial_state,
    L1Config, SolverReport,
};
pub use solver_l2::{solve_l2, L2Config};
pub use data_io::{laplace_noise, read_dataset, reference_signal, synth_dataset, write_dataset, DataSet};
pub use spline_eval::{
    control_signal, fit_error, fit_error_sampled, output_curve, sparsity_report, CurveEvaluator,
    FitConfig, SplineFit,
};
