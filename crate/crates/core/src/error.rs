// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("(A, b) is not controllable: controllability matrix has rank {rank}, state dimension is {dim}")]
    NotControllable { rank: usize, dim: usize },

    #[error("(c, A) is not observable: observability matrix has rank {rank}, state dimension is {dim}")]
    NotObservable { rank: usize, dim: usize },

    #[error("non-finite entry in {what}")]
    NonFiniteInput { what: &'static str },

    #[error("sample times must be strictly increasing")]
    NonIncreasingTimes,

    #[error("sample times must be positive, found {value}")]
    NonPositiveTime { value: f64 },

    #[error("weights must be positive, found {value}")]
    NonPositiveWeight { value: f64 },

    #[error("duplicate sample time {value}")]
    DuplicateTime { value: f64 },

    #[error("parse error at line {line}, field {field}: {what}")]
    Parse {
        line: usize,
        field: usize,
        what: &'static str,
    },

    #[error("adaptive quadrature did not meet the tolerance within the panel budget")]
    QuadratureNonConvergence,

    #[error("linear system is singular")]
    SingularSystem,

    #[error("power iteration for the solver step size did not converge")]
    StepSizeFailure,

    #[error("time {t} is outside the spline domain [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("invalid parameter: {what}")]
    InvalidParameter { what: &'static str },
}
