// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! The on-disk fit record: a versioned JSON snapshot of a fit that is
//! self-contained, so `eval` can run from the file and nothing else.

use ctspline_core::{
    make_state_space, FitConfig, L1Config, L2Config, Mat, SolverReport, SplineFit,
};
use serde::{Deserialize, Serialize};

pub const FORMAT_TAG: &str = "ctspline-fit/1";

#[derive(Serialize, Deserialize)]
pub struct SystemDto {
    /// Row-major state matrix.
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
pub struct ConfigDto {
    /// "l1" or "l2".
    pub mode: String,
    pub p: Option<u8>,
    pub eta: Option<f64>,
    pub lambda: Option<f64>,
    pub estimate_x0: bool,
    /// True when every sample weight is exactly 1; the full vector is then
    /// omitted from the record.
    pub weights_uniform: bool,
    pub weights: Option<Vec<f64>>,
    pub max_iter: Option<usize>,
    pub tol_abs: Option<f64>,
    pub tol_rel: Option<f64>,
    pub rho: Option<f64>,
}

#[derive(Serialize, Deserialize)]
pub struct ReportDto {
    pub solver: String,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub converged: bool,
}

#[derive(Serialize, Deserialize)]
pub struct FitRecord {
    pub format: String,
    pub system: SystemDto,
    pub times: Vec<f64>,
    pub theta: Vec<f64>,
    pub x0: Option<Vec<f64>>,
    pub config: ConfigDto,
    pub report: Option<ReportDto>,
}

fn uniform(weights: &[f64]) -> bool {
    weights.iter().all(|w| *w == 1.0)
}

impl FitRecord {
    pub fn from_fit(fit: &SplineFit) -> FitRecord {
        let sys = &fit.system;
        let a = (0..sys.dim())
            .map(|i| sys.a().row(i).to_vec())
            .collect::<Vec<_>>();
        let config = match &fit.config {
            FitConfig::L2(c) => ConfigDto {
                mode: "l2".into(),
                p: None,
                eta: None,
                lambda: Some(c.lambda),
                estimate_x0: false,
                weights_uniform: uniform(&c.weights),
                weights: (!uniform(&c.weights)).then(|| c.weights.clone()),
                max_iter: None,
                tol_abs: None,
                tol_rel: None,
                rho: None,
            },
            FitConfig::L1(c) => ConfigDto {
                mode: "l1".into(),
                p: Some(c.p),
                eta: Some(c.eta),
                lambda: None,
                estimate_x0: c.estimate_x0,
                weights_uniform: uniform(&c.weights),
                weights: (!uniform(&c.weights)).then(|| c.weights.clone()),
                max_iter: Some(c.max_iter),
                tol_abs: Some(c.tol_abs),
                tol_rel: Some(c.tol_rel),
                rho: Some(c.rho),
            },
        };
        FitRecord {
            format: FORMAT_TAG.into(),
            system: SystemDto {
                a,
                b: sys.b().to_vec(),
                c: sys.c().to_vec(),
            },
            times: fit.times.clone(),
            theta: fit.theta.clone(),
            x0: fit.x0.clone(),
            config,
            report: fit.report.as_ref().map(|r| ReportDto {
                solver: r.solver_name.into(),
                iterations: r.iterations,
                kkt_residual: r.kkt_residual,
                converged: r.converged,
            }),
        }
    }

    /// Rebuild the evaluatable fit, re-running every structural validation
    /// the library performs on fresh inputs.
    pub fn into_fit(self) -> Result<SplineFit, String> {
        if self.format != FORMAT_TAG {
            return Err(format!(
                "unsupported record format {:?}, expected {:?}",
                self.format, FORMAT_TAG
            ));
        }
        let a = Mat::from_rows(&self.system.a).map_err(|e| format!("system matrix: {e}"))?;
        let sys = make_state_space(a, self.system.b, self.system.c)
            .map_err(|e| format!("system: {e}"))?;
        let n = self.times.len();
        let weights = match (self.config.weights_uniform, self.config.weights) {
            (true, _) => vec![1.0; n],
            (false, Some(w)) => {
                if w.len() != n {
                    return Err(format!(
                        "weights length {} does not match {} samples",
                        w.len(),
                        n
                    ));
                }
                w
            }
            (false, None) => return Err("non-uniform weights missing from record".into()),
        };
        let config = match self.config.mode.as_str() {
            "l2" => {
                let lambda = self
                    .config
                    .lambda
                    .ok_or_else(|| "l2 record missing lambda".to_string())?;
                FitConfig::L2(L2Config { lambda, weights })
            }
            "l1" => {
                let eta = self
                    .config
                    .eta
                    .ok_or_else(|| "l1 record missing eta".to_string())?;
                let p = self.config.p.ok_or_else(|| "l1 record missing p".to_string())?;
                let mut c = L1Config::new(eta, p, n);
                c.weights = weights;
                c.estimate_x0 = self.config.estimate_x0;
                if let Some(v) = self.config.max_iter {
                    c.max_iter = v;
                }
                if let Some(v) = self.config.tol_abs {
                    c.tol_abs = v;
                }
                if let Some(v) = self.config.tol_rel {
                    c.tol_rel = v;
                }
                if let Some(v) = self.config.rho {
                    c.rho = v;
                }
                FitConfig::L1(c)
            }
            other => return Err(format!("unknown fit mode {other:?}")),
        };
        let report = self.report.map(|r| SolverReport {
            iterations: r.iterations,
            objective_history: Vec::new(),
            kkt_residual: r.kkt_residual,
            converged: r.converged,
            solver_name: match r.solver.as_str() {
                "mfista" => "mfista",
                "admm" => "admm",
                _ => "external",
            },
        });
        SplineFit::new(sys, self.times, self.theta, self.x0, config, report)
            .map_err(|e| format!("fit record is inconsistent: {e}"))
    }
}
