// Copyright 2026 ctspline Contributors
// SPDX-License-Identifier: Apache-2.0

//! Datasets, their CSV form, and the synthetic benchmark generator.
//!
//! Parsing and formatting work on strings so the core crate stays free of
//! file IO; the CLI crate owns the actual reads and writes. Numbers are
//! written with Rust's shortest round-trip formatting, so
//! read(write(dataset)) reproduces the dataset bit for bit.
//!
//! The noise generator is fully specified: a splitmix64 stream mapped
//! through the Laplace inverse CDF. Fixing the seed fixes every sample on
//! every platform, which keeps experiments reproducible without shipping
//! data files.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Time-stamped observations with per-sample weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    times: Vec<f64>,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl DataSet {
    /// Validates lengths, strictly increasing positive times, positive
    /// weights, and finiteness.
    pub fn new(times: Vec<f64>, values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        crate::gramian::validate_times(&times)?;
        if values.len() != times.len() {
            return Err(Error::DimensionMismatch {
                what: "observations",
                expected: times.len(),
                got: values.len(),
            });
        }
        if weights.len() != times.len() {
            return Err(Error::DimensionMismatch {
                what: "weights",
                expected: times.len(),
                got: weights.len(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteInput { what: "observations" });
        }
        for &w in &weights {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { value: w });
            }
        }
        Ok(DataSet {
            times,
            values,
            weights,
        })
    }

    pub fn with_unit_weights(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = times.len();
        DataSet::new(times, values, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn parse_field(raw: &str, line: usize, field: usize) -> Result<f64> {
    raw.trim().parse::<f64>().map_err(|_| Error::Parse {
        line,
        field,
        what: "not a number",
    })
}

/// Parses CSV text with header `t,y` or `t,y,w`. Rows may arrive in any
/// order; they are sorted by time. A missing weight column means unit
/// weights. Line and field numbers in errors are 1-based, counting the
/// header as line 1.
pub fn read_dataset(csv: &str) -> Result<DataSet> {
    let mut lines = csv.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        field: 1,
        what: "empty input",
    })?;
    let header = header.trim_end_matches('\r').trim();
    let has_weights = match header {
        "t,y" => false,
        "t,y,w" => true,
        _ => {
            return Err(Error::Parse {
                line: 1,
                field: 1,
                what: "header must be `t,y` or `t,y,w`",
            })
        }
    };
    let want = if has_weights { 3 } else { 2 };

    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim_end_matches('\r');
        if row.trim().is_empty() {
            return Err(Error::Parse {
                line,
                field: 1,
                what: "blank row",
            });
        }
        let mut fields = row.split(',');
        let mut take = |field: usize| -> Result<f64> {
            let raw = fields.next().ok_or(Error::Parse {
                line,
                field,
                what: "missing field",
            })?;
            parse_field(raw, line, field)
        };
        let t = take(1)?;
        let y = take(2)?;
        let w = if has_weights { take(3)? } else { 1.0 };
        if fields.next().is_some() {
            return Err(Error::Parse {
                line,
                field: want + 1,
                what: "too many fields",
            });
        }
        rows.push((t, y, w));
    }

    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(core::cmp::Ordering::Equal));
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::DuplicateTime { value: pair[0].0 });
        }
    }
    let times: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let values: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let weights: Vec<f64> = rows.iter().map(|r| r.2).collect();
    DataSet::new(times, values, weights)
}

/// Formats a dataset as CSV with LF line endings and shortest round-trip
/// number formatting. The weight column is written only when some weight
/// differs from 1; reading fills it back in either way.
pub fn write_dataset(data: &DataSet) -> String {
    use core::fmt::Write;
    let weighted = data.weights.iter().any(|w| *w != 1.0);
    let mut out = String::new();
    out.push_str(if weighted { "t,y,w\n" } else { "t,y\n" });
    for i in 0..data.len() {
        if weighted {
            let _ = writeln!(
                out,
                "{},{},{}",
                data.times[i], data.values[i], data.weights[i]
            );
        } else {
            let _ = writeln!(out, "{},{}", data.times[i], data.values[i]);
        }
    }
    out
}

/// Zero-mean Laplace samples with the given variance, deterministic per
/// seed: v uniform on (-1/2, 1/2) maps through the inverse CDF
/// x = -b sign(v) ln(1 - 2|v|), where b = sqrt(variance / 2).
pub fn laplace_noise(seed: u64, variance: f64, count: usize) -> Vec<f64> {
    assert!(
        variance >= 0.0 && variance.is_finite(),
        "noise variance must be nonnegative and finite"
    );
    let b = libm::sqrt(variance / 2.0);
    let mut rng = SplitMix64::new(seed);
    (0..count)
        .map(|_| {
            let v = rng.uniform_open() - 0.5;
            let s = if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                return 0.0;
            };
            -b * s * libm::log(1.0 - 2.0 * libm::fabs(v))
        })
        .collect()
}

/// The benchmark's noiseless signal, sin(2t) + 1.
pub fn reference_signal(t: f64) -> f64 {
    libm::sin(2.0 * t) + 1.0
}

/// The built-in benchmark dataset: 501 samples of sin(2t) + 1 at
/// t_i = 0.1 + 0.01 (i - 1), unit weights, plus Laplace noise of the given
/// variance. Also returns the noiseless reference at the sample times.
pub fn synth_dataset(seed: u64, variance: f64) -> (DataSet, Vec<f64>) {
    let n = 501;
    let times: Vec<f64> = (0..n).map(|i| 0.1 + 0.01 * i as f64).collect();
    let reference: Vec<f64> = times.iter().map(|&t| reference_signal(t)).collect();
    let noise = laplace_noise(seed, variance, n);
    let values: Vec<f64> = reference
        .iter()
        .zip(&noise)
        .map(|(r, e)| r + e)
        .collect();
    let data = DataSet::with_unit_weights(times, values)
        .expect("benchmark construction is always valid");
    (data, reference)
}
