//! L2-regularized linear classifiers: logistic regression and the
//! squared-hinge SVM. Both are fitted in the primal with L-BFGS over the
//! parameter vector `[w_0, .., w_{D-1}, b]`; the bias is never penalized.
//!
//! Objectives, with labels mapped to `t = ±1` and `z = w·x + b`:
//!
//! - logistic: `Σ ln(1 + exp(-t z)) + ‖w‖² / (2C)`
//! - squared hinge: `‖w‖² / 2 + C Σ max(0, 1 - t z)²`

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sparse::CsrMatrix;

use super::lbfgs::{self, LbfgsParams, Objective, StopReason};
use super::{check_binary_labels, check_width};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    Logistic,
    Svm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub c: f64,
    pub max_iter: usize,
    pub tol: f64,
}

/// Solver outcome kept with the model. `converged == false` is a warning,
/// not an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitInfo {
    pub converged: bool,
    pub iterations: usize,
    pub objective: f64,
    pub grad_inf_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub fit: FitInfo,
}

fn signed_labels(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

/// `ln(1 + exp(v))` without overflow.
fn softplus(v: f64) -> f64 {
    if v > 0.0 {
        v + (-v).exp().ln_1p()
    } else {
        v.exp().ln_1p()
    }
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Shared pieces of both objectives: per-row margins are computed in
/// parallel (each row independently), and every reduction runs sequentially
/// in row order so the result does not depend on the thread count.
struct Data<'a> {
    x: &'a CsrMatrix,
    t: Vec<f64>,
}

impl Data<'_> {
    /// `Σ_i x_ij²` per column, then `n` for the bias slot.
    fn column_square_sums(&self) -> Vec<f64> {
        let d = self.x.n_cols();
        let mut sums = vec![0.0; d + 1];
        for (&j, &v) in self.x.col_indices().iter().zip(self.x.values()) {
            sums[j] += v * v;
        }
        sums[d] = self.x.n_rows() as f64;
        sums
    }

    fn scores(&self, params: &[f64]) -> Vec<f64> {
        let d = self.x.n_cols();
        let (w, b) = (&params[..d], params[d]);
        (0..self.x.n_rows())
            .into_par_iter()
            .map(|i| self.x.row_dot_unchecked(i, w) + b)
            .collect()
    }

    /// Adds `Σ_i coef_i · [x_i, 1]` into `grad`.
    fn accumulate(&self, coef: &[f64], grad: &mut [f64]) {
        let d = self.x.n_cols();
        for (i, &c) in coef.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let (cols, vals) = self.x.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                grad[j] += c * v;
            }
            grad[d] += c;
        }
    }
}

pub struct LogisticObjective<'a> {
    data: Data<'a>,
    c: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: &'a CsrMatrix, y: &[u8], c: f64) -> Self {
        Self {
            data: Data {
                x,
                t: signed_labels(y),
            },
            c,
        }
    }
}

impl Objective for LogisticObjective<'_> {
    fn dim(&self) -> usize {
        self.data.x.n_cols() + 1
    }

    fn value_grad(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.data.x.n_cols();
        let z = self.data.scores(params);
        let mut value = 0.0;
        let mut coef = Vec::with_capacity(z.len());
        for (&zi, &ti) in z.iter().zip(&self.data.t) {
            value += softplus(-ti * zi);
            coef.push(-ti * sigmoid(-ti * zi));
        }
        let w = &params[..d];
        let inv_c = 1.0 / self.c;
        for (g, &wj) in grad[..d].iter_mut().zip(w) {
            *g = wj * inv_c;
        }
        grad[d] = 0.0;
        value += 0.5 * inv_c * w.iter().map(|v| v * v).sum::<f64>();
        self.data.accumulate(&coef, grad);
        value
    }

    /// Hessian diagonal at the origin, where every sigmoid weight is 1/4.
    fn diagonal_curvature(&self) -> Option<Vec<f64>> {
        let d = self.data.x.n_cols();
        let mut h = self.data.column_square_sums();
        for (j, v) in h.iter_mut().enumerate() {
            *v = 0.25 * *v + if j < d { 1.0 / self.c } else { 0.0 };
        }
        Some(h)
    }
}

pub struct SquaredHingeObjective<'a> {
    data: Data<'a>,
    c: f64,
}

impl<'a> SquaredHingeObjective<'a> {
    pub fn new(x: &'a CsrMatrix, y: &[u8], c: f64) -> Self {
        Self {
            data: Data {
                x,
                t: signed_labels(y),
            },
            c,
        }
    }
}

impl Objective for SquaredHingeObjective<'_> {
    fn dim(&self) -> usize {
        self.data.x.n_cols() + 1
    }

    fn value_grad(&self, params: &[f64], grad: &mut [f64]) -> f64 {
        let d = self.data.x.n_cols();
        let z = self.data.scores(params);
        let mut loss = 0.0;
        let mut coef = Vec::with_capacity(z.len());
        for (&zi, &ti) in z.iter().zip(&self.data.t) {
            let slack = (1.0 - ti * zi).max(0.0);
            loss += slack * slack;
            coef.push(-2.0 * self.c * ti * slack);
        }
        let w = &params[..d];
        grad[..d].copy_from_slice(w);
        grad[d] = 0.0;
        let value = 0.5 * w.iter().map(|v| v * v).sum::<f64>() + self.c * loss;
        self.data.accumulate(&coef, grad);
        value
    }

    /// Generalized Hessian diagonal at the origin, where every sample is
    /// inside the margin.
    fn diagonal_curvature(&self) -> Option<Vec<f64>> {
        let d = self.data.x.n_cols();
        let mut h = self.data.column_square_sums();
        for (j, v) in h.iter_mut().enumerate() {
            *v = 2.0 * self.c * *v + if j < d { 1.0 } else { 0.0 };
        }
        Some(h)
    }
}

fn fit<O: Objective>(obj: &O, kind: LinearKind, params: &LinearParams) -> LinearModel {
    let lbfgs_params = LbfgsParams {
        max_iter: params.max_iter,
        grad_tol: params.tol,
        ..Default::default()
    };
    let m = lbfgs::minimize(obj, vec![0.0; obj.dim()], &lbfgs_params);
    let converged = m.stop == StopReason::GradientTolerance;
    let mut x = m.x;
    let bias = x.pop().expect("parameter vector holds the bias");
    LinearModel {
        kind,
        weights: x,
        bias,
        fit: FitInfo {
            converged,
            iterations: m.iterations,
            objective: m.value,
            grad_inf_norm: m.grad_inf_norm,
        },
    }
}

pub fn train_logreg(x: &CsrMatrix, y: &[u8], params: &LinearParams) -> Result<LinearModel> {
    check_binary_labels(x, y)?;
    let obj = LogisticObjective::new(x, y, params.c);
    Ok(fit(&obj, LinearKind::Logistic, params))
}

pub fn train_linear_svm(x: &CsrMatrix, y: &[u8], params: &LinearParams) -> Result<LinearModel> {
    check_binary_labels(x, y)?;
    let obj = SquaredHingeObjective::new(x, y, params.c);
    Ok(fit(&obj, LinearKind::Svm, params))
}

impl LinearModel {
    pub fn n_features(&self) -> usize {
        self.weights.len()
    }

    /// `w·x_i + b` for every row.
    pub fn decision_function(&self, x: &CsrMatrix) -> Result<Vec<f64>> {
        check_width(x, self.n_features())?;
        Ok((0..x.n_rows())
            .into_par_iter()
            .map(|i| x.row_dot_unchecked(i, &self.weights) + self.bias)
            .collect())
    }

    /// Label 1 iff the score is strictly positive.
    pub fn predict(&self, x: &CsrMatrix) -> Result<Vec<u8>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|s| u8::from(s > 0.0))
            .collect())
    }

    /// Logistic probabilities; only meaningful for [`LinearKind::Logistic`].
    pub fn predict_proba(&self, x: &CsrMatrix) -> Result<Vec<[f64; 2]>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|s| {
                let p = sigmoid(s);
                [1.0 - p, p]
            })
            .collect())
    }
}
