//! Multinomial naive Bayes with additive (Laplace) smoothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

use super::{check_binary_labels, check_width};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub class_log_prior: [f64; 2],
    /// `feature_log_prob[c][j] = ln P(feature j | class c)`.
    pub feature_log_prob: [Vec<f64>; 2],
    pub alpha: f64,
}

pub fn train_nb(x: &CsrMatrix, y: &[u8], alpha: f64) -> Result<NbModel> {
    check_binary_labels(x, y)?;
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let d = x.n_cols();
    let mut class_count = [0usize; 2];
    let mut feature_count = [vec![0.0; d], vec![0.0; d]];
    for (i, &label) in y.iter().enumerate() {
        let c = label as usize;
        class_count[c] += 1;
        let (cols, vals) = x.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "naive Bayes needs non-negative features, found {v} at ({i}, {j})"
                )));
            }
            feature_count[c][j] += v;
        }
    }
    let n = y.len() as f64;
    let class_log_prior = class_count.map(|k| (k as f64 / n).ln());
    let feature_log_prob = feature_count.map(|counts| {
        let total: f64 = counts.iter().sum::<f64>() + alpha * d as f64;
        let log_total = total.ln();
        counts.iter().map(|&f| (f + alpha).ln() - log_total).collect()
    });
    Ok(NbModel {
        class_log_prior,
        feature_log_prob,
        alpha,
    })
}

impl NbModel {
    pub fn n_features(&self) -> usize {
        self.feature_log_prob[0].len()
    }

    /// Unnormalized log posterior per class.
    pub fn joint_log_likelihood(&self, x: &CsrMatrix) -> Result<Vec<[f64; 2]>> {
        check_width(x, self.n_features())?;
        Ok((0..x.n_rows())
            .map(|i| {
                let (cols, vals) = x.row(i);
                let mut jll = self.class_log_prior;
                for (c, out) in jll.iter_mut().enumerate() {
                    let flp = &self.feature_log_prob[c];
                    *out += cols.iter().zip(vals).map(|(&j, &v)| v * flp[j]).sum::<f64>();
                }
                jll
            })
            .collect())
    }

    pub fn predict_proba(&self, x: &CsrMatrix) -> Result<Vec<[f64; 2]>> {
        Ok(self
            .joint_log_likelihood(x)?
            .into_iter()
            .map(|[a, b]| {
                let m = a.max(b);
                let (ea, eb) = ((a - m).exp(), (b - m).exp());
                let z = ea + eb;
                [ea / z, eb / z]
            })
            .collect())
    }

    /// Class with the larger posterior; ties go to class 0.
    pub fn predict(&self, x: &CsrMatrix) -> Result<Vec<u8>> {
        Ok(self
            .joint_log_likelihood(x)?
            .into_iter()
            .map(|[a, b]| u8::from(b > a))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csr(rows: &[&[f64]]) -> CsrMatrix {
        let n_cols = rows[0].len();
        CsrMatrix::from_rows(
            n_cols,
            rows.iter()
                .map(|r| r.iter().copied().enumerate().collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_document_arithmetic() {
        let x = csr(&[&[2.0, 0.0], &[0.0, 2.0]]);
        let m = train_nb(&x, &[0, 1], 1.0).unwrap();
        assert!((m.feature_log_prob[0][0] - 0.75f64.ln()).abs() < 1e-15);
        assert!((m.feature_log_prob[0][1] - 0.25f64.ln()).abs() < 1e-15);
        assert_eq!(m.class_log_prior, [0.5f64.ln(); 2]);

        let p = m.predict_proba(&csr(&[&[1.0, 0.0]])).unwrap();
        assert!(p[0][0] > 0.5);
        assert_eq!(m.predict(&csr(&[&[1.0, 0.0]])).unwrap(), vec![0]);
    }

    #[test]
    fn smoothing_floor_for_absent_feature() {
        let x = csr(&[&[3.0, 0.0, 1.0], &[0.0, 2.0, 0.0]]);
        let m = train_nb(&x, &[0, 1], 1.0).unwrap();
        // Class 1 never sees feature 0: alpha / (T + alpha * D) = 1 / (2 + 3).
        assert!((m.feature_log_prob[1][0].exp() - 0.2).abs() < 1e-15);
        for c in 0..2 {
            let s: f64 = m.feature_log_prob[c].iter().map(|v| v.exp()).sum();
            assert!((s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_row_returns_priors() {
        let x = csr(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]]);
        let m = train_nb(&x, &[0, 1, 1], 1.0).unwrap();
        let p = m.predict_proba(&CsrMatrix::zeros(1, 2)).unwrap();
        assert!((p[0][0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((p[0][1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let x = csr(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(train_nb(&x, &[1, 1], 1.0), Err(Error::Training(_))));
        let neg = csr(&[&[-1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(train_nb(&neg, &[0, 1], 1.0), Err(Error::Domain(_))));
        let m = train_nb(&x, &[0, 1], 1.0).unwrap();
        assert!(matches!(
            m.predict_proba(&CsrMatrix::zeros(1, 3)),
            Err(Error::Shape(_))
        ));
    }
}
