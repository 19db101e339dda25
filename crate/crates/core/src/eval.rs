//! Binary classification metrics: confusion matrix, per-class
//! precision/recall/F1, accuracy, ROC curve and AUC.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true labels, columns predicted labels.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix2 {
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tp: usize,
}

impl ConfusionMatrix2 {
    pub fn total(&self) -> usize {
        self.tn + self.fp + self.fn_ + self.tp
    }

    /// `[[tn, fp], [fn, tp]]`.
    pub fn as_rows(&self) -> [[usize; 2]; 2] {
        [[self.tn, self.fp], [self.fn_, self.tp]]
    }

    pub fn max_cell(&self) -> usize {
        self.tn.max(self.fp).max(self.fn_).max(self.tp)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)`, from `(0, 0)` to `(1, 1)`.
    pub points: Vec<(f64, f64)>,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_samples: usize,
    pub accuracy: f64,
    /// Indexed by class label.
    pub per_class: [ClassMetrics; 2],
    pub confusion: ConfusionMatrix2,
    pub roc: Option<RocCurve>,
}

fn check_labels(y: &[u8], what: &str) -> Result<()> {
    match y.iter().find(|&&l| l > 1) {
        Some(bad) => Err(Error::InvalidArgument(format!(
            "{what} contains label {bad}, expected 0 or 1"
        ))),
        None => Ok(()),
    }
}

pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix2> {
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidArgument(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    check_labels(y_true, "y_true")?;
    check_labels(y_pred, "y_pred")?;
    let mut cm = ConfusionMatrix2::default();
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (0, 0) => cm.tn += 1,
            (0, _) => cm.fp += 1,
            (_, 0) => cm.fn_ += 1,
            _ => cm.tp += 1,
        }
    }
    Ok(cm)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Metrics treating `positive` as the class of interest. Any ratio with a
/// zero denominator is reported as 0.
pub fn class_metrics(cm: &ConfusionMatrix2, positive: u8) -> ClassMetrics {
    let (tp, fp, fn_) = if positive == 1 {
        (cm.tp, cm.fp, cm.fn_)
    } else {
        (cm.tn, cm.fn_, cm.fp)
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClassMetrics {
        precision,
        recall,
        f1,
        support: tp + fn_,
    }
}

/// ROC curve with one point per distinct score (tied scores share a point)
/// and trapezoidal AUC.
pub fn roc(y_true: &[u8], scores: &[f64]) -> Result<RocCurve> {
    if y_true.len() != scores.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels but {} scores",
            y_true.len(),
            scores.len()
        )));
    }
    check_labels(y_true, "y_true")?;
    if let Some(bad) = scores.iter().find(|s| !s.is_finite()) {
        return Err(Error::InvalidArgument(format!("score {bad} is not finite")));
    }
    let pos = y_true.iter().filter(|&&l| l == 1).count();
    let neg = y_true.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Metric("ROC needs both classes present".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    for (k, &i) in order.iter().enumerate() {
        if y_true[i] == 1 {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_tie = order.get(k + 1).is_none_or(|&j| scores[j] != scores[i]);
        if last_of_tie {
            points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        }
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum();
    Ok(RocCurve { points, auc })
}

pub fn evaluate(y_true: &[u8], y_pred: &[u8], scores: Option<&[f64]>) -> Result<EvalReport> {
    let cm = confusion(y_true, y_pred)?;
    if cm.total() == 0 {
        return Err(Error::Metric("no samples to evaluate".into()));
    }
    let roc = scores.map(|s| roc(y_true, s)).transpose()?;
    Ok(EvalReport {
        n_samples: cm.total(),
        accuracy: (cm.tn + cm.tp) as f64 / cm.total() as f64,
        per_class: [class_metrics(&cm, 0), class_metrics(&cm, 1)],
        confusion: cm,
        roc,
    })
}

impl EvalReport {
    /// Per-class precision/recall/F1/support block with three decimals.
    pub fn classification_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>12} {:>9} {:>9} {:>9} {:>9}", "", "precision", "recall", "f1-score", "support");
        for (label, m) in self.per_class.iter().enumerate() {
            let _ = writeln!(
                out,
                "{label:>12} {:>9.3} {:>9.3} {:>9.3} {:>9}",
                m.precision, m.recall, m.f1, m.support
            );
        }
        let _ = writeln!(out, "{:>12} {:>9} {:>9} {:>9.3} {:>9}", "accuracy", "", "", self.accuracy, self.n_samples);
        out
    }
}

/// Accuracy and class-1 precision/recall/F1 per model, three decimals.
pub fn summary_table<'a, I>(rows: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a EvalReport)>,
{
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<22} {:>9} {:>9} {:>9} {:>9}",
        "Model", "Accuracy", "Precision", "Recall", "F1"
    );
    for (name, r) in rows {
        let m = &r.per_class[1];
        let _ = writeln!(
            out,
            "{name:<22} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            r.accuracy, m.precision, m.recall, m.f1
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn confusion_counts() {
        let cm = confusion(&[1, 1, 1], &[1, 1, 1]).unwrap();
        assert_eq!(cm, ConfusionMatrix2 { tn: 0, fp: 0, fn_: 0, tp: 3 });

        let cm = confusion(&[1, 0, 1], &[1, 0, 0]).unwrap();
        assert_eq!((cm.tp, cm.tn, cm.fn_, cm.fp), (1, 1, 1, 0));

        let cm = confusion(&[0, 1], &[1, 0]).unwrap();
        assert_eq!((cm.fp, cm.fn_), (1, 1));
    }

    #[test]
    fn confusion_errors() {
        assert!(confusion(&[0, 1], &[0]).is_err());
        assert!(confusion(&[0, 2], &[0, 1]).is_err());
        assert!(confusion(&[0, 1], &[0, 3]).is_err());
    }

    #[test]
    fn metrics_examples() {
        let cm = ConfusionMatrix2 { tn: 0, fp: 0, fn_: 1, tp: 1 };
        let m = class_metrics(&cm, 1);
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 0.5);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);

        let m = class_metrics(&ConfusionMatrix2::default(), 1);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn negative_class_metrics_swap_roles() {
        let cm = ConfusionMatrix2 { tn: 4, fp: 1, fn_: 2, tp: 3 };
        let m = class_metrics(&cm, 0);
        assert_eq!(m.precision, 4.0 / 6.0);
        assert_eq!(m.recall, 4.0 / 5.0);
        assert_eq!(m.support, 5);
    }

    #[test]
    fn roc_examples() {
        assert_eq!(roc(&[1, 0], &[0.9, 0.1]).unwrap().auc, 1.0);

        let flat = roc(&[1, 0, 1, 0], &[0.3; 4]).unwrap();
        assert_eq!(flat.auc, 0.5);
        assert_eq!(flat.points, vec![(0.0, 0.0), (1.0, 1.0)]);

        let r = roc(&[1, 0, 1, 0], &[0.8, 0.7, 0.6, 0.5]).unwrap();
        assert_eq!(r.auc, 0.75);
        assert_eq!(r.points.first(), Some(&(0.0, 0.0)));
        assert_eq!(r.points.last(), Some(&(1.0, 1.0)));
    }

    #[test]
    fn roc_errors() {
        assert!(matches!(roc(&[1, 1], &[0.1, 0.2]), Err(Error::Metric(_))));
        assert!(roc(&[1, 0], &[f64::NAN, 0.2]).is_err());
        assert!(roc(&[1, 0], &[0.2]).is_err());
    }

    #[test]
    fn evaluate_assembles_report() {
        let r = evaluate(&[1, 0, 1], &[1, 0, 0], None).unwrap();
        assert!((r.accuracy - 2.0 / 3.0).abs() < 1e-12);
        assert!(r.roc.is_none());

        let r = evaluate(&[0, 1, 1], &[0, 1, 1], Some(&[0.1, 0.8, 0.9])).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.per_class[0].f1, 1.0);
        assert_eq!(r.per_class[1].f1, 1.0);
        assert_eq!(r.roc.unwrap().auc, 1.0);

        assert!(evaluate(&[], &[], None).is_err());
    }

    #[test]
    fn table_has_three_decimals() {
        let r = evaluate(&[1, 0, 1], &[1, 0, 0], None).unwrap();
        let t = summary_table([("Naive Bayes", &r)]);
        assert!(t.contains("Naive Bayes"));
        assert!(t.contains("0.667"));
        assert!(r.classification_report().contains("accuracy"));
    }
}
