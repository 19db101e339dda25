//! The four classifiers and a tagged wrapper over their trained forms.

pub mod forest;
pub mod lbfgs;
pub mod linear;
pub mod nb;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub use forest::{train_random_forest, DecisionTree, ForestModel, ForestParams};
pub use linear::{train_linear_svm, train_logreg, FitInfo, LinearKind, LinearModel, LinearParams};
pub use nb::{train_nb, NbModel};

pub(crate) fn check_binary_labels(x: &CsrMatrix, y: &[u8]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows but {} labels",
            x.n_rows(),
            y.len()
        )));
    }
    if let Some(bad) = y.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidArgument(format!("label {bad} is not 0 or 1")));
    }
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::Training("both classes must be present".into()));
    }
    Ok(())
}

pub(crate) fn check_width(x: &CsrMatrix, expected: usize) -> Result<()> {
    if x.n_cols() != expected {
        return Err(Error::Shape(format!(
            "model expects {expected} features, matrix has {}",
            x.n_cols()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logreg,
    Svm,
    Nb,
    Rf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Logreg, ModelKind::Svm, ModelKind::Nb, ModelKind::Rf];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "logreg",
            ModelKind::Svm => "svm",
            ModelKind::Nb => "nb",
            ModelKind::Rf => "rf",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Logreg => "Logistic Regression",
            ModelKind::Svm => "Linear SVM",
            ModelKind::Nb => "Naive Bayes",
            ModelKind::Rf => "Random Forest",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown model {s:?} (expected one of logreg, svm, nb, rf)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr_max_iter: usize,
    pub lr_tol: f64,
    pub lr_reg_c: f64,
    pub svm_max_iter: usize,
    pub svm_tol: f64,
    pub svm_reg_c: f64,
    pub nb_alpha: f64,
    pub rf_trees: usize,
    pub rf_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr_max_iter: 500,
            lr_tol: 1e-4,
            lr_reg_c: 1.0,
            svm_max_iter: 5000,
            svm_tol: 1e-4,
            svm_reg_c: 1.0,
            nb_alpha: 1.0,
            rf_trees: 150,
            rf_seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn logreg_params(&self) -> LinearParams {
        LinearParams {
            c: self.lr_reg_c,
            max_iter: self.lr_max_iter,
            tol: self.lr_tol,
        }
    }

    pub fn svm_params(&self) -> LinearParams {
        LinearParams {
            c: self.svm_reg_c,
            max_iter: self.svm_max_iter,
            tol: self.svm_tol,
        }
    }

    pub fn forest_params(&self) -> ForestParams {
        ForestParams {
            n_trees: self.rf_trees,
            seed: self.rf_seed,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum TrainedModel {
    NaiveBayes(NbModel),
    Logistic(LinearModel),
    LinearSvm(LinearModel),
    RandomForest(ForestModel),
}

pub fn train(kind: ModelKind, x: &CsrMatrix, y: &[u8], cfg: &TrainConfig) -> Result<TrainedModel> {
    Ok(match kind {
        ModelKind::Nb => TrainedModel::NaiveBayes(train_nb(x, y, cfg.nb_alpha)?),
        ModelKind::Logreg => TrainedModel::Logistic(train_logreg(x, y, &cfg.logreg_params())?),
        ModelKind::Svm => TrainedModel::LinearSvm(train_linear_svm(x, y, &cfg.svm_params())?),
        ModelKind::Rf => TrainedModel::RandomForest(train_random_forest(x, y, &cfg.forest_params())?),
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::NaiveBayes(_) => ModelKind::Nb,
            TrainedModel::Logistic(_) => ModelKind::Logreg,
            TrainedModel::LinearSvm(_) => ModelKind::Svm,
            TrainedModel::RandomForest(_) => ModelKind::Rf,
        }
    }

    pub fn n_features(&self) -> usize {
        match self {
            TrainedModel::NaiveBayes(m) => m.n_features(),
            TrainedModel::Logistic(m) | TrainedModel::LinearSvm(m) => m.n_features(),
            TrainedModel::RandomForest(m) => m.n_features,
        }
    }

    pub fn predict(&self, x: &CsrMatrix) -> Result<Vec<u8>> {
        match self {
            TrainedModel::NaiveBayes(m) => m.predict(x),
            TrainedModel::Logistic(m) | TrainedModel::LinearSvm(m) => m.predict(x),
            TrainedModel::RandomForest(m) => m.predict(x),
        }
    }

    /// Class probabilities, for models that have them. The SVM has no
    /// calibrated probability path.
    pub fn predict_proba(&self, x: &CsrMatrix) -> Result<Option<Vec<[f64; 2]>>> {
        match self {
            TrainedModel::NaiveBayes(m) => m.predict_proba(x).map(Some),
            TrainedModel::Logistic(m) => m.predict_proba(x).map(Some),
            TrainedModel::RandomForest(m) => m.predict_proba(x).map(Some),
            TrainedModel::LinearSvm(_) => Ok(None),
        }
    }

    /// Solver diagnostics for the linear models.
    pub fn fit_info(&self) -> Option<&FitInfo> {
        match self {
            TrainedModel::Logistic(m) | TrainedModel::LinearSvm(m) => Some(&m.fit),
            _ => None,
        }
    }
}
