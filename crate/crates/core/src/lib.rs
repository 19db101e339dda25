//! Classical text-classification toolkit for context-free sarcasm detection.
//!
//! The pipeline runs in five stages, one module each:
//!
//! - [`corpus`]: load the SARC tab-separated export, subsample, clean and
//!   split it into stratified train/test sets.
//! - [`sparse`]: the compressed-sparse-row matrix shared by every stage.
//! - [`features`]: word and character TF-IDF plus five stylometric columns.
//! - [`models`]: multinomial naive Bayes, logistic regression, a squared-hinge
//!   linear SVM and a Gini random forest.
//! - [`eval`]: accuracy, per-class precision/recall/F1, confusion matrix, ROC
//!   and AUC.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod sparse;

pub use error::{Error, Result};
