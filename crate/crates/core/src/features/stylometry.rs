//! The five raw stylometric columns appended after the TF-IDF blocks.
//!
//! Column order: character length, whitespace word count plus one,
//! exclamation marks per word, question marks per word, uppercase ratio.
//! Values are left unscaled.

use crate::sparse::DenseMatrix;

pub const STYLOMETRIC_WIDTH: usize = 5;

pub const STYLOMETRIC_NAMES: [&str; STYLOMETRIC_WIDTH] = [
    "char_length",
    "word_count_plus_one",
    "exclam_per_word",
    "question_per_word",
    "uppercase_ratio",
];

pub fn stylometric_row(text: &str) -> [f64; STYLOMETRIC_WIDTH] {
    let length = text.chars().count() as f64;
    let words = text.split_whitespace().count() as f64 + 1.0;
    let exclam = text.chars().filter(|&c| c == '!').count() as f64;
    let question = text.chars().filter(|&c| c == '?').count() as f64;
    let upper = text.chars().filter(|c| c.is_uppercase()).count() as f64;
    [
        length,
        words,
        exclam / words,
        question / words,
        upper / length.max(1.0),
    ]
}

pub fn stylometrics<S: AsRef<str>>(texts: &[S]) -> DenseMatrix {
    let values = texts
        .iter()
        .flat_map(|t| stylometric_row(t.as_ref()))
        .collect();
    DenseMatrix::new(texts.len(), STYLOMETRIC_WIDTH, values)
        .expect("row width is fixed")
}
