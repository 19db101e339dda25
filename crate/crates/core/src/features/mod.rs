//! Text featurization: word TF-IDF, character TF-IDF and five stylometric
//! columns, stacked into one non-negative sparse matrix.
//!
//! Column layout of a transformed row:
//!
//! | block      | width                 | source                                    |
//! |------------|-----------------------|-------------------------------------------|
//! | word       | `word_vocab.len()`    | lowercased tokens, stop words removed, 1-2 grams |
//! | char       | `char_vocab.len()`    | lowercased raw text, 3-5 character windows |
//! | stylometry | 5                     | see [`stylometry`]                        |

pub mod stylometry;
pub mod text;
pub mod vocab;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{hstack, to_csr, CsrMatrix};

pub use stylometry::{stylometric_row, stylometrics, STYLOMETRIC_NAMES, STYLOMETRIC_WIDTH};
pub use text::{char_ngrams, tokenize_words, word_ngrams, StopWords};
pub use vocab::{fit_vocabulary, transform_tfidf, Vocabulary, VocabularyBuilder};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturizerConfig {
    pub max_features_word: usize,
    pub max_features_char: usize,
    pub word_ngram_range: (usize, usize),
    pub char_ngram_range: (usize, usize),
    pub lowercase: bool,
    pub stop_words: StopWords,
    pub sublinear_tf: bool,
}

impl Default for FeaturizerConfig {
    fn default() -> Self {
        Self {
            max_features_word: 20_000,
            max_features_char: 10_000,
            word_ngram_range: (1, 2),
            char_ngram_range: (3, 5),
            lowercase: true,
            stop_words: StopWords::english(),
            sublinear_tf: true,
        }
    }
}

impl FeaturizerConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("word", self.word_ngram_range),
            ("char", self.char_ngram_range),
        ] {
            if lo == 0 || lo > hi {
                return Err(Error::InvalidArgument(format!(
                    "{name} n-gram range ({lo}, {hi}) needs 1 <= lo <= hi"
                )));
            }
        }
        if self.max_features_word == 0 || self.max_features_char == 0 {
            return Err(Error::InvalidArgument("max_features must be at least 1".into()));
        }
        Ok(())
    }

    fn word_terms(&self, text: &str) -> Vec<String> {
        let tokens = tokenize_words(text, self.lowercase, &self.stop_words);
        word_ngrams(&tokens, self.word_ngram_range)
    }

    fn char_source(&self, text: &str) -> String {
        if self.lowercase {
            text.to_lowercase()
        } else {
            text.to_owned()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedFeaturizer {
    config: FeaturizerConfig,
    word_vocab: Vocabulary,
    char_vocab: Vocabulary,
}

impl FittedFeaturizer {
    /// Fits both vocabularies on the training texts.
    pub fn fit<S: AsRef<str>>(config: FeaturizerConfig, texts: &[S]) -> Result<Self> {
        config.validate()?;
        if texts.is_empty() {
            return Err(Error::Fit("no training texts".into()));
        }
        let mut words = VocabularyBuilder::new();
        let mut chars = VocabularyBuilder::new();
        for text in texts {
            let text = text.as_ref();
            let terms = config.word_terms(text);
            words.add_document(terms.iter().map(String::as_str));
            let source = config.char_source(text);
            let mut grams = Vec::new();
            text::for_each_char_ngram(&source, config.char_ngram_range, |g| grams.push(g));
            chars.add_document(grams);
        }
        Ok(Self {
            word_vocab: words.build(config.max_features_word)?,
            char_vocab: chars.build(config.max_features_char)?,
            config,
        })
    }

    pub fn from_parts(
        config: FeaturizerConfig,
        word_vocab: Vocabulary,
        char_vocab: Vocabulary,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            word_vocab,
            char_vocab,
        })
    }

    pub fn config(&self) -> &FeaturizerConfig {
        &self.config
    }

    pub fn word_vocab(&self) -> &Vocabulary {
        &self.word_vocab
    }

    pub fn char_vocab(&self) -> &Vocabulary {
        &self.char_vocab
    }

    pub fn total_width(&self) -> usize {
        self.word_vocab.len() + self.char_vocab.len() + STYLOMETRIC_WIDTH
    }

    /// Human-readable name of column `j`, e.g. `word:great job`.
    pub fn column_name(&self, j: usize) -> Option<String> {
        let nw = self.word_vocab.len();
        let nc = self.char_vocab.len();
        if j < nw {
            Some(format!("word:{}", self.word_vocab.terms()[j]))
        } else if j < nw + nc {
            Some(format!("char:{}", self.char_vocab.terms()[j - nw]))
        } else {
            STYLOMETRIC_NAMES
                .get(j - nw - nc)
                .map(|s| format!("style:{s}"))
        }
    }

    pub fn transform_words<S: AsRef<str> + Sync>(&self, texts: &[S]) -> CsrMatrix {
        let rows = texts
            .par_iter()
            .map(|t| {
                let terms = self.config.word_terms(t.as_ref());
                self.word_vocab
                    .weigh(terms.iter().map(String::as_str), self.config.sublinear_tf)
            })
            .collect();
        CsrMatrix::from_rows(self.word_vocab.len(), rows).expect("weighted rows are valid")
    }

    pub fn transform_chars<S: AsRef<str> + Sync>(&self, texts: &[S]) -> CsrMatrix {
        let rows = texts
            .par_iter()
            .map(|t| {
                let source = self.config.char_source(t.as_ref());
                let mut grams = Vec::new();
                text::for_each_char_ngram(&source, self.config.char_ngram_range, |g| {
                    grams.push(g)
                });
                self.char_vocab.weigh(grams, self.config.sublinear_tf)
            })
            .collect();
        CsrMatrix::from_rows(self.char_vocab.len(), rows).expect("weighted rows are valid")
    }

    /// `[word TF-IDF | char TF-IDF | stylometrics]`, `total_width` columns.
    pub fn transform<S: AsRef<str> + Sync>(&self, texts: &[S]) -> CsrMatrix {
        let words = self.transform_words(texts);
        let chars = self.transform_chars(texts);
        let style = to_csr(&stylometrics(texts));
        hstack(&[&words, &chars, &style]).expect("blocks share the row count")
    }
}

/// Fails with a domain error if any stored entry is negative.
pub fn check_non_negative(m: &CsrMatrix) -> Result<()> {
    match m.values().iter().position(|&v| v.is_nan() || v < 0.0) {
        None => Ok(()),
        Some(k) => Err(Error::Domain(format!(
            "feature value {} at stored position {k} is negative or NaN",
            m.values()[k]
        ))),
    }
}
