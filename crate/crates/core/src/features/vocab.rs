//! Term vocabularies with smoothed IDF weights, and TF-IDF row weighting.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::{normalize_in_place, CsrMatrix};

/// Frozen term-to-column mapping. Columns follow the lexicographic order of
/// the kept terms, and `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    terms: Vec<String>,
    idf: Vec<f64>,
    doc_count: usize,
    index: HashMap<String, usize>,
}

/// Serialized form: `(term, column, idf)` triples sorted by column.
#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    doc_count: usize,
    entries: Vec<(String, usize, f64)>,
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        Self {
            doc_count: v.doc_count,
            entries: v
                .terms
                .into_iter()
                .zip(v.idf)
                .enumerate()
                .map(|(i, (t, w))| (t, i, w))
                .collect(),
        }
    }
}

impl TryFrom<VocabularyRepr> for Vocabulary {
    type Error = Error;

    fn try_from(r: VocabularyRepr) -> Result<Self> {
        let mut terms = Vec::with_capacity(r.entries.len());
        let mut idf = Vec::with_capacity(r.entries.len());
        for (i, (term, col, w)) in r.entries.into_iter().enumerate() {
            if col != i {
                return Err(Error::Fit(format!(
                    "vocabulary entry {i} claims column {col}"
                )));
            }
            terms.push(term);
            idf.push(w);
        }
        Vocabulary::from_parts(terms, idf, r.doc_count)
    }
}

impl Vocabulary {
    /// Rebuilds a vocabulary from terms in column order.
    pub fn from_parts(terms: Vec<String>, idf: Vec<f64>, doc_count: usize) -> Result<Self> {
        if terms.len() != idf.len() {
            return Err(Error::Shape(format!(
                "{} terms but {} idf weights",
                terms.len(),
                idf.len()
            )));
        }
        if terms.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Fit("vocabulary terms are not strictly sorted".into()));
        }
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Self {
            terms,
            idf,
            doc_count,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// One TF-IDF row: `(column, weight)` pairs sorted by column with unit
    /// Euclidean norm, or empty when no term is in the vocabulary.
    pub fn weigh<'a, I>(&self, terms: I, sublinear: bool) -> Vec<(usize, f64)>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut cols: Vec<usize> = terms
            .into_iter()
            .filter_map(|t| self.index_of(t))
            .collect();
        cols.sort_unstable();
        let mut row: Vec<(usize, f64)> = Vec::new();
        for c in cols {
            match row.last_mut() {
                Some((last, tf)) if *last == c => *tf += 1.0,
                _ => row.push((c, 1.0)),
            }
        }
        let mut weights: Vec<f64> = row
            .iter()
            .map(|&(c, tf)| {
                let tf = if sublinear { tf.ln() + 1.0 } else { tf };
                tf * self.idf[c]
            })
            .collect();
        normalize_in_place(&mut weights);
        row.iter()
            .zip(weights)
            .map(|(&(c, _), w)| (c, w))
            .collect()
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct TermStats {
    count: u64,
    doc_freq: u64,
    last_doc: u64,
}

/// Accumulates occurrence counts and document frequencies one document at a
/// time.
#[derive(Debug, Default)]
pub struct VocabularyBuilder {
    stats: HashMap<String, TermStats>,
    doc_count: u64,
}

impl VocabularyBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_document<'a, I>(&mut self, terms: I)
    where
        I: IntoIterator<Item = &'a str>,
    {
        self.doc_count += 1;
        let doc = self.doc_count;
        for term in terms {
            let entry = match self.stats.get_mut(term) {
                Some(e) => e,
                None => self.stats.entry(term.to_owned()).or_default(),
            };
            entry.count += 1;
            if entry.last_doc != doc {
                entry.last_doc = doc;
                entry.doc_freq += 1;
            }
        }
    }

    /// Keeps the `max_features` most frequent terms by total occurrence
    /// count, ties broken by ascending term order.
    pub fn build(self, max_features: usize) -> Result<Vocabulary> {
        if self.doc_count == 0 {
            return Err(Error::Fit("no documents to fit on".into()));
        }
        if max_features == 0 {
            return Err(Error::InvalidArgument("max_features must be at least 1".into()));
        }
        let mut ranked: Vec<(String, TermStats)> = self.stats.into_iter().collect();
        if ranked.len() > max_features {
            ranked.sort_unstable_by(|a, b| b.1.count.cmp(&a.1.count).then_with(|| a.0.cmp(&b.0)));
            ranked.truncate(max_features);
        }
        ranked.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        let n = self.doc_count as f64;
        let idf = ranked
            .iter()
            .map(|(_, s)| ((1.0 + n) / (1.0 + s.doc_freq as f64)).ln() + 1.0)
            .collect();
        let terms = ranked.into_iter().map(|(t, _)| t).collect();
        Vocabulary::from_parts(terms, idf, self.doc_count as usize)
    }
}

pub fn fit_vocabulary(docs: &[Vec<String>], max_features: usize) -> Result<Vocabulary> {
    if docs.is_empty() {
        return Err(Error::Fit("no documents to fit on".into()));
    }
    let mut builder = VocabularyBuilder::new();
    for doc in docs {
        builder.add_document(doc.iter().map(String::as_str));
    }
    builder.build(max_features)
}

pub fn transform_tfidf(vocab: &Vocabulary, docs: &[Vec<String>], sublinear: bool) -> CsrMatrix {
    let rows = docs
        .iter()
        .map(|d| vocab.weigh(d.iter().map(String::as_str), sublinear))
        .collect();
    CsrMatrix::from_rows(vocab.len(), rows).expect("rows are sorted and in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn idf_values() {
        let v = fit_vocabulary(&docs(&[&["aa", "bb"], &["aa"]]), 10).unwrap();
        assert_eq!(v.terms(), &["aa", "bb"]);
        assert_eq!(v.idf()[0], 1.0);
        assert!((v.idf()[1] - 1.405465108108164).abs() < 1e-12);
        assert_eq!(v.doc_count(), 2);
    }

    #[test]
    fn max_features_tie_break_is_lexicographic() {
        let d = docs(&[&["cc", "aa", "bb"], &["aa", "bb", "cc"], &["aa"]]);
        let v = fit_vocabulary(&d, 2).unwrap();
        assert_eq!(v.terms(), &["aa", "bb"]);
    }

    #[test]
    fn ranking_uses_total_count_not_doc_freq() {
        // "zz" appears in one document but five times; "yy" in two documents once each.
        let d = docs(&[&["zz", "zz", "zz", "zz", "zz", "yy"], &["yy", "xx"]]);
        let v = fit_vocabulary(&d, 1).unwrap();
        assert_eq!(v.terms(), &["zz"]);
    }

    #[test]
    fn empty_fit_fails() {
        assert!(matches!(fit_vocabulary(&[], 5), Err(Error::Fit(_))));
    }

    #[test]
    fn sublinear_weighting() {
        let v = Vocabulary::from_parts(
            vec!["aa".into(), "bb".into()],
            vec![1.405465108108164, 1.0],
            2,
        )
        .unwrap();
        let m = transform_tfidf(&v, &docs(&[&["aa", "aa", "bb"]]), true);
        let (cols, vals) = m.row(0);
        assert_eq!(cols, &[0, 1]);
        // (1 + ln 2) * (ln 1.5 + 1) = 2.379659..., then divided by the row norm.
        assert!((vals[0] - 0.921907).abs() < 1e-6);
        assert!((vals[1] - 0.387411).abs() < 1e-6);
    }

    #[test]
    fn single_term_and_oov_rows() {
        let v = fit_vocabulary(&docs(&[&["aa", "bb"], &["aa"]]), 10).unwrap();
        let m = transform_tfidf(&v, &docs(&[&["bb", "bb", "bb"], &["qq"], &[]]), true);
        assert_eq!(m.row(0), (&[1usize][..], &[1.0][..]));
        assert!(m.row(1).0.is_empty());
        assert!(m.row(2).0.is_empty());
    }

    #[test]
    fn serde_round_trip_rebuilds_index() {
        let v = fit_vocabulary(&docs(&[&["b b", "aa"], &["cc"]]), 10).unwrap();
        let json = serde_json_like(&v);
        assert_eq!(json, v);
        assert_eq!(json.index_of("cc"), Some(2));
    }

    fn serde_json_like(v: &Vocabulary) -> Vocabulary {
        let repr: VocabularyRepr = v.clone().into();
        Vocabulary::try_from(repr).unwrap()
    }

    #[test]
    fn rejects_unsorted_parts() {
        assert!(Vocabulary::from_parts(vec!["b".into(), "a".into()], vec![1.0, 1.0], 1).is_err());
    }
}
