//! Tokenization and n-gram generation for the word and character channels.

use serde::{Deserialize, Serialize};

const ENGLISH_STOP_WORDS: &str = include_str!("../../resources/stop_words_en.txt");

/// A sorted stop-word list. Lookup is a binary search, which for a few
/// hundred entries is as fast as hashing and keeps the type trivially
/// serializable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct StopWords(Vec<String>);

impl StopWords {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut words: Vec<String> = words.into_iter().map(Into::into).collect();
        words.sort();
        words.dedup();
        Self(words)
    }

    /// The bundled English list (318 entries). Lines starting with `#` in the
    /// resource file are comments.
    pub fn english() -> Self {
        Self::new(
            ENGLISH_STOP_WORDS
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn none() -> Self {
        Self(Vec::new())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0
            .binary_search_by(|w| w.as_str().cmp(word))
            .is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.0
    }
}

impl From<Vec<String>> for StopWords {
    fn from(words: Vec<String>) -> Self {
        Self::new(words)
    }
}

impl From<StopWords> for Vec<String> {
    fn from(s: StopWords) -> Self {
        s.0
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Maximal runs of at least two word characters (letters, digits,
/// underscore), optionally lowercased, with stop words removed afterwards.
pub fn tokenize_words(text: &str, lowercase: bool, stop_words: &StopWords) -> Vec<String> {
    let lowered;
    let text = if lowercase {
        lowered = text.to_lowercase();
        lowered.as_str()
    } else {
        text
    };
    text.split(|c: char| !is_word_char(c))
        .filter(|tok| tok.chars().nth(1).is_some())
        .filter(|tok| !stop_words.contains(tok))
        .map(str::to_owned)
        .collect()
}

/// Contiguous n-grams for every `n` in `lo..=hi`, all unigrams first, then
/// bigrams, and so on. Words in an n-gram are joined by a single space.
pub fn word_ngrams(tokens: &[String], (lo, hi): (usize, usize)) -> Vec<String> {
    let mut out = Vec::new();
    for n in lo.max(1)..=hi {
        if n > tokens.len() {
            break;
        }
        out.extend(tokens.windows(n).map(|w| w.join(" ")));
    }
    out
}

/// Calls `f` on every character window of length `lo..=hi`, shortest
/// windows first. Whitespace and punctuation take part like any other
/// character.
pub(crate) fn for_each_char_ngram<'a>(
    text: &'a str,
    (lo, hi): (usize, usize),
    mut f: impl FnMut(&'a str),
) {
    let mut bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
    bounds.push(text.len());
    let n_chars = bounds.len() - 1;
    for n in lo.max(1)..=hi {
        if n > n_chars {
            break;
        }
        for start in 0..=n_chars - n {
            f(&text[bounds[start]..bounds[start + n]]);
        }
    }
}

pub fn char_ngrams(text: &str, range: (usize, usize), lowercase: bool) -> Vec<String> {
    let text = if lowercase {
        text.to_lowercase()
    } else {
        text.to_owned()
    };
    let mut out = Vec::new();
    for_each_char_ngram(&text, range, |g| out.push(g.to_owned()));
    out
}
