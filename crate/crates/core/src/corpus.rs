//! SARC ingestion: tab-separated loading, label extraction, subsampling,
//! cleaning and stratified splitting.
//!
//! Randomness comes from `ChaCha8Rng::seed_from_u64(seed)`. Subsampling draws
//! from stream 0 and the stratified split from stream 1, so changing one
//! stage never shifts the other's random sequence.

use std::fs;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BZIP2_MAGIC: &[u8] = b"BZh";
const SUBSAMPLE_STREAM: u64 = 0;
const SPLIT_STREAM: u64 = 1;

/// Which tab-separated columns hold the label and the reply text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub label_col: usize,
    pub text_col: usize,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            label_col: 0,
            text_col: 9,
        }
    }
}

impl ColumnSpec {
    pub fn new(label_col: usize, text_col: usize) -> Result<Self> {
        if label_col == text_col {
            return Err(Error::InvalidArgument(format!(
                "label and text columns must differ (both {label_col})"
            )));
        }
        Ok(Self {
            label_col,
            text_col,
        })
    }

    /// Minimum number of fields a line needs to be retained.
    pub fn min_fields(&self) -> usize {
        self.label_col.max(self.text_col) + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub sample_size: usize,
    pub seed: u64,
    pub test_fraction: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            sample_size: 100_000,
            seed: 42,
            test_fraction: 0.2,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_size == 0 {
            return Err(Error::InvalidArgument("sample_size must be at least 1".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    /// 1-based line number in the decompressed input.
    pub line: usize,
    pub fields: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawRecordTable {
    pub rows: Vec<RawRecord>,
    pub skipped_count: usize,
}

/// Reply texts with their binary sarcasm labels, kept in parallel.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDataset {
    texts: Vec<String>,
    labels: Vec<u8>,
}

impl LabeledDataset {
    pub fn new(texts: Vec<String>, labels: Vec<u8>) -> Result<Self> {
        if texts.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} texts but {} labels",
                texts.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidArgument(format!("label {bad} is not 0 or 1")));
        }
        Ok(Self { texts, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn texts(&self) -> &[String] {
        &self.texts
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Number of rows per class, `[negatives, positives]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let pos = self.labels.iter().filter(|&&l| l == 1).count();
        [self.len() - pos, pos]
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            texts: indices.iter().map(|&i| self.texts[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Reads a plain or bzip2-compressed TSV file. Compression is detected from
/// the `BZh` magic bytes, not the file name.
pub fn load_sarc_tsv(path: &Path, spec: &ColumnSpec) -> Result<RawRecordTable> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let raw = fs::read(path).map_err(io_err)?;
    let bytes = if raw.starts_with(BZIP2_MAGIC) {
        let mut out = Vec::new();
        bzip2::read::MultiBzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(io_err)?;
        out
    } else {
        raw
    };
    let table = parse_tsv(&String::from_utf8_lossy(&bytes), spec);
    if table.rows.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "{}: no line has the {} fields required ({} skipped)",
            path.display(),
            spec.min_fields(),
            table.skipped_count
        )));
    }
    Ok(table)
}

/// Splits decoded text into records. Fields are separated by a bare tab with
/// no quote handling; blank lines are ignored and lines with too few fields
/// are counted in `skipped_count`.
pub fn parse_tsv(content: &str, spec: &ColumnSpec) -> RawRecordTable {
    let mut table = RawRecordTable::default();
    for (idx, line) in content.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split('\t').map(str::to_owned).collect();
        if fields.len() < spec.min_fields() {
            table.skipped_count += 1;
        } else {
            table.rows.push(RawRecord {
                line: idx + 1,
                fields,
            });
        }
    }
    table
}

/// Picks the label and text columns. Rows whose label is not `0` or `1` are
/// dropped; the second element of the result counts them.
pub fn extract_labeled(
    table: &RawRecordTable,
    spec: &ColumnSpec,
) -> Result<(LabeledDataset, usize)> {
    let mut texts = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::with_capacity(table.rows.len());
    let mut dropped = 0;
    for record in &table.rows {
        let (Some(label), Some(text)) = (
            record.fields.get(spec.label_col),
            record.fields.get(spec.text_col),
        ) else {
            dropped += 1;
            continue;
        };
        match label.trim() {
            "0" => labels.push(0),
            "1" => labels.push(1),
            _ => {
                dropped += 1;
                continue;
            }
        }
        texts.push(text.clone());
    }
    if labels.is_empty() {
        return Err(Error::EmptyCorpus(format!(
            "all {} rows lack a 0/1 label in column {}",
            table.rows.len(),
            spec.label_col
        )));
    }
    Ok((LabeledDataset { texts, labels }, dropped))
}

/// Removes rows whose text is empty or whitespace only.
pub fn clean(ds: &LabeledDataset) -> Result<LabeledDataset> {
    let keep: Vec<usize> = (0..ds.len())
        .filter(|&i| !ds.texts[i].trim().is_empty())
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyCorpus("every text is blank".into()));
    }
    Ok(ds.select(&keep))
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Row indices of a uniform sample without replacement, in draw order.
pub fn subsample_indices(n: usize, cfg: &SamplingConfig) -> Result<Vec<usize>> {
    cfg.validate()?;
    if cfg.sample_size > n {
        return Err(Error::InvalidArgument(format!(
            "cannot sample {} rows from a dataset of {n}",
            cfg.sample_size
        )));
    }
    let mut rng = rng_for(cfg.seed, SUBSAMPLE_STREAM);
    Ok(rand::seq::index::sample(&mut rng, n, cfg.sample_size).into_vec())
}

pub fn subsample(ds: &LabeledDataset, cfg: &SamplingConfig) -> Result<LabeledDataset> {
    let idx = subsample_indices(ds.len(), cfg)?;
    Ok(ds.select(&idx))
}

/// Number of test rows per class. Each class gets `floor(count * fraction)`;
/// the slots left over to reach `round(total * fraction)` go to the classes
/// with the largest fractional remainders, lower label first on ties.
pub fn stratified_test_counts(class_counts: &[usize], fraction: f64) -> Vec<usize> {
    let total: usize = class_counts.iter().sum();
    let target = (total as f64 * fraction).round() as usize;
    let exact: Vec<f64> = class_counts.iter().map(|&c| c as f64 * fraction).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..class_counts.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &c in order.iter().take(target.saturating_sub(assigned)) {
        counts[c] = (counts[c] + 1).min(class_counts[c]);
    }
    counts
}

/// Train and test row indices, each in ascending order.
pub fn stratified_split_indices(
    labels: &[u8],
    cfg: &SamplingConfig,
) -> Result<(Vec<usize>, Vec<usize>)> {
    cfg.validate()?;
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        match l {
            0 | 1 => by_class[l as usize].push(i),
            other => {
                return Err(Error::InvalidArgument(format!("label {other} is not 0 or 1")))
            }
        }
    }
    for (class, members) in by_class.iter().enumerate() {
        if members.len() < 2 {
            return Err(Error::Stratification(format!(
                "class {class} has {} member(s), need at least 2",
                members.len()
            )));
        }
    }
    let counts = stratified_test_counts(&[by_class[0].len(), by_class[1].len()], cfg.test_fraction);
    let mut rng = rng_for(cfg.seed, SPLIT_STREAM);
    let mut train = Vec::with_capacity(labels.len());
    let mut test = Vec::with_capacity(counts.iter().sum());
    for (members, &n_test) in by_class.iter_mut().zip(&counts) {
        members.shuffle(&mut rng);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Stratification(format!(
            "test fraction {} leaves an empty split",
            cfg.test_fraction
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn stratified_split(
    ds: &LabeledDataset,
    cfg: &SamplingConfig,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = stratified_split_indices(&ds.labels, cfg)?;
    Ok((ds.select(&train), ds.select(&test)))
}

/// Counters collected while preparing a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrepareStats {
    pub records_read: usize,
    pub malformed_lines: usize,
    pub bad_labels: usize,
    pub sampled: usize,
    pub blank_removed: usize,
}

#[derive(Debug, Clone)]
pub struct PreparedCorpus {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub stats: PrepareStats,
}

/// The full preparation flow: load, extract, subsample, drop blank replies,
/// then split. Blank removal runs after sampling, so `sample_size` counts
/// rows before cleaning.
pub fn prepare(path: &Path, spec: &ColumnSpec, cfg: &SamplingConfig) -> Result<PreparedCorpus> {
    let table = load_sarc_tsv(path, spec)?;
    let (labeled, bad_labels) = extract_labeled(&table, spec)?;
    let sampled = subsample(&labeled, cfg)?;
    let cleaned = clean(&sampled)?;
    let (train, test) = stratified_split(&cleaned, cfg)?;
    Ok(PreparedCorpus {
        train,
        test,
        stats: PrepareStats {
            records_read: table.rows.len(),
            malformed_lines: table.skipped_count,
            bad_labels,
            sampled: sampled.len(),
            blank_removed: sampled.len() - cleaned.len(),
        },
    })
}
