//! On-disk formats: prepared datasets and their manifest, model artifacts
//! and the metrics document. Everything is JSON, written atomically.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sarcbench_core::corpus::{LabeledDataset, PrepareStats};
use sarcbench_core::eval::EvalReport;
use sarcbench_core::features::FittedFeaturizer;
use sarcbench_core::models::{FitInfo, TrainedModel};

pub const FORMAT_VERSION: u32 = 1;

/// Writes to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", path.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T, pretty: bool) -> Result<()> {
    let mut bytes = if pretty {
        serde_json::to_vec_pretty(value)?
    } else {
        serde_json::to_vec(value)?
    };
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Settings and input identity shared by every file a run writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub sample_size: usize,
    pub test_fraction: f64,
    pub label_col: usize,
    pub text_col: usize,
    /// SHA-256 of the raw input file.
    pub corpus_fingerprint: String,
    pub created_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub rows: usize,
    pub class_counts: [usize; 2],
    /// SHA-256 of the split's serialized rows.
    pub digest: String,
}

impl SplitSummary {
    pub fn of(ds: &LabeledDataset) -> Result<Self> {
        Ok(Self {
            rows: ds.len(),
            class_counts: ds.class_counts(),
            digest: sha256_hex(&serde_json::to_vec(ds)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub provenance: Provenance,
    pub stats: PrepareStats,
    pub train: SplitSummary,
    pub test: SplitSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub name: String,
    pub provenance: Provenance,
    pub featurizer: FittedFeaturizer,
    pub model: TrainedModel,
}

impl ModelArtifact {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self, false)
    }

    /// Loads an artifact, rejecting unknown format versions and featurizers
    /// whose width disagrees with the model.
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let artifact: Self = parse_versioned(&bytes)
            .with_context(|| format!("loading model artifact {}", path.display()))?;
        let (fw, mw) = (artifact.featurizer.total_width(), artifact.model.n_features());
        if fw != mw {
            bail!(
                "{}: featurizer produces {fw} columns but the model expects {mw}",
                path.display()
            );
        }
        Ok(artifact)
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<u64>,
}

fn parse_versioned<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let probe: VersionProbe = serde_json::from_slice(bytes)?;
    match probe.format_version {
        Some(v) if v == FORMAT_VERSION as u64 => Ok(serde_json::from_slice(bytes)?),
        Some(v) => bail!(
            "unsupported format_version {v}; this build reads version {FORMAT_VERSION}"
        ),
        None => bail!("missing format_version"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub display_name: String,
    pub report: EvalReport,
    pub fit: Option<FitInfo>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub format_version: u32,
    pub provenance: Provenance,
    pub models: BTreeMap<String, ModelMetrics>,
}

impl MetricsDocument {
    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        parse_versioned(&bytes).with_context(|| format!("loading metrics {}", path.display()))
    }
}
