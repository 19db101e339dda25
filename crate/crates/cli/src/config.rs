use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::Args;
use sarcbench_core::corpus::{ColumnSpec, SamplingConfig};
use sarcbench_core::models::ModelKind;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// SARC export, plain or bzip2-compressed TSV without a header.
    #[arg(long)]
    pub input: Option<PathBuf>,

    #[arg(long, default_value_t = 0)]
    pub label_col: usize,

    #[arg(long, default_value_t = 9)]
    pub text_col: usize,

    #[arg(long, default_value_t = 100_000)]
    pub sample_size: usize,

    #[arg(long, default_value_t = 42)]
    pub seed: u64,

    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,

    /// Comma-separated subset of logreg, svm, nb, rf.
    #[arg(long, value_delimiter = ',', default_value = "logreg,svm,nb,rf")]
    pub models: Vec<String>,

    /// Directory for datasets, model artifacts, metrics and plots.
    #[arg(long, default_value = "sarcbench-out")]
    pub out: PathBuf,

    /// Leave creation timestamps out of every written file.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub columns: ColumnSpec,
    pub sampling: SamplingConfig,
    pub models: Vec<ModelKind>,
    pub out: PathBuf,
    pub timestamps: bool,
}

impl RunConfig {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            input: None,
            columns: ColumnSpec::default(),
            sampling: SamplingConfig::default(),
            models: ModelKind::ALL.to_vec(),
            out: out.into(),
            timestamps: true,
        }
    }

    pub fn input_path(&self) -> Result<&Path> {
        match &self.input {
            Some(p) => Ok(p),
            None => bail!("--input is required for this command"),
        }
    }

    pub fn data_dir(&self) -> PathBuf {
        self.out.join("data")
    }

    pub fn models_dir(&self) -> PathBuf {
        self.out.join("models")
    }

    pub fn plots_dir(&self) -> PathBuf {
        self.out.join("plots")
    }

    pub fn train_path(&self) -> PathBuf {
        self.data_dir().join("train.json")
    }

    pub fn test_path(&self) -> PathBuf {
        self.data_dir().join("test.json")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.data_dir().join("manifest.json")
    }

    pub fn artifact_path(&self, kind: ModelKind) -> PathBuf {
        self.models_dir().join(format!("{kind}.json"))
    }

    pub fn metrics_path(&self) -> PathBuf {
        self.out.join("metrics.json")
    }

    pub fn metrics_table_path(&self) -> PathBuf {
        self.out.join("metrics.txt")
    }
}

impl TryFrom<RunArgs> for RunConfig {
    type Error = anyhow::Error;

    fn try_from(a: RunArgs) -> Result<Self> {
        let columns = ColumnSpec::new(a.label_col, a.text_col)?;
        let sampling = SamplingConfig {
            sample_size: a.sample_size,
            seed: a.seed,
            test_fraction: a.test_fraction,
        };
        sampling.validate()?;
        let mut models = Vec::new();
        for name in a.models.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
            let kind: ModelKind = name.parse()?;
            if !models.contains(&kind) {
                models.push(kind);
            }
        }
        if models.is_empty() {
            bail!("--models must name at least one of logreg, svm, nb, rf");
        }
        Ok(Self {
            input: a.input,
            columns,
            sampling,
            models,
            out: a.out,
            timestamps: !a.no_timestamp,
        })
    }
}
