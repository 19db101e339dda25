//! The pipeline stages. Each stage reads what the previous one wrote under
//! the output directory, so they can be run one at a time or all together.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};

use sarcbench_core::corpus::{self, LabeledDataset};
use sarcbench_core::eval::{self, summary_table};
use sarcbench_core::features::{check_non_negative, FeaturizerConfig, FittedFeaturizer};
use sarcbench_core::models::{self, ModelKind, TrainConfig};
use sarcbench_core::sparse::CsrMatrix;

use crate::artifact::{
    read_json, sha256_hex, write_atomic, write_json, Manifest, MetricsDocument, ModelArtifact,
    ModelMetrics, Provenance, SplitSummary, FORMAT_VERSION,
};
use crate::config::RunConfig;
use crate::plot;

fn timestamp(cfg: &RunConfig) -> Option<String> {
    cfg.timestamps
        .then(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
}

fn load_manifest(cfg: &RunConfig) -> Result<Manifest> {
    let path = cfg.manifest_path();
    if !path.exists() {
        bail!(
            "{} not found; run `sarcbench prepare` first",
            path.display()
        );
    }
    read_json(&path)
}

fn fresh_provenance(manifest: &Manifest, cfg: &RunConfig) -> Provenance {
    Provenance {
        created_at: timestamp(cfg),
        ..manifest.provenance.clone()
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Manifest> {
    let input = cfg.input_path()?;
    info!("Loading corpus from {}", input.display());
    let started = Instant::now();
    let raw = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let fingerprint = sha256_hex(&raw);
    drop(raw);

    let prepared = corpus::prepare(input, &cfg.columns, &cfg.sampling)?;
    let stats = &prepared.stats;
    info!(
        "Read {} records ({} malformed lines, {} bad labels); sampled {}, dropped {} blank",
        stats.records_read, stats.malformed_lines, stats.bad_labels, stats.sampled, stats.blank_removed
    );

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        provenance: Provenance {
            seed: cfg.sampling.seed,
            sample_size: cfg.sampling.sample_size,
            test_fraction: cfg.sampling.test_fraction,
            label_col: cfg.columns.label_col,
            text_col: cfg.columns.text_col,
            corpus_fingerprint: fingerprint,
            created_at: timestamp(cfg),
        },
        stats: prepared.stats.clone(),
        train: SplitSummary::of(&prepared.train)?,
        test: SplitSummary::of(&prepared.test)?,
    };
    write_json(&cfg.train_path(), &prepared.train, false)?;
    write_json(&cfg.test_path(), &prepared.test, false)?;
    write_json(&cfg.manifest_path(), &manifest, true)?;
    info!(
        "Wrote {} train / {} test rows to {} ({:.1}s)",
        manifest.train.rows,
        manifest.test.rows,
        cfg.data_dir().display(),
        started.elapsed().as_secs_f64()
    );
    Ok(manifest)
}

pub struct TrainOutcome {
    pub written: Vec<(ModelKind, PathBuf)>,
    pub failed: Vec<(ModelKind, String)>,
}

/// Fits the featurizer on the training split and trains every requested
/// model. A model that fails to train is reported without stopping the rest.
pub fn train(cfg: &RunConfig) -> Result<TrainOutcome> {
    let manifest = load_manifest(cfg)?;
    let train: LabeledDataset = read_json(&cfg.train_path())?;
    info!("Fitting featurizer on {} training rows", train.len());
    let started = Instant::now();
    let featurizer = FittedFeaturizer::fit(FeaturizerConfig::default(), train.texts())?;
    let x = featurizer.transform(train.texts());
    info!(
        "Feature matrix {} x {} with {} non-zeros ({:.1}s)",
        x.n_rows(),
        x.n_cols(),
        x.nnz(),
        started.elapsed().as_secs_f64()
    );

    let train_cfg = TrainConfig {
        rf_seed: cfg.sampling.seed,
        ..TrainConfig::default()
    };
    let provenance = fresh_provenance(&manifest, cfg);
    let mut outcome = TrainOutcome {
        written: Vec::new(),
        failed: Vec::new(),
    };
    for &kind in &cfg.models {
        info!("Training {}", kind.display_name());
        let started = Instant::now();
        let result = train_one(kind, &x, train.labels(), &train_cfg).and_then(|model| {
            if let Some(fit) = model.fit_info() {
                if !fit.converged {
                    warn!(
                        "{} stopped after {} iterations without converging (gradient norm {:.3e})",
                        kind.display_name(),
                        fit.iterations,
                        fit.grad_inf_norm
                    );
                }
            }
            let artifact = ModelArtifact {
                format_version: FORMAT_VERSION,
                name: kind.name().to_string(),
                provenance: provenance.clone(),
                featurizer: featurizer.clone(),
                model,
            };
            let path = cfg.artifact_path(kind);
            artifact.save(&path)?;
            Ok(path)
        });
        match result {
            Ok(path) => {
                info!(
                    "Saved {} to {} ({:.1}s)",
                    kind.display_name(),
                    path.display(),
                    started.elapsed().as_secs_f64()
                );
                outcome.written.push((kind, path));
            }
            Err(e) => {
                warn!("{} failed: {e:#}", kind.display_name());
                outcome.failed.push((kind, format!("{e:#}")));
            }
        }
    }
    Ok(outcome)
}

fn train_one(kind: ModelKind, x: &CsrMatrix, y: &[u8], cfg: &TrainConfig) -> Result<models::TrainedModel> {
    if kind == ModelKind::Nb {
        check_non_negative(x)?;
    }
    Ok(models::train(kind, x, y, cfg)?)
}

/// Scores each requested model on the test split and writes `metrics.json`
/// and `metrics.txt`. Returns the document and the printable report.
pub fn evaluate(cfg: &RunConfig) -> Result<(MetricsDocument, String)> {
    let manifest = load_manifest(cfg)?;
    let test: LabeledDataset = read_json(&cfg.test_path())?;
    let mut docs = BTreeMap::new();
    let mut cached: Option<(FittedFeaturizer, CsrMatrix)> = None;
    let mut text = String::new();

    for &kind in &cfg.models {
        let path = cfg.artifact_path(kind);
        if !path.exists() {
            bail!(
                "no artifact for {} at {}; run `sarcbench train --models {kind}` first",
                kind.display_name(),
                path.display()
            );
        }
        let artifact = ModelArtifact::load(&path)?;
        if artifact.model.kind() != kind {
            bail!("{} holds a {} model", path.display(), artifact.model.kind());
        }
        let x = match &cached {
            Some((f, x)) if *f == artifact.featurizer => x,
            _ => {
                let x = artifact.featurizer.transform(test.texts());
                &cached.insert((artifact.featurizer.clone(), x)).1
            }
        };
        let pred = artifact.model.predict(x)?;
        let scores: Option<Vec<f64>> = if kind == ModelKind::Nb {
            artifact
                .model
                .predict_proba(x)?
                .map(|p| p.iter().map(|r| r[1]).collect())
        } else {
            None
        };
        let report = eval::evaluate(test.labels(), &pred, scores.as_deref())?;
        text.push_str(&format!("{}\n{}\n", kind.display_name(), report.classification_report()));
        docs.insert(
            kind.name().to_string(),
            ModelMetrics {
                display_name: kind.display_name().to_string(),
                fit: artifact.model.fit_info().cloned(),
                report,
            },
        );
    }

    let rows: Vec<(&str, &eval::EvalReport)> = cfg
        .models
        .iter()
        .map(|k| (k.display_name(), &docs[k.name()].report))
        .collect();
    text.push_str(&summary_table(rows));
    if let Some(nb) = docs.get(ModelKind::Nb.name()) {
        let [[tn, fp], [fn_, tp]] = nb.report.confusion.as_rows();
        text.push_str(&format!(
            "\nNaive Bayes confusion matrix (rows: true label, columns: predicted)\n{tn:>8} {fp:>8}\n{fn_:>8} {tp:>8}\n"
        ));
        if let Some(roc) = &nb.report.roc {
            text.push_str(&format!("Naive Bayes ROC AUC: {:.3}\n", roc.auc));
        }
    }

    let doc = MetricsDocument {
        format_version: FORMAT_VERSION,
        provenance: fresh_provenance(&manifest, cfg),
        models: docs,
    };
    write_json(&cfg.metrics_path(), &doc, true)?;
    write_atomic(&cfg.metrics_table_path(), text.as_bytes())?;
    Ok((doc, text))
}

/// Renders the Naive Bayes confusion heatmap and ROC curve.
pub fn plot(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let artifact = cfg.artifact_path(ModelKind::Nb);
    if !artifact.exists() {
        bail!(
            "plots need the Naive Bayes model but {} is missing; run `sarcbench train --models nb` first",
            artifact.display()
        );
    }
    let metrics_path = cfg.metrics_path();
    if !metrics_path.exists() {
        bail!(
            "{} not found; run `sarcbench evaluate --models nb` first",
            metrics_path.display()
        );
    }
    let doc = MetricsDocument::load(&metrics_path)?;
    let nb = doc.models.get(ModelKind::Nb.name()).ok_or_else(|| {
        anyhow!("metrics.json has no Naive Bayes entry; run `sarcbench evaluate --models nb` first")
    })?;
    let roc = nb
        .report
        .roc
        .as_ref()
        .ok_or_else(|| anyhow!("Naive Bayes metrics carry no ROC curve"))?;

    let cm_path = cfg.plots_dir().join("confusion_matrix_nb.svg");
    let roc_path = cfg.plots_dir().join("roc_curve_nb.svg");
    write_atomic(
        &cm_path,
        plot::confusion_svg(&nb.report.confusion, "Confusion Matrix (Naive Bayes)").as_bytes(),
    )?;
    write_atomic(&roc_path, plot::roc_svg(roc, "Naive Bayes").as_bytes())?;
    info!("Wrote {} and {}", cm_path.display(), roc_path.display());
    Ok(vec![cm_path, roc_path])
}

/// Every stage in order, stopping at the first one that fails.
pub fn run_all(cfg: &RunConfig) -> Result<String> {
    prepare(cfg)?;
    let outcome = train(cfg)?;
    check_training(&outcome)?;
    let (_, report) = evaluate(cfg)?;
    if cfg.models.contains(&ModelKind::Nb) {
        plot(cfg)?;
    } else {
        info!("Skipping plots: Naive Bayes was not requested");
    }
    Ok(report)
}

pub fn check_training(outcome: &TrainOutcome) -> Result<()> {
    if outcome.failed.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = outcome
        .failed
        .iter()
        .map(|(k, e)| format!("{k}: {e}"))
        .collect();
    bail!("training failed for {}", list.join("; "))
}
