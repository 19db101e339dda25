use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::sync::OnceLock;

use clap::Parser;
use sarcbench::artifact::{Manifest, MetricsDocument, ModelArtifact, FORMAT_VERSION};
use sarcbench::commands;
use sarcbench::plot::roc_to_pixel;
use sarcbench::{Cli, Command, RunConfig};
use sarcbench_core::corpus::LabeledDataset;
use sarcbench_core::features::{FeaturizerConfig, FittedFeaturizer};
use sarcbench_core::models::{train, ModelKind, TrainConfig};
use tempfile::TempDir;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/sarc_sample.tsv")
}

fn config(out: &Path) -> RunConfig {
    let mut cfg = RunConfig::new(out);
    cfg.input = Some(fixture());
    cfg.sampling.sample_size = 190;
    cfg.timestamps = false;
    cfg
}

/// One full run shared by the read-only tests below.
fn shared_run() -> &'static (TempDir, RunConfig) {
    static RUN: OnceLock<(TempDir, RunConfig)> = OnceLock::new();
    RUN.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(dir.path());
        commands::run_all(&cfg).unwrap();
        (dir, cfg)
    })
}

fn attr(node: roxmltree::Node, name: &str) -> String {
    node.attribute(name).unwrap_or_default().to_string()
}

#[test]
fn heatmap_counts_match_metrics() {
    let (_, cfg) = shared_run();
    let metrics = MetricsDocument::load(&cfg.metrics_path()).unwrap();
    let cm = metrics.models["nb"].report.confusion.as_rows();
    let svg = fs::read_to_string(cfg.plots_dir().join("confusion_matrix_nb.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();

    let counts: Vec<_> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("count"))
        .collect();
    assert_eq!(counts.len(), 4);
    let max = cm.iter().flatten().copied().max().unwrap();
    for node in counts {
        let r: usize = attr(node, "data-row").parse().unwrap();
        let c: usize = attr(node, "data-col").parse().unwrap();
        let shown: usize = node.text().unwrap().parse().unwrap();
        assert_eq!(shown, cm[r][c]);
        let want = if shown as f64 > max as f64 / 2.0 { "white" } else { "black" };
        assert_eq!(attr(node, "fill"), want);
    }
    let labels: Vec<&str> = doc.descendants().filter_map(|n| n.text()).collect();
    assert!(labels.contains(&"Predicted label"));
    assert!(labels.contains(&"True label"));
}

#[test]
fn roc_plot_spans_the_unit_square() {
    let (_, cfg) = shared_run();
    let metrics = MetricsDocument::load(&cfg.metrics_path()).unwrap();
    let auc = metrics.models["nb"].report.roc.as_ref().unwrap().auc;
    let svg = fs::read_to_string(cfg.plots_dir().join("roc_curve_nb.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();

    let line = doc
        .descendants()
        .find(|n| n.attribute("class") == Some("roc"))
        .unwrap();
    assert!(line.attribute("stroke-dasharray").is_none());
    let points: Vec<(f64, f64)> = attr(line, "points")
        .split(' ')
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(points[0], roc_to_pixel(0.0, 0.0));
    assert_eq!(*points.last().unwrap(), roc_to_pixel(1.0, 1.0));

    let baseline = doc
        .descendants()
        .find(|n| n.attribute("class") == Some("baseline"))
        .unwrap();
    assert!(baseline.attribute("stroke-dasharray").is_some());

    let legend: Vec<&str> = doc
        .descendants()
        .filter(|n| n.attribute("class") == Some("legend"))
        .filter_map(|n| n.text())
        .collect();
    assert_eq!(legend, [format!("Naive Bayes (AUC = {auc:.3})").as_str(), "Random baseline"]);
}

#[test]
fn artifacts_round_trip_with_identical_predictions() {
    let (_, cfg) = shared_run();
    let test: LabeledDataset = sarcbench::artifact::read_json(&cfg.test_path()).unwrap();
    let copy_dir = tempfile::tempdir().unwrap();
    for kind in ModelKind::ALL {
        let a = ModelArtifact::load(&cfg.artifact_path(kind)).unwrap();
        let copy = copy_dir.path().join("copy.json");
        a.save(&copy).unwrap();
        let b = ModelArtifact::load(&copy).unwrap();
        assert_eq!(a, b);
        let x = a.featurizer.transform(test.texts());
        assert_eq!(a.model.predict(&x).unwrap(), b.model.predict(&x).unwrap());
        assert_eq!(fs::read(&copy).unwrap(), fs::read(cfg.artifact_path(kind)).unwrap());
    }
}

#[test]
fn metrics_cover_requested_models_and_roc_only_for_nb() {
    let (_, cfg) = shared_run();
    let metrics = MetricsDocument::load(&cfg.metrics_path()).unwrap();
    assert_eq!(metrics.models.len(), 4);
    for (name, m) in &metrics.models {
        assert_eq!(m.report.roc.is_some(), name == "nb");
        assert_eq!(m.report.confusion.total(), m.report.n_samples);
    }
    assert!(metrics.models["logreg"].fit.is_some());
    assert!(metrics.models["nb"].fit.is_none());
    assert_eq!(metrics.provenance.created_at, None);
    let table = fs::read_to_string(cfg.metrics_table_path()).unwrap();
    assert!(table.contains("Model                   Accuracy Precision    Recall        F1"));
}

#[test]
fn training_never_reads_the_test_split() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.models = vec![ModelKind::Nb, ModelKind::Logreg];
    commands::prepare(&cfg).unwrap();
    fs::remove_file(cfg.test_path()).unwrap();
    let outcome = commands::train(&cfg).unwrap();
    assert!(outcome.failed.is_empty());
    assert_eq!(outcome.written.len(), 2);
    assert_eq!(fs::read_dir(cfg.models_dir()).unwrap().count(), 2);
}

#[test]
fn every_stage_output_exists_after_run_all() {
    let (_, cfg) = shared_run();
    let mut expected = vec![
        cfg.train_path(),
        cfg.test_path(),
        cfg.manifest_path(),
        cfg.metrics_path(),
        cfg.metrics_table_path(),
        cfg.plots_dir().join("confusion_matrix_nb.svg"),
        cfg.plots_dir().join("roc_curve_nb.svg"),
    ];
    expected.extend(ModelKind::ALL.map(|k| cfg.artifact_path(k)));
    for p in expected {
        assert!(p.is_file(), "{} missing", p.display());
    }
}

#[test]
fn metrics_reload_equals_the_in_memory_document() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.models = vec![ModelKind::Nb, ModelKind::Svm];
    commands::prepare(&cfg).unwrap();
    commands::train(&cfg).unwrap();

    let train_set: LabeledDataset = sarcbench::artifact::read_json(&cfg.train_path()).unwrap();
    let artifact = ModelArtifact::load(&cfg.artifact_path(ModelKind::Nb)).unwrap();
    let before = artifact.featurizer.transform(train_set.texts());
    let (doc, _) = commands::evaluate(&cfg).unwrap();
    let after = artifact.featurizer.transform(train_set.texts());
    assert_eq!(before, after);

    assert_eq!(MetricsDocument::load(&cfg.metrics_path()).unwrap(), doc);
    assert_eq!(doc.models.keys().collect::<Vec<_>>(), ["nb", "svm"]);
}

#[test]
fn unknown_format_version_is_rejected() {
    let (_, cfg) = shared_run();
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(cfg.artifact_path(ModelKind::Nb)).unwrap();
    let tampered = text.replacen(
        &format!("\"format_version\":{FORMAT_VERSION}"),
        "\"format_version\":99",
        1,
    );
    assert_ne!(text, tampered);
    let path = dir.path().join("nb.json");
    fs::write(&path, tampered).unwrap();
    let err = ModelArtifact::load(&path).unwrap_err();
    assert!(format!("{err:#}").contains("unsupported format_version 99"));
}

#[test]
fn mismatched_featurizer_width_is_rejected() {
    let (_, cfg) = shared_run();
    let mut a = ModelArtifact::load(&cfg.artifact_path(ModelKind::Nb)).unwrap();
    let texts = ["just two words", "and some more"];
    a.featurizer = FittedFeaturizer::fit(FeaturizerConfig::default(), &texts).unwrap();
    let x = a.featurizer.transform(&texts);
    let other = FittedFeaturizer::fit(FeaturizerConfig::default(), &["yes", "yes"]).unwrap();
    assert_ne!(other.total_width(), a.featurizer.total_width());
    a.model = train(ModelKind::Nb, &x, &[0, 1], &TrainConfig::default()).unwrap();
    a.featurizer = other;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nb.json");
    a.save(&path).unwrap();
    let err = ModelArtifact::load(&path).unwrap_err();
    assert!(err.to_string().contains("columns but the model expects"), "{err}");
}

#[test]
fn missing_artifacts_point_at_the_train_command() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.models = vec![ModelKind::Svm];
    commands::prepare(&cfg).unwrap();
    let err = commands::evaluate(&cfg).unwrap_err().to_string();
    assert!(err.contains("sarcbench train"), "{err}");
    let err = commands::plot(&cfg).unwrap_err().to_string();
    assert!(err.contains("sarcbench train --models nb"), "{err}");
}

#[test]
fn stages_before_prepare_fail_clearly() {
    let dir = tempfile::tempdir().unwrap();
    let err = commands::train(&config(dir.path())).err().unwrap().to_string();
    assert!(err.contains("sarcbench prepare"), "{err}");
}

#[test]
fn prepare_is_idempotent_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    let first = commands::prepare(&cfg).unwrap();
    let bytes = fs::read(cfg.manifest_path()).unwrap();
    let second = commands::prepare(&cfg).unwrap();
    assert_eq!(first, second);
    let kept = first.stats.sampled - first.stats.blank_removed;
    assert_eq!(first.test.rows, (kept as f64 * 0.2).round() as usize);
    assert_eq!(first.train.rows + first.test.rows, kept);
    for class in 0..2 {
        let total = first.train.class_counts[class] + first.test.class_counts[class];
        let want = total as f64 * 0.2;
        assert!((first.test.class_counts[class] as f64 - want).abs() <= 1.0);
    }
    assert_eq!(bytes, fs::read(cfg.manifest_path()).unwrap());

    cfg.sampling.seed = 43;
    let other: Manifest = commands::prepare(&cfg).unwrap();
    assert_ne!(other.train.digest, first.train.digest);
    assert_eq!(other.provenance.corpus_fingerprint, first.provenance.corpus_fingerprint);
}

#[test]
fn timestamps_are_written_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path());
    cfg.timestamps = true;
    let m = commands::prepare(&cfg).unwrap();
    let stamp = m.provenance.created_at.unwrap();
    assert!(chrono::DateTime::parse_from_rfc3339(&stamp).is_ok(), "{stamp}");
}

#[test]
fn argument_parsing() {
    let cli = Cli::try_parse_from([
        "sarcbench", "run-all", "--input", "x.tsv", "--models", "nb,svm", "--seed", "7",
        "--sample-size", "50", "--test-fraction", "0.25", "--label-col", "1", "--text-col", "3",
        "--out", "o", "--no-timestamp",
    ])
    .unwrap();
    let Command::RunAll(args) = cli.command else { panic!("wrong subcommand") };
    let cfg = RunConfig::try_from(args).unwrap();
    assert_eq!(cfg.models, [ModelKind::Nb, ModelKind::Svm]);
    assert_eq!((cfg.sampling.seed, cfg.sampling.sample_size), (7, 50));
    assert_eq!((cfg.columns.label_col, cfg.columns.text_col), (1, 3));
    assert!(!cfg.timestamps);

    let Command::Train(args) = Cli::try_parse_from(["sarcbench", "train"]).unwrap().command else {
        panic!("wrong subcommand")
    };
    let cfg = RunConfig::try_from(args).unwrap();
    assert_eq!(cfg.models, ModelKind::ALL);
    assert_eq!((cfg.sampling.sample_size, cfg.sampling.seed), (100_000, 42));
    assert_eq!(cfg.sampling.test_fraction, 0.2);
    assert_eq!((cfg.columns.label_col, cfg.columns.text_col), (0, 9));
    assert!(cfg.input.is_none());

    for bad in [
        vec!["sarcbench", "train", "--models", ""],
        vec!["sarcbench", "train", "--models", "tree"],
        vec!["sarcbench", "train", "--test-fraction", "1.5"],
        vec!["sarcbench", "train", "--label-col", "4", "--text-col", "4"],
    ] {
        let Command::Train(args) = Cli::try_parse_from(&bad).unwrap().command else { unreachable!() };
        assert!(RunConfig::try_from(args).is_err(), "{bad:?}");
    }
}

#[test]
fn binary_reports_errors_with_nonzero_exit() {
    let bin = env!("CARGO_BIN_EXE_sarcbench");
    let out = Process::new(bin).arg("--help").output().unwrap();
    assert!(out.status.success());
    let help = String::from_utf8_lossy(&out.stdout);
    for sub in ["prepare", "train", "evaluate", "plot", "run-all"] {
        assert!(help.contains(sub), "{help}");
    }

    let dir = tempfile::tempdir().unwrap();
    let out = Process::new(bin)
        .args(["prepare", "--input"])
        .arg(dir.path().join("missing.tsv"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.tsv"));
}
