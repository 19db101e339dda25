use proptest::prelude::*;
use sarcbench_core::corpus::{stratified_split_indices, SamplingConfig};
use sarcbench_core::eval::evaluate;
use sarcbench_core::features::{
    check_non_negative, stylometric_row, FeaturizerConfig, FittedFeaturizer,
};
use sarcbench_core::models::{train_random_forest, ForestParams};
use sarcbench_core::sparse::CsrMatrix;

fn labels_with_both_classes(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..2, 4..=max).prop_map(|mut y| {
        // at least two of each class so both splits can receive one
        let n = y.len();
        y[0] = 0;
        y[1] = 0;
        y[n - 2] = 1;
        y[n - 1] = 1;
        y
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn split_is_a_stratified_partition(
        y in labels_with_both_classes(300),
        fraction in 0.1..0.5f64,
        seed in any::<u64>(),
    ) {
        let cfg = SamplingConfig { sample_size: y.len(), seed, test_fraction: fraction };
        let (train, test) = stratified_split_indices(&y, &cfg).unwrap();
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..y.len()).collect::<Vec<_>>());
        for class in 0..2u8 {
            let total = y.iter().filter(|&&l| l == class).count();
            let in_test = test.iter().filter(|&&i| y[i] == class).count();
            let frac = in_test as f64 / total as f64;
            prop_assert!((frac - fraction).abs() <= 1.0 / total as f64 + 1e-12,
                "class {class}: {in_test}/{total} vs {fraction}");
        }
    }

    #[test]
    fn metrics_ignore_sample_order(
        pairs in prop::collection::vec((0u8..2, 0u8..2, 0.0..1.0f64), 2..60),
        seed in any::<u64>(),
    ) {
        let mut pairs = pairs;
        pairs[0].0 = 0;
        pairs[1].0 = 1;
        let split = |p: &[(u8, u8, f64)]| {
            (p.iter().map(|t| t.0).collect::<Vec<_>>(), p.iter().map(|t| t.1).collect::<Vec<_>>(), p.iter().map(|t| t.2).collect::<Vec<_>>())
        };
        let (y, p, s) = split(&pairs);
        let a = evaluate(&y, &p, Some(&s)).unwrap();

        let mut shuffled = pairs.clone();
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let (y, p, s) = split(&shuffled);
        let b = evaluate(&y, &p, Some(&s)).unwrap();
        prop_assert_eq!(a.confusion, b.confusion);
        prop_assert_eq!(a.accuracy, b.accuracy);
        prop_assert_eq!(a.per_class, b.per_class);
        prop_assert!((a.roc.unwrap().auc - b.roc.unwrap().auc).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn unbootstrapped_forest_fits_consistent_data(
        rows in prop::collection::btree_map(prop::collection::vec(0u8..4, 3), 0u8..2, 2..30),
    ) {
        // distinct feature vectors, so every label assignment is consistent
        let (x, mut y): (Vec<Vec<u8>>, Vec<u8>) = rows.into_iter().unzip();
        y[0] = 0;
        let n = y.len();
        y[n - 1] = 1;
        let m = CsrMatrix::from_rows(
            3,
            x.iter()
                .map(|r| r.iter().enumerate().map(|(j, &v)| (j, v as f64)).collect())
                .collect(),
        )
        .unwrap();
        let params = ForestParams { n_trees: 5, seed: 3, max_features: None, bootstrap: false };
        let forest = train_random_forest(&m, &y, &params).unwrap();
        prop_assert_eq!(forest.predict(&m).unwrap(), y);
    }

    #[test]
    fn features_are_non_negative(texts in prop::collection::vec("[A-Za-z !?.,']{0,40}", 1..12)) {
        let cfg = FeaturizerConfig { max_features_word: 50, max_features_char: 80, ..Default::default() };
        let f = FittedFeaturizer::fit(cfg, &texts).unwrap();
        let x = f.transform(&texts);
        prop_assert!(check_non_negative(&x).is_ok());
        prop_assert_eq!(x.n_cols(), f.total_width());
    }

    #[test]
    fn stylometrics_are_bounded(text in "\\PC{0,60}") {
        let r = stylometric_row(&text);
        prop_assert_eq!(r[0], text.chars().count() as f64);
        prop_assert!(r[1] >= 1.0);
        prop_assert!(r.iter().all(|v| v.is_finite() && *v >= 0.0));
        prop_assert!(r[4] <= 1.0);
    }
}

#[test]
fn transform_does_not_depend_on_batch_composition() {
    let texts = ["Oh great, another Monday!!", "the report is due friday", "Sure, that will work?"];
    let f = FittedFeaturizer::fit(FeaturizerConfig::default(), &texts).unwrap();
    let whole = f.transform(&texts);
    for (i, t) in texts.iter().enumerate() {
        let single = f.transform(&[*t]);
        assert_eq!(single.row(0), whole.row(i));
    }
}
