mod common;

use oodbench::metrics::{aggregate, auroc, fpr_at_tpr, MetricResult, TPR95};
use proptest::prelude::*;

use common::{pairwise_auroc, scan_fpr};

fn scores(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec((0i32..6).prop_map(|v| f64::from(v) * 0.5), 1..max_len),
        prop::collection::vec(-50.0f64..50.0, 1..max_len),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn auroc_matches_pairwise_oracle(id in scores(200), ood in scores(200)) {
        let got = auroc(&id, &ood).unwrap();
        prop_assert!((got - pairwise_auroc(&id, &ood)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn auroc_complement_symmetry(id in scores(80), ood in scores(80)) {
        let a = auroc(&id, &ood).unwrap();
        let b = auroc(&ood, &id).unwrap();
        prop_assert!((a - (1.0 - b)).abs() <= 1e-12);
    }

    #[test]
    fn metrics_invariant_under_increasing_maps(id in scores(60), ood in scores(60), scale in 0.01f64..100.0, shift in -10.0f64..10.0) {
        let base = MetricResult::compute(&id, &ood).unwrap();
        let maps: [Box<dyn Fn(f64) -> f64>; 3] = [
            Box::new(|x: f64| (x / 50.0).exp()),
            Box::new(move |x: f64| scale * x + shift),
            Box::new(|x: f64| x * x * x),
        ];
        for f in &maps {
            let ti: Vec<f64> = id.iter().map(|&v| f(v)).collect();
            let to: Vec<f64> = ood.iter().map(|&v| f(v)).collect();
            let t = MetricResult::compute(&ti, &to).unwrap();
            prop_assert_eq!(t.auroc, base.auroc);
            prop_assert_eq!(t.fpr95, base.fpr95);
        }
    }

    #[test]
    fn fpr95_matches_threshold_scan(id in scores(150), ood in scores(150)) {
        prop_assert_eq!(fpr_at_tpr(&id, &ood, TPR95).unwrap(), scan_fpr(&id, &ood, 95));
        prop_assert_eq!(fpr_at_tpr(&id, &ood, 0.9).unwrap(), scan_fpr(&id, &ood, 90));
    }

    #[test]
    fn fpr_at_full_tpr_uses_max_id(id in scores(50), ood in scores(50)) {
        let max = id.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let want = ood.iter().filter(|&&s| s <= max).count() as f64 / ood.len() as f64;
        prop_assert_eq!(fpr_at_tpr(&id, &ood, 1.0).unwrap(), want);
    }

    #[test]
    fn aggregate_is_sample_mean_and_std(values in prop::collection::vec(0.0f64..1.0, 1..12)) {
        let results: Vec<MetricResult> = values
            .iter()
            .map(|&a| MetricResult { auroc: a, fpr95: 1.0 - a, n_id: 1, n_ood: 1 })
            .collect();
        let agg = aggregate(&results).unwrap();
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        prop_assert!((agg.mean_auroc - mean).abs() <= 1e-12);
        prop_assert!((agg.std_auroc - std).abs() <= 1e-12);
        prop_assert!((agg.std_fpr95 - std).abs() <= 1e-12);
        prop_assert!(agg.std_auroc >= 0.0);
        prop_assert_eq!(agg.n_seeds, values.len());
    }
}
