use std::fs;

use oodbench::datamodel::{load_dataset, write_dataset, SplitTag};
use oodbench::runner::{ingest_external_scores, read_scores, write_scores, DatasetSource, RunConfig, SplitSpec, CONFIG_SCHEMA_VERSION};
use oodbench::scorers::{score_split, ScorerConfig, ScorerMethod, SplitData};
use oodbench::splitgen::generate_adjacent_split;
use oodbench::synthgen::{blind_projection, generate_train_test, generate_two_factor_split, Keep, TwoFactorSpec};
use oodbench::{run_benchmark, MetricResult};

fn plugin_mi(a: &[usize], b: &[usize]) -> f64 {
    let (na, nb) = (a.iter().max().unwrap() + 1, b.iter().max().unwrap() + 1);
    let mut counts = vec![vec![0.0f64; nb]; na];
    for (&x, &y) in a.iter().zip(b) {
        counts[x][y] += 1.0;
    }
    let n = a.len() as f64;
    let pa: Vec<f64> = counts.iter().map(|r| r.iter().sum::<f64>() / n).collect();
    let pb: Vec<f64> = (0..nb).map(|j| counts.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut mi = 0.0;
    for i in 0..na {
        for j in 0..nb {
            let p = counts[i][j] / n;
            if p > 0.0 {
                mi += p * (p / (pa[i] * pb[j])).log2();
            }
        }
    }
    mi
}

#[test]
fn factor_labels_are_nearly_independent() {
    for seed in 0..3 {
        let spec = TwoFactorSpec { seed, ..TwoFactorSpec::default() };
        let s = generate_two_factor_split(&spec, SplitTag::Train).unwrap();
        assert_eq!(s.dataset.n_samples(), 4000);
        let mi = plugin_mi(&s.factor1_labels, s.dataset.labels());
        assert!(mi <= 0.02, "seed {seed}: {mi} bits");
    }
}

#[test]
fn factor2_block_is_nearly_separable() {
    let spec = TwoFactorSpec { cluster_separation: 10.0, seed: 5, ..TwoFactorSpec::default() };
    let ds = blind_projection(&generate_two_factor_split(&spec, SplitTag::Train).unwrap().dataset, Keep::Factor2Block)
        .unwrap();
    assert_eq!(ds.dim(), spec.d2);
    let half = ds.n_samples() / 2;
    let emb = ds.embeddings();
    let mut correct = 0;
    for q in half..ds.n_samples() {
        let nearest = (0..half)
            .map(|r| {
                let d: f32 = emb.row(q).iter().zip(emb.row(r)).map(|(a, b)| (a - b) * (a - b)).sum();
                (d, r)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
            .1;
        correct += usize::from(ds.labels()[nearest] == ds.labels()[q]);
    }
    let acc = correct as f64 / (ds.n_samples() - half) as f64;
    assert!(acc >= 0.99, "1-NN accuracy {acc}");
}

#[test]
fn same_seed_gives_identical_files() {
    let spec = TwoFactorSpec { n_samples: 300, seed: 9, ..TwoFactorSpec::default() };
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for run in ["a", "b"] {
        let (train, _) = generate_train_test(&spec).unwrap();
        let prefix = dir.path().join(run).to_string_lossy().into_owned();
        write_dataset(&train.dataset, &prefix).unwrap();
        let (_, payload, labels) = oodbench::datamodel::sidecar_paths(&prefix);
        bytes.push((fs::read(payload).unwrap(), fs::read(labels).unwrap()));
    }
    assert_eq!(bytes[0], bytes[1]);
    let other = TwoFactorSpec { seed: 10, ..spec };
    let (a, _) = generate_train_test(&spec).unwrap();
    let (b, _) = generate_train_test(&other).unwrap();
    assert_ne!(a.dataset, b.dataset);
}

#[test]
fn projection_requires_two_factor_provenance() {
    let spec = TwoFactorSpec { n_samples: 50, ..TwoFactorSpec::default() };
    let ds = generate_two_factor_split(&spec, SplitTag::Test).unwrap().dataset;
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("x").to_string_lossy().into_owned();
    write_dataset(&ds, &prefix).unwrap();
    let loaded = load_dataset(&prefix).unwrap();
    let f1 = blind_projection(&loaded, Keep::Factor1Block).unwrap();
    assert_eq!(f1.dim(), spec.d1);
    assert!(f1.logits().unwrap().iter().all(|&v| v == 0.0));

    let stripped = blind_projection(&f1, Keep::Factor1Block);
    assert!(stripped.is_err());
}

#[test]
fn ingest_counts_and_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let id: Vec<f64> = (0..100).map(|i| f64::from(i) * 0.01).collect();
    let ood: Vec<f64> = (0..30).map(|i| 0.5 + f64::from(i) * 0.1).collect();
    let (pi, po) = (dir.path().join("id.txt"), dir.path().join("ood.txt"));
    write_scores(&pi, &id).unwrap();
    write_scores(&po, &ood).unwrap();
    let m = ingest_external_scores(&pi, &po).unwrap();
    assert_eq!((m.n_id, m.n_ood), (100, 30));
    assert_eq!(m, MetricResult::compute(&id, &ood).unwrap());

    let same = ingest_external_scores(&pi, &pi).unwrap();
    assert_eq!(same.auroc, 0.5);

    fs::write(&po, "0.1\nnot-a-number\n").unwrap();
    let err = ingest_external_scores(&pi, &po).unwrap_err().to_string();
    assert!(err.contains('2'), "{err}");
}

#[test]
fn exported_scores_round_trip_to_identical_metrics() {
    let spec = TwoFactorSpec { n_samples: 600, seed: 2, ..TwoFactorSpec::default() };
    let (train, test) = generate_train_test(&spec).unwrap();
    let split = generate_adjacent_split(&train.dataset, &test.dataset, 0.25, 4).unwrap();
    let data = SplitData { train: &train.dataset, test: &test.dataset, ood_test: None };
    let scores = score_split(&split, &ScorerConfig::new(ScorerMethod::Mahalanobis), data).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (pi, po) = (dir.path().join("id.txt"), dir.path().join("ood.txt"));
    write_scores(&pi, &scores.id_scores).unwrap();
    write_scores(&po, &scores.ood_scores).unwrap();
    assert_eq!(read_scores(&pi).unwrap(), scores.id_scores);
    assert_eq!(
        ingest_external_scores(&pi, &po).unwrap(),
        MetricResult::compute(&scores.id_scores, &scores.ood_scores).unwrap()
    );
}

#[test]
fn runner_produces_one_cell_per_scorer_and_seed() {
    let config = RunConfig {
        schema_version: CONFIG_SCHEMA_VERSION,
        datasets: DatasetSource::Synthetic {
            spec: TwoFactorSpec { n_samples: 400, seed: 1, ..TwoFactorSpec::default() },
            keep: Keep::Both,
        },
        split: SplitSpec { base_seed: 7, ..SplitSpec::default() },
        scorers: vec![
            ScorerConfig::new(ScorerMethod::Msp),
            ScorerConfig::new(ScorerMethod::Mahalanobis),
            ScorerConfig::new(ScorerMethod::Knn),
        ],
        output_dir: None,
    };
    let report = run_benchmark(&config).unwrap();
    assert_eq!(report.cells.len(), 9);
    assert_eq!(report.aggregates.len(), 3);
    assert_eq!(report.splits.len(), 3);
    for agg in &report.aggregates {
        assert_eq!(agg.aggregate.n_seeds, 3);
        let cells: Vec<_> = report.cells.iter().filter(|c| c.scorer == agg.scorer).collect();
        let mean = cells.iter().map(|c| c.metrics.auroc).sum::<f64>() / 3.0;
        assert!((agg.aggregate.mean_auroc - mean).abs() <= 1e-12);
    }
    let table = report.to_table_csv().unwrap();
    assert_eq!(table.lines().count(), 4);
    assert_eq!(run_benchmark(&config).unwrap().to_json().unwrap(), report.to_json().unwrap());
}
