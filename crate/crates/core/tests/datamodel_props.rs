use std::fs;

use ndarray::Array2;
use oodbench::datamodel::{load_dataset, sidecar_paths, write_dataset, LabeledDataset, SplitTag};
use oodbench::Error;
use proptest::prelude::*;

fn dataset_strategy() -> impl Strategy<Value = LabeledDataset> {
    (1usize..30, 1usize..6, 2usize..5, any::<bool>(), any::<bool>()).prop_flat_map(|(n, dim, c, logits, test)| {
        (
            prop::collection::vec(-1e6f32..1e6, n * dim),
            prop::collection::vec(-50f32..50.0, n * c),
            prop::collection::vec(0..c, n),
        )
            .prop_map(move |(emb, lg, labels)| {
                let names = (0..c).map(|k| format!("class {k}")).collect();
                let split = if test { SplitTag::Test } else { SplitTag::Train };
                LabeledDataset::new(
                    Array2::from_shape_vec((n, dim), emb).unwrap(),
                    logits.then(|| Array2::from_shape_vec((n, c), lg).unwrap()),
                    labels,
                    names,
                    split,
                )
                .unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn write_load_round_trip(ds in dataset_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("a").to_string_lossy().into_owned();
        let again_prefix = dir.path().join("b").to_string_lossy().into_owned();
        let header = write_dataset(&ds, &prefix).unwrap();
        let loaded = load_dataset(&prefix).unwrap();
        prop_assert_eq!(&loaded, &ds);
        write_dataset(&loaded, &again_prefix).unwrap();
        let (h1, p1, l1) = sidecar_paths(&prefix);
        let (h2, p2, l2) = sidecar_paths(&again_prefix);
        prop_assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        prop_assert_eq!(fs::read(&h1).unwrap(), fs::read(&h2).unwrap());
        prop_assert_eq!(fs::read(&l1).unwrap(), fs::read(&l2).unwrap());
        prop_assert_eq!(header.expected_payload_len().unwrap(), fs::metadata(&p1).unwrap().len());
        prop_assert_eq!(load_dataset(h1).unwrap(), ds);
    }
}

fn sample() -> LabeledDataset {
    let emb = Array2::from_shape_fn((5, 3), |(i, j)| (i as f32) - 0.5 * j as f32);
    let logits = Array2::from_shape_fn((5, 2), |(i, j)| (i + j) as f32);
    LabeledDataset::new(emb, Some(logits), vec![0, 1, 1, 0, 1], vec!["cat".into(), "dog".into()], SplitTag::Train)
        .unwrap()
}

/// Any single-byte change to the header either fails to load or loads the
/// very same dataset (a change the format treats as insignificant, such as
/// whitespace).
#[test]
fn header_single_byte_corruptions_are_rejected() {
    let ds = sample();
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("d").to_string_lossy().into_owned();
    write_dataset(&ds, &prefix).unwrap();
    let (header_path, _, _) = sidecar_paths(&prefix);
    let original = fs::read(&header_path).unwrap();

    let replacements: Vec<u8> = b" \t\n\"{}[],:0123456789abcdefxyzABCDEFtrufals-.+eE_\x00\xff".to_vec();
    let (mut rejected, mut benign) = (0, 0);
    for pos in 0..original.len() {
        for &byte in &replacements {
            if byte == original[pos] {
                continue;
            }
            let mut bytes = original.clone();
            bytes[pos] = byte;
            fs::write(&header_path, &bytes).unwrap();
            match load_dataset(&prefix) {
                Err(_) => rejected += 1,
                Ok(loaded) => {
                    assert_eq!(loaded, ds, "byte {pos} -> {byte:#04x} loaded a different dataset");
                    benign += 1;
                }
            }
        }
    }
    fs::write(&header_path, &original).unwrap();
    assert_eq!(load_dataset(&prefix).unwrap(), ds);
    assert!(rejected > 0 && benign > 0, "rejected {rejected}, benign {benign}");
}

#[test]
fn payload_corruptions_are_rejected() {
    let ds = sample();
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("p").to_string_lossy().into_owned();
    write_dataset(&ds, &prefix).unwrap();
    let (_, payload_path, labels_path) = sidecar_paths(&prefix);
    let original = fs::read(&payload_path).unwrap();
    for pos in 0..original.len() {
        let mut bytes = original.clone();
        bytes[pos] ^= 0x01;
        fs::write(&payload_path, &bytes).unwrap();
        assert!(matches!(load_dataset(&prefix), Err(Error::ChecksumMismatch { .. })));
    }
    fs::write(&payload_path, &original[..original.len() - 4]).unwrap();
    assert!(matches!(load_dataset(&prefix), Err(Error::SizeMismatch { .. })));
    fs::write(&payload_path, &original).unwrap();

    let labels = fs::read_to_string(&labels_path).unwrap();
    fs::write(&labels_path, labels.replacen("1,1,dog", "1,0,dog", 1)).unwrap();
    assert!(load_dataset(&prefix).is_err());
}

#[test]
fn feature_csv_ingestion() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.csv");
    fs::write(&path, "f0,f1,label\n0.5,1.0,0\n-2,3,2\n1,1,1\n").unwrap();
    let ds = load_dataset(&path).unwrap();
    assert_eq!((ds.n_samples(), ds.dim(), ds.n_classes()), (3, 2, 3));
    assert_eq!(ds.class_names()[2], "class_2");
    fs::write(&path, "f0,f1,label\n0.5,1.0,0\n-2,inf,1\n").unwrap();
    assert!(matches!(load_dataset(&path), Err(Error::NonFinite { row: 1, col: 1 })));
}
