//! Adjacent OOD splits (hold out a random subset of one dataset's classes)
//! and cross-dataset near/far splits.

use serde::{Deserialize, Serialize};

use crate::datamodel::{validate_pair, LabeledDataset};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Adjacent,
    CrossDataset,
}

/// A seeded partition of classes into ID and OOD with derived row indices.
///
/// `train_id_idx` indexes the training set; `test_id_idx` the test set.
/// `test_ood_idx` indexes the test set for adjacent splits and the separate
/// OOD dataset for cross-dataset splits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkSplit {
    pub seed: u64,
    pub kind: SplitKind,
    pub id_classes: Vec<usize>,
    pub ood_classes: Vec<usize>,
    pub train_id_idx: Vec<usize>,
    pub test_id_idx: Vec<usize>,
    pub test_ood_idx: Vec<usize>,
}

/// Number of held-out classes: `round_half_up(fraction * n_classes)` clamped
/// to `[1, n_classes - 1]`.
pub fn ood_class_count(ood_fraction: f64, n_classes: usize) -> usize {
    let raw = (ood_fraction * n_classes as f64 + 0.5).floor() as usize;
    raw.clamp(1, n_classes.saturating_sub(1).max(1))
}

fn check_fraction(ood_fraction: f64) -> Result<()> {
    if !(ood_fraction > 0.0 && ood_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ood_fraction must lie in (0, 1), got {ood_fraction}"
        )));
    }
    Ok(())
}

/// Holds out `ood_class_count(ood_fraction, C)` classes chosen by a
/// Fisher-Yates shuffle of `0..C` under `seed`; the first entries of the
/// shuffled order become OOD.
///
/// Training rows are restricted to ID classes. Empty train-ID, test-ID or
/// test-OOD sets are errors.
pub fn generate_adjacent_split(
    train: &LabeledDataset,
    test: &LabeledDataset,
    ood_fraction: f64,
    seed: u64,
) -> Result<BenchmarkSplit> {
    validate_pair(train, test)?;
    check_fraction(ood_fraction)?;
    let n_classes = train.n_classes();
    if n_classes < 2 {
        return Err(Error::InvalidSplit(format!(
            "need at least 2 classes, got {n_classes}"
        )));
    }
    let n_ood = ood_class_count(ood_fraction, n_classes);

    let mut order: Vec<usize> = (0..n_classes).collect();
    rng::fisher_yates(&mut order, &mut rng::seeded(seed));
    let mut ood_classes = order[..n_ood].to_vec();
    let mut id_classes = order[n_ood..].to_vec();
    ood_classes.sort_unstable();
    id_classes.sort_unstable();

    let mut is_ood = vec![false; n_classes];
    for &c in &ood_classes {
        is_ood[c] = true;
    }
    let rows_where = |ds: &LabeledDataset, want_ood: bool| -> Vec<usize> {
        ds.labels()
            .iter()
            .enumerate()
            .filter(|&(_, &l)| is_ood[l] == want_ood)
            .map(|(i, _)| i)
            .collect()
    };
    let split = BenchmarkSplit {
        seed,
        kind: SplitKind::Adjacent,
        train_id_idx: rows_where(train, false),
        test_id_idx: rows_where(test, false),
        test_ood_idx: rows_where(test, true),
        id_classes,
        ood_classes,
    };
    split.ensure_nonempty()?;
    Ok(split)
}

/// `n_repeats` adjacent splits with seeds `base_seed .. base_seed + n_repeats`.
pub fn generate_split_series(
    train: &LabeledDataset,
    test: &LabeledDataset,
    ood_fraction: f64,
    base_seed: u64,
    n_repeats: usize,
) -> Result<Vec<BenchmarkSplit>> {
    if n_repeats == 0 {
        return Err(Error::InvalidArgument("n_repeats must be at least 1".into()));
    }
    (0..n_repeats as u64)
        .map(|i| generate_adjacent_split(train, test, ood_fraction, base_seed.wrapping_add(i)))
        .collect()
}

/// ID = every class of the ID datasets; OOD = every row of `ood_test`.
pub fn make_cross_dataset_split(
    id_train: &LabeledDataset,
    id_test: &LabeledDataset,
    ood_test: &LabeledDataset,
) -> Result<BenchmarkSplit> {
    validate_pair(id_train, id_test)?;
    if ood_test.dim() != id_train.dim() {
        return Err(Error::DimensionMismatch {
            expected: id_train.dim(),
            actual: ood_test.dim(),
        });
    }
    let split = BenchmarkSplit {
        seed: 0,
        kind: SplitKind::CrossDataset,
        id_classes: (0..id_train.n_classes()).collect(),
        ood_classes: Vec::new(),
        train_id_idx: (0..id_train.n_samples()).collect(),
        test_id_idx: (0..id_test.n_samples()).collect(),
        test_ood_idx: (0..ood_test.n_samples()).collect(),
    };
    split.ensure_nonempty()?;
    Ok(split)
}

impl BenchmarkSplit {
    fn ensure_nonempty(&self) -> Result<()> {
        for (name, idx) in [
            ("train_id", &self.train_id_idx),
            ("test_id", &self.test_id_idx),
            ("test_ood", &self.test_ood_idx),
        ] {
            if idx.is_empty() {
                return Err(Error::InvalidSplit(format!(
                    "{name} is empty (seed {}, ood classes {:?})",
                    self.seed, self.ood_classes
                )));
            }
        }
        Ok(())
    }

    /// Re-checks every split invariant against the datasets it indexes.
    /// `ood_test` is required for cross-dataset splits.
    pub fn check(
        &self,
        train: &LabeledDataset,
        test: &LabeledDataset,
        ood_test: Option<&LabeledDataset>,
    ) -> Result<()> {
        self.ensure_nonempty()?;
        let bad = |msg: String| Err(Error::InvalidSplit(msg));
        let n_classes = train.n_classes();
        let mut role = vec![None; n_classes];
        let tagged = self
            .id_classes
            .iter()
            .map(|&c| (c, false))
            .chain(self.ood_classes.iter().map(|&c| (c, true)));
        for (c, is_ood) in tagged {
            if c >= n_classes {
                return bad(format!("class {c} out of range"));
            }
            if role[c].is_some() {
                return bad(format!("class {c} listed twice"));
            }
            role[c] = Some(is_ood);
        }
        let sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if !sorted(&self.id_classes) || !sorted(&self.ood_classes) {
            return bad("class lists must be strictly increasing".into());
        }
        let check_rows = |ds: &LabeledDataset, idx: &[usize], want_ood: bool, name: &str| {
            for &i in idx {
                let Some(&label) = ds.labels().get(i) else {
                    return bad(format!("{name} index {i} out of range"));
                };
                if role.get(label).copied().flatten() != Some(want_ood) {
                    return bad(format!("{name} row {i} has label {label} outside its class set"));
                }
            }
            Ok(())
        };
        check_rows(train, &self.train_id_idx, false, "train_id")?;
        check_rows(test, &self.test_id_idx, false, "test_id")?;
        match self.kind {
            SplitKind::Adjacent => {
                if role.iter().any(Option::is_none) {
                    return bad("adjacent split must assign every class".into());
                }
                check_rows(test, &self.test_ood_idx, true, "test_ood")?;
                let mut seen = vec![0u8; test.n_samples()];
                for &i in self.test_id_idx.iter().chain(&self.test_ood_idx) {
                    seen[i] += 1;
                }
                if seen.iter().any(|&s| s != 1) {
                    return bad("test rows are not partitioned exactly once".into());
                }
            }
            SplitKind::CrossDataset => {
                let Some(ood) = ood_test else {
                    return bad("cross-dataset split needs its OOD dataset".into());
                };
                if let Some(&i) = self.test_ood_idx.iter().find(|&&i| i >= ood.n_samples()) {
                    return bad(format!("test_ood index {i} out of range"));
                }
            }
        }
        Ok(())
    }
}
