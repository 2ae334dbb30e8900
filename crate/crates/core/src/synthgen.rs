//! Two-factor synthetic embeddings: `x = concat(x1, x2)` with `x1` and `x2`
//! independent isotropic Gaussian mixtures. Labels follow the `x2` class.
//!
//! Logits are the Bayes-optimal class log-likelihoods given the coordinates
//! a dataset retains: `-|x2 - mu_k|^2 / 2` while the `x2` block is present,
//! and all zeros once only the `x1` block is left.

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::{LabeledDataset, SplitTag, TwoFactorLayout};
use crate::error::{Error, Result};
use crate::rng;

/// Offset separating test-set sample streams from training ones.
const TEST_STREAM_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoFactorSpec {
    /// Rows per generated split.
    #[serde(default = "defaults::n_samples")]
    pub n_samples: usize,
    #[serde(default = "defaults::dim")]
    pub d1: usize,
    #[serde(default = "defaults::dim")]
    pub d2: usize,
    #[serde(default = "defaults::classes")]
    pub c1: usize,
    #[serde(default = "defaults::classes")]
    pub c2: usize,
    /// Minimum distance between class centroids, in units of the
    /// within-class standard deviation.
    #[serde(default = "defaults::separation")]
    pub cluster_separation: f64,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn n_samples() -> usize {
        4000
    }
    pub fn dim() -> usize {
        16
    }
    pub fn classes() -> usize {
        4
    }
    pub fn separation() -> f64 {
        8.0
    }
}

impl Default for TwoFactorSpec {
    fn default() -> Self {
        Self {
            n_samples: defaults::n_samples(),
            d1: defaults::dim(),
            d2: defaults::dim(),
            c1: defaults::classes(),
            c2: defaults::classes(),
            cluster_separation: defaults::separation(),
            seed: 0,
        }
    }
}

impl TwoFactorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1".into());
        }
        if self.d1 == 0 || self.d2 == 0 {
            return bad(format!("d1 and d2 must be at least 1, got {} and {}", self.d1, self.d2));
        }
        if self.c1 < 2 || self.c2 < 2 {
            return bad(format!("c1 and c2 must be at least 2, got {} and {}", self.c1, self.c2));
        }
        if !(self.cluster_separation > 0.0 && self.cluster_separation.is_finite()) {
            return bad(format!(
                "cluster_separation must be positive, got {}",
                self.cluster_separation
            ));
        }
        Ok(())
    }
}

/// A generated split together with the factor-1 class of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFactorSample {
    pub dataset: LabeledDataset,
    pub factor1_labels: Vec<usize>,
}

/// `c` centroids in `d` dimensions, pairwise at least `sep` apart.
///
/// With `c <= d` these are `sep / sqrt(2)` times the first `c` basis
/// vectors (all pairs exactly `sep` apart). Otherwise they are the first `c`
/// points of the integer grid `{0..m}^d` in mixed-radix order, scaled by
/// `sep`.
pub fn centroids(c: usize, d: usize, sep: f64) -> Vec<Vec<f64>> {
    if c <= d {
        let scale = sep / std::f64::consts::SQRT_2;
        return (0..c)
            .map(|j| {
                let mut v = vec![0.0; d];
                v[j] = scale;
                v
            })
            .collect();
    }
    let mut side = 2usize;
    while side.checked_pow(d as u32).is_some_and(|n| n < c) {
        side += 1;
    }
    (0..c)
        .map(|mut j| {
            (0..d)
                .map(|_| {
                    let digit = j % side;
                    j /= side;
                    digit as f64 * sep
                })
                .collect()
        })
        .collect()
}

/// Training split of the two-factor construction.
pub fn generate_two_factor(spec: &TwoFactorSpec) -> Result<TwoFactorSample> {
    generate_two_factor_split(spec, SplitTag::Train)
}

/// One split of the two-factor construction.
///
/// Row `i` is drawn from its own counter-based stream, so the output does
/// not depend on thread count. Train and test use disjoint streams and share
/// centroids.
pub fn generate_two_factor_split(spec: &TwoFactorSpec, split: SplitTag) -> Result<TwoFactorSample> {
    spec.validate()?;
    let (d1, d2) = (spec.d1, spec.d2);
    let mu1 = centroids(spec.c1, d1, spec.cluster_separation);
    let mu2 = centroids(spec.c2, d2, spec.cluster_separation);
    let base = match split {
        SplitTag::Train => 0,
        SplitTag::Test => TEST_STREAM_BASE,
    };
    let rows: Vec<(usize, usize, Vec<f32>)> = (0..spec.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::seeded_stream(spec.seed, base + i as u64);
            let k1 = rng::below(&mut r, spec.c1);
            let k2 = rng::below(&mut r, spec.c2);
            let row = mu1[k1]
                .iter()
                .chain(&mu2[k2])
                .map(|&m| {
                    let z: f64 = StandardNormal.sample(&mut r);
                    (m + z) as f32
                })
                .collect();
            (k1, k2, row)
        })
        .collect();

    let dim = d1 + d2;
    let mut flat = Vec::with_capacity(spec.n_samples * dim);
    let mut factor1_labels = Vec::with_capacity(spec.n_samples);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for (k1, k2, row) in rows {
        factor1_labels.push(k1);
        labels.push(k2);
        flat.extend(row);
    }
    let embeddings = Array2::from_shape_vec((spec.n_samples, dim), flat)
        .expect("every row has d1 + d2 values");
    let logits = Array2::from_shape_fn((spec.n_samples, spec.c2), |(i, k)| {
        let sq: f64 = (0..d2)
            .map(|j| (f64::from(embeddings[(i, d1 + j)]) - mu2[k][j]).powi(2))
            .sum();
        (-0.5 * sq) as f32
    });
    let class_names = (0..spec.c2).map(|k| format!("factor2_class_{k}")).collect();
    let dataset = LabeledDataset::new(embeddings, Some(logits), labels, class_names, split)?
        .with_layout(Some(TwoFactorLayout { d1, d2 }));
    Ok(TwoFactorSample {
        dataset,
        factor1_labels,
    })
}

/// Train and test splits from the same spec.
pub fn generate_train_test(spec: &TwoFactorSpec) -> Result<(TwoFactorSample, TwoFactorSample)> {
    Ok((
        generate_two_factor_split(spec, SplitTag::Train)?,
        generate_two_factor_split(spec, SplitTag::Test)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Keep {
    Factor1Block,
    Factor2Block,
    #[default]
    Both,
}

/// Keeps one coordinate block of a two-factor dataset. Labels are unchanged.
pub fn blind_projection(dataset: &LabeledDataset, keep: Keep) -> Result<LabeledDataset> {
    let layout = dataset.layout().ok_or_else(|| {
        Error::InvalidDataset("wrong provenance: dataset has no two-factor layout".into())
    })?;
    Ok(match keep {
        Keep::Both => dataset.clone(),
        Keep::Factor1Block => {
            let zeros = dataset.logits().map(|l| Array2::zeros(l.raw_dim()));
            dataset.project_columns(0..layout.d1).with_logits(zeros)?
        }
        Keep::Factor2Block => dataset.project_columns(layout.d1..layout.d1 + layout.d2),
    })
}
