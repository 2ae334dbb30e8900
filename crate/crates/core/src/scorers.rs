//! OOD scorers. Every score is oriented so that higher means more OOD.
//!
//! - MSP: `1 - max softmax(logits)`.
//! - Mahalanobis: distance to the centroid of all ID training embeddings
//!   under a single shrunk covariance.
//! - kNN: Euclidean distance to the k-th nearest ID training embedding.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datamodel::LabeledDataset;
use crate::error::{Error, Result};
use crate::splitgen::{BenchmarkSplit, SplitKind};

/// Relative Cholesky pivot below which a covariance is treated as singular.
pub const SINGULAR_RTOL: f64 = 1e-10;

/// Default covariance shrinkage factor (multiplies `trace / dim`).
pub const DEFAULT_SHRINKAGE: f64 = 1e-3;

/// Default kNN rank: 1% of the training set, at least 1.
pub fn default_k(n_train: usize) -> usize {
    ((0.01 * n_train as f64).round() as usize).clamp(1, n_train.max(1))
}

fn ensure_finite(x: &[f64]) -> Result<()> {
    match x.iter().position(|v| !v.is_finite()) {
        Some(col) => Err(Error::NonFinite { row: 0, col }),
        None => Ok(()),
    }
}

/// `1 - max_c softmax(logits)_c`, computed with max-subtraction.
pub fn msp_score(logits: &[f64]) -> Result<f64> {
    if logits.is_empty() {
        return Err(Error::InvalidArgument("empty logit row".into()));
    }
    ensure_finite(logits)?;
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let denom: f64 = logits.iter().map(|&l| (l - max).exp()).sum();
    // the max entry contributes exp(0) = 1
    Ok(1.0 - 1.0 / denom)
}

/// Gaussian fitted to ID training embeddings.
#[derive(Debug, Clone)]
pub struct MahalanobisModel {
    mean: Vec<f64>,
    covariance: DMatrix<f64>,
    precision: DMatrix<f64>,
    shrinkage: f64,
}

impl MahalanobisModel {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Regularized covariance the precision was computed from.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    pub fn shrinkage(&self) -> f64 {
        self.shrinkage
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Builds a model from an explicit mean and covariance.
    pub fn from_parts(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        if covariance.nrows() != mean.len() || covariance.ncols() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                actual: covariance.nrows(),
            });
        }
        let precision = invert_spd(&covariance)?;
        Ok(Self {
            mean,
            covariance,
            precision,
            shrinkage: 0.0,
        })
    }
}

fn invert_spd(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let singular = || {
        let eig = SymmetricEigen::new(cov.clone()).eigenvalues;
        Error::SingularCovariance {
            min_eigenvalue: eig.min(),
            max_eigenvalue: eig.max(),
        }
    };
    let scale = cov.diagonal().max();
    if !(scale > 0.0) {
        return Err(singular());
    }
    let chol = nalgebra::Cholesky::new(cov.clone()).ok_or_else(singular)?;
    let min_pivot = chol
        .l_dirty()
        .diagonal()
        .iter()
        .map(|d| d * d)
        .fold(f64::INFINITY, f64::min);
    if min_pivot <= SINGULAR_RTOL * scale {
        return Err(singular());
    }
    let inv = chol.inverse();
    Ok((&inv + inv.transpose()) * 0.5)
}

/// Fits mean and `S + shrinkage * trace(S) / dim * I`, with `S` the sample
/// covariance (`n - 1` denominator), then inverts by Cholesky.
pub fn fit_mahalanobis(train: ArrayView2<'_, f64>, shrinkage: f64) -> Result<MahalanobisModel> {
    let (n, dim) = train.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 training rows, got {n}"
        )));
    }
    if !(shrinkage >= 0.0 && shrinkage.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "shrinkage must be a finite value >= 0, got {shrinkage}"
        )));
    }
    let mut mean = vec![0.0; dim];
    for row in train.rows() {
        for (m, &v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    let mut centered = vec![0.0; dim];
    for row in train.rows() {
        for ((c, &v), &m) in centered.iter_mut().zip(row.iter()).zip(&mean) {
            *c = v - m;
        }
        for i in 0..dim {
            let ci = centered[i];
            for j in i..dim {
                cov[(i, j)] += ci * centered[j];
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let v = cov[(i, j)] / (n - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let ridge = shrinkage * cov.trace() / dim as f64;
    for i in 0..dim {
        cov[(i, i)] += ridge;
    }
    let precision = invert_spd(&cov)?;
    Ok(MahalanobisModel {
        mean,
        covariance: cov,
        precision,
        shrinkage,
    })
}

/// `sqrt((x - mean)^T P (x - mean))`.
pub fn mahalanobis_score(model: &MahalanobisModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: x.len(),
        });
    }
    ensure_finite(x)?;
    let d: Vec<f64> = x.iter().zip(&model.mean).map(|(a, b)| a - b).collect();
    let p = &model.precision;
    let mut q = 0.0;
    for j in 0..d.len() {
        let mut s = 0.0;
        for i in 0..d.len() {
            s += p[(i, j)] * d[i];
        }
        q += s * d[j];
    }
    Ok(q.max(0.0).sqrt())
}

/// Exact nearest-neighbor index over ID training embeddings.
#[derive(Debug, Clone)]
pub struct KnnIndex {
    reference: Array2<f64>,
    k: usize,
    normalized: bool,
}

impl KnnIndex {
    pub fn reference(&self) -> ArrayView2<'_, f64> {
        self.reference.view()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }
}

fn unit(row: &[f64]) -> Option<Vec<f64>> {
    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    (norm > 0.0).then(|| row.iter().map(|v| v / norm).collect())
}

pub fn fit_knn_index(train: ArrayView2<'_, f64>, k: usize, normalize: bool) -> Result<KnnIndex> {
    let n = train.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k must lie in [1, {n}], got {k}"
        )));
    }
    let mut reference = train.to_owned();
    if normalize {
        for (i, mut row) in reference.rows_mut().into_iter().enumerate() {
            let v: Vec<f64> = row.iter().copied().collect();
            let u = unit(&v).ok_or(Error::ZeroNorm { row: i })?;
            row.iter_mut().zip(u).for_each(|(r, x)| *r = x);
        }
    }
    Ok(KnnIndex {
        reference,
        k,
        normalized: normalize,
    })
}

/// k-th smallest Euclidean distance from `x` to the reference rows
/// (1-indexed, duplicates counted). The query is unit-normalized when the
/// index is.
pub fn knn_score(index: &KnnIndex, x: &[f64]) -> Result<f64> {
    let dim = index.reference.ncols();
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: x.len(),
        });
    }
    ensure_finite(x)?;
    let query;
    let x = if index.normalized {
        query = unit(x).ok_or_else(|| Error::InvalidArgument("zero-norm query".into()))?;
        &query[..]
    } else {
        x
    };
    let mut dists: Vec<f64> = index
        .reference
        .rows()
        .into_iter()
        .map(|r| {
            let mut s = 0.0;
            for (a, b) in r.iter().zip(x) {
                let d = a - b;
                s += d * d;
            }
            s
        })
        .collect();
    let (_, kth, _) = dists.select_nth_unstable_by(index.k - 1, f64::total_cmp);
    Ok(kth.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScorerMethod {
    Msp,
    Mahalanobis,
    Knn,
}

impl ScorerMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ScorerMethod::Msp => "msp",
            ScorerMethod::Mahalanobis => "mahalanobis",
            ScorerMethod::Knn => "knn",
        }
    }
}

/// Scorer block of a run configuration. Unset fields take the documented
/// defaults at scoring time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScorerConfig {
    pub method: ScorerMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shrinkage: Option<f64>,
}

impl ScorerConfig {
    pub fn new(method: ScorerMethod) -> Self {
        Self {
            method,
            name: None,
            k: None,
            normalize: None,
            shrinkage: None,
        }
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| self.method.as_str().to_string())
    }
}

/// Scorer settings after defaults were applied for a particular split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedScorer {
    pub method: ScorerMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shrinkage: Option<f64>,
    pub n_train: usize,
}

/// Datasets a split indexes into.
#[derive(Debug, Clone, Copy)]
pub struct SplitData<'a> {
    pub train: &'a LabeledDataset,
    pub test: &'a LabeledDataset,
    pub ood_test: Option<&'a LabeledDataset>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitScores {
    pub id_scores: Vec<f64>,
    pub ood_scores: Vec<f64>,
    pub resolved: ResolvedScorer,
}

fn score_rows<F>(rows: &Array2<f64>, indices: &[usize], f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    let results: Vec<Result<f64>> = (0..rows.nrows())
        .into_par_iter()
        .map(|i| {
            let row = rows.row(i);
            match row.as_slice() {
                Some(s) => f(s),
                None => f(&row.to_vec()),
            }
        })
        .collect();
    results
        .into_iter()
        .zip(indices)
        .map(|(r, &index)| {
            r.map_err(|e| Error::Sample {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Fits the configured scorer on `train_id_idx` rows only and scores every
/// test-ID and test-OOD row, preserving index order.
pub fn score_split(
    split: &BenchmarkSplit,
    config: &ScorerConfig,
    data: SplitData<'_>,
) -> Result<SplitScores> {
    let ood_source = match split.kind {
        SplitKind::Adjacent => data.test,
        SplitKind::CrossDataset => data.ood_test.ok_or_else(|| {
            Error::Config("cross-dataset split requires an OOD dataset".into())
        })?,
    };
    let n_train = split.train_id_idx.len();
    let mut resolved = ResolvedScorer {
        method: config.method,
        k: None,
        normalize: None,
        shrinkage: None,
        n_train,
    };
    let (id_scores, ood_scores) = match config.method {
        ScorerMethod::Msp => {
            let missing = |which: &str| {
                Error::Config(format!("msp scorer requires logits, but the {which} dataset has none"))
            };
            let id = data
                .test
                .logits_f64(&split.test_id_idx)
                .ok_or_else(|| missing("test"))?;
            let ood = ood_source
                .logits_f64(&split.test_ood_idx)
                .ok_or_else(|| missing("OOD"))?;
            if id.ncols() != ood.ncols() {
                return Err(Error::Config(format!(
                    "ID logits have {} columns, OOD logits {}",
                    id.ncols(),
                    ood.ncols()
                )));
            }
            (
                score_rows(&id, &split.test_id_idx, msp_score)?,
                score_rows(&ood, &split.test_ood_idx, msp_score)?,
            )
        }
        ScorerMethod::Mahalanobis => {
            let shrinkage = config.shrinkage.unwrap_or(DEFAULT_SHRINKAGE);
            resolved.shrinkage = Some(shrinkage);
            let train = data.train.embeddings_f64(&split.train_id_idx);
            let model = fit_mahalanobis(train.view(), shrinkage)?;
            let id = data.test.embeddings_f64(&split.test_id_idx);
            let ood = ood_source.embeddings_f64(&split.test_ood_idx);
            (
                score_rows(&id, &split.test_id_idx, |x| mahalanobis_score(&model, x))?,
                score_rows(&ood, &split.test_ood_idx, |x| mahalanobis_score(&model, x))?,
            )
        }
        ScorerMethod::Knn => {
            let k = config.k.unwrap_or_else(|| default_k(n_train));
            let normalize = config.normalize.unwrap_or(true);
            resolved.k = Some(k);
            resolved.normalize = Some(normalize);
            let train = data.train.embeddings_f64(&split.train_id_idx);
            let index = fit_knn_index(train.view(), k, normalize)?;
            let id = data.test.embeddings_f64(&split.test_id_idx);
            let ood = ood_source.embeddings_f64(&split.test_ood_idx);
            (
                score_rows(&id, &split.test_id_idx, |x| knn_score(&index, x))?,
                score_rows(&ood, &split.test_ood_idx, |x| knn_score(&index, x))?,
            )
        }
    };
    Ok(SplitScores {
        id_scores,
        ood_scores,
        resolved,
    })
}
