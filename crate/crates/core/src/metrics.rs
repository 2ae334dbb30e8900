//! AUROC and FPR@TPR with exact tie handling, plus seed aggregation.
//!
//! Conventions: for AUROC, OOD is the positive class and higher scores mean
//! OOD. For FPR@TPR, ID is the positive class: a sample is kept as ID when its
//! score is `<= t`, and the threshold `t` is taken from observed ID scores.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard target for FPR95.
pub const TPR95: f64 = 0.95;

fn check_scores(name: &str, scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} scores are empty")));
    }
    if let Some(row) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite { row, col: 0 });
    }
    Ok(())
}

/// `P(ood > id) + 0.5 * P(ood == id)` over all pairs, via midrank sums.
pub fn auroc(id_scores: &[f64], ood_scores: &[f64]) -> Result<f64> {
    check_scores("id", id_scores)?;
    check_scores("ood", ood_scores)?;
    let mut pooled: Vec<(f64, bool)> = id_scores
        .iter()
        .map(|&s| (s, false))
        .chain(ood_scores.iter().map(|&s| (s, true)))
        .collect();
    pooled.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

    // Ranks are 1-based; a tie group spanning positions i..j gets (i+1+j)/2.
    // Doubling keeps everything integral.
    let mut twice_rank_sum: u128 = 0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let twice_mid = (i + 1 + j) as u128;
        let n_ood_in_group = pooled[i..j].iter().filter(|p| p.1).count() as u128;
        twice_rank_sum += twice_mid * n_ood_in_group;
        i = j;
    }
    let m = ood_scores.len() as u128;
    let n = id_scores.len() as u128;
    // 2U = 2R - m(m+1)
    let twice_u = twice_rank_sum - m * (m + 1);
    Ok(twice_u as f64 / (2 * n * m) as f64)
}

/// Fraction of OOD scores `<= t`, where `t` is the smallest observed ID score
/// such that at least `target_tpr` of ID scores are `<= t`.
///
/// With `target_tpr = 1.0` the threshold is the maximum ID score.
pub fn fpr_at_tpr(id_scores: &[f64], ood_scores: &[f64], target_tpr: f64) -> Result<f64> {
    check_scores("id", id_scores)?;
    check_scores("ood", ood_scores)?;
    if !(target_tpr > 0.0 && target_tpr <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "target_tpr must lie in (0, 1], got {target_tpr}"
        )));
    }
    let mut id = id_scores.to_vec();
    id.sort_unstable_by(f64::total_cmp);
    let n = id.len();
    // smallest count c with c / n >= target, guarding against 0.9 * 10 = 9.000..1
    let needed = ((target_tpr * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let threshold = id[needed.min(n) - 1];
    let kept = ood_scores.iter().filter(|&&s| s <= threshold).count();
    Ok(kept as f64 / ood_scores.len() as f64)
}

/// Metrics for one (scorer, seed) cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub auroc: f64,
    pub fpr95: f64,
    pub n_id: usize,
    pub n_ood: usize,
}

impl MetricResult {
    pub fn compute(id_scores: &[f64], ood_scores: &[f64]) -> Result<Self> {
        Ok(Self {
            auroc: auroc(id_scores, ood_scores)?,
            fpr95: fpr_at_tpr(id_scores, ood_scores, TPR95)?,
            n_id: id_scores.len(),
            n_ood: ood_scores.len(),
        })
    }
}

/// Mean and sample standard deviation over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub mean_auroc: f64,
    pub std_auroc: f64,
    pub mean_fpr95: f64,
    pub std_fpr95: f64,
    pub n_seeds: usize,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

pub fn aggregate(results: &[MetricResult]) -> Result<AggregateResult> {
    if results.is_empty() {
        return Err(Error::InvalidArgument("no results to aggregate".into()));
    }
    let (mean_auroc, std_auroc) = mean_std(results.iter().map(|r| r.auroc));
    let (mean_fpr95, std_fpr95) = mean_std(results.iter().map(|r| r.fpr95));
    Ok(AggregateResult {
        mean_auroc,
        std_auroc,
        mean_fpr95,
        std_fpr95,
        n_seeds: results.len(),
    })
}

/// Renders a fraction pair as percentage points, e.g. `(0.520, 0.042)` as
/// `52.0±4.2`.
pub fn format_cell(mean: f64, std: f64) -> String {
    format!("{:.1}±{:.1}", mean * 100.0, std * 100.0)
}

impl AggregateResult {
    pub fn auroc_cell(&self) -> String {
        format_cell(self.mean_auroc, self.std_auroc)
    }

    pub fn fpr95_cell(&self) -> String {
        format_cell(self.mean_fpr95, self.std_fpr95)
    }
}
