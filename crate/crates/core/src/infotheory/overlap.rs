use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::{Deserialize, Serialize};

use super::{validate_pmf, PMF_TOL};
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapEstimate {
    /// Fraction of trials whose fresh label was absent from the ID draws.
    pub estimate: f64,
    /// Binomial standard error of `estimate`.
    pub std_error: f64,
    pub misses: u64,
    pub trials: u64,
}

fn check(label_pmf: &[f64], n_id: usize) -> Result<()> {
    if label_pmf.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 classes, got {}",
            label_pmf.len()
        )));
    }
    validate_pmf(label_pmf, PMF_TOL)?;
    if n_id == 0 {
        return Err(Error::InvalidArgument("n_id must be at least 1".into()));
    }
    Ok(())
}

/// `sum_y p_y (1 - p_y)^n_id`
pub fn analytic_overlap_risk(label_pmf: &[f64], n_id: usize) -> Result<f64> {
    check(label_pmf, n_id)?;
    Ok(label_pmf.iter().map(|&p| p * (1.0 - p).powf(n_id as f64)).sum())
}

/// Natural log of [`analytic_overlap_risk`], finite even where the risk
/// underflows `f64`.
pub fn ln_analytic_overlap_risk(label_pmf: &[f64], n_id: usize) -> Result<f64> {
    check(label_pmf, n_id)?;
    let terms: Vec<f64> = label_pmf
        .iter()
        .filter(|&&p| p > 0.0 && p < 1.0)
        .map(|&p| p.ln() + n_id as f64 * (-p).ln_1p())
        .collect();
    let Some(max) = terms.iter().copied().reduce(f64::max) else {
        return Ok(f64::NEG_INFINITY);
    };
    Ok(max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln())
}

/// Monte Carlo estimate of the chance that a fresh label is missing from
/// `n_id` i.i.d. ID draws.
///
/// Each trial draws the fresh label first and then the ID labels, stopping
/// at the first match; the outcome has the same law as drawing all `n_id`
/// first.
pub fn simulate_overlap_risk(label_pmf: &[f64], n_id: usize, trials: u64, seed: u64) -> Result<OverlapEstimate> {
    check(label_pmf, n_id)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let dist = WeightedIndex::new(label_pmf).map_err(|e| Error::InvalidPmf(e.to_string()))?;
    let mut rng = seeded(seed);
    let mut misses = 0u64;
    for _ in 0..trials {
        let fresh = dist.sample(&mut rng);
        if (0..n_id).all(|_| dist.sample(&mut rng) != fresh) {
            misses += 1;
        }
    }
    let estimate = misses as f64 / trials as f64;
    Ok(OverlapEstimate {
        estimate,
        std_error: (estimate * (1.0 - estimate) / trials as f64).sqrt(),
        misses,
        trials,
    })
}
