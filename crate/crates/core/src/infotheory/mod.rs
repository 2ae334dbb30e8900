//! Exact information theory on small discrete distributions.
//!
//! All quantities are in bits. The engine works on a joint over two factors
//! `x1` and `x2` with derived labels `y1 = f1(x1)` and `y2 = f2(x2)`, and on
//! deterministic encoders `z = g(x1, x2)` enumerated as set partitions of the
//! support.

mod blindness;
mod bottleneck;
mod fano;
mod joint;
mod overlap;

pub use blindness::{verify_label_blindness, BlindnessReport, MinimizerReport, ReportJointStats};
pub use bottleneck::{
    bell_number, for_each_partition, global_minimizers, ib_loss, minimize_ib, IbConfig, IbLoss,
    IbSolution, DEFAULT_BETA, DEFAULT_MAX_CELLS,
};
pub use fano::{binary_entropy, fano_error_lower_bound};
pub use joint::{
    conditional_mi, filter_distribution, joint_entropy, mutual_information,
    mutual_information_unclamped, DiscreteJoint, Encoder, Var,
};
pub use overlap::{analytic_overlap_risk, ln_analytic_overlap_risk, simulate_overlap_risk, OverlapEstimate};

use crate::error::{Error, Result};

/// Values at or below this many bits count as zero information.
pub const MI_TOL: f64 = 1e-12;

/// Tolerance on `sum(p) == 1` for distributions.
pub const PMF_TOL: f64 = 1e-12;

pub(crate) fn validate_pmf(p: &[f64], tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidPmf("empty distribution".into()));
    }
    if let Some(i) = p.iter().position(|&v| !(v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidPmf(format!("entry {i} is {}", p[i])));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::InvalidPmf(format!("sums to {total}, not 1")));
    }
    Ok(())
}

/// `-sum p log2 p` with `0 log 0 = 0`. Works for flattened joints too.
pub fn entropy(p: &[f64]) -> Result<f64> {
    validate_pmf(p, PMF_TOL)?;
    Ok(entropy_unchecked(p))
}

pub(crate) fn entropy_unchecked(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.log2())
        .sum::<f64>()
}
