use serde::{Deserialize, Serialize};

use super::bottleneck::{ib_loss, is_sufficient, minimize_ib, IbConfig, IbLoss};
use super::joint::{
    conditional_mi, filter_distribution, joint_entropy, mutual_information, DiscreteJoint, Encoder, Var,
};
use super::MI_TOL;
use crate::error::Result;

/// Entropies and dependencies of one joint, in bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJointStats {
    pub support_cells: usize,
    pub h_x1: f64,
    pub h_x2: f64,
    pub h_y1: f64,
    pub h_y2: f64,
    pub i_x1_x2: f64,
    pub i_x_y1: f64,
    pub i_y1_y2: f64,
}

impl ReportJointStats {
    pub fn of(joint: &DiscreteJoint) -> Result<Self> {
        let h = |v: Var| joint_entropy(joint, &[v], None);
        let i = |a: Var, b: Var| mutual_information(joint, &[a], &[b], None);
        Ok(Self {
            support_cells: joint.support().len(),
            h_x1: h(Var::X1)?,
            h_x2: h(Var::X2)?,
            h_y1: h(Var::Y1)?,
            h_y2: h(Var::Y2)?,
            i_x1_x2: i(Var::X1, Var::X2)?,
            i_x_y1: i(Var::X, Var::Y1)?,
            i_y1_y2: i(Var::Y1, Var::Y2)?,
        })
    }
}

/// Measurements for one loss-minimizing encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerReport {
    pub encoder: Encoder,
    pub loss: IbLoss,
    pub h_z: f64,
    pub i_x_z: f64,
    /// `I(x; y1 | z)`; zero for a sufficient encoder.
    pub sufficiency_gap: f64,
    /// Superfluous information `I(x; z | y1)`.
    pub superfluous: f64,
    /// Predictive information `I(z; y1)`.
    pub predictive: f64,
    /// `|superfluous + predictive - I(x; z)|`
    pub decomposition_residual: f64,
    pub i_x2_z: f64,
    pub i_y2_z: f64,
    /// `I(x2; z)` on the unfiltered joint, when the encoder extends to it.
    pub original_i_x2_z: Option<f64>,
    pub original_i_y2_z: Option<f64>,
    pub blind: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlindnessReport {
    pub beta: f64,
    pub allowed_labels: Vec<usize>,
    pub mi_tolerance: f64,
    pub original: ReportJointStats,
    pub filtered: ReportJointStats,
    /// `I(x1; x2) <= mi_tolerance` on the original joint.
    pub hypotheses_hold: bool,
    pub min_loss: f64,
    pub n_sufficient: u64,
    pub minimizers: Vec<MinimizerReport>,
    /// Every minimizer has `I(x2; z)` and `I(y2; z)` at most `mi_tolerance`
    /// on both joints.
    pub label_blind: bool,
    /// False only when the hypotheses hold but blindness does not.
    pub consistent: bool,
}

/// Extends an encoder fitted on the filtered support to the original one.
///
/// A removed cell `(a, b)` takes the code that `z` assigns to row `a` in the
/// filtered support, which is well defined when that row is encoded by a
/// single code. Returns `None` otherwise.
fn extend_encoder(original: &DiscreteJoint, enc: &Encoder) -> Option<Encoder> {
    let cells = original.support();
    let mut codes = Vec::with_capacity(cells.len());
    let (_, n2) = original.shape();
    for &(a, b) in &cells {
        let code = match enc.code(a, b) {
            Some(c) => c,
            None => {
                let mut row = (0..n2).filter_map(|bb| enc.code(a, bb));
                let first = row.next()?;
                if row.any(|c| c != first) {
                    return None;
                }
                first
            }
        };
        codes.push(code);
    }
    Some(Encoder::from_cells(original.shape(), &cells, &codes))
}

fn measure(
    original: &DiscreteJoint,
    filtered: &DiscreteJoint,
    enc: &Encoder,
    beta: f64,
) -> Result<MinimizerReport> {
    let z = Some(enc);
    let i = |a: Var, b: Var| mutual_information(filtered, &[a], &[b], z);
    let i_x_z = i(Var::X, Var::Z)?;
    let superfluous = conditional_mi(filtered, &[Var::X], &[Var::Z], &[Var::Y1], z)?;
    let predictive = i(Var::Z, Var::Y1)?;
    let i_x2_z = i(Var::X2, Var::Z)?;
    let i_y2_z = i(Var::Y2, Var::Z)?;
    let (original_i_x2_z, original_i_y2_z) = match extend_encoder(original, enc) {
        Some(ext) => (
            Some(mutual_information(original, &[Var::X2], &[Var::Z], Some(&ext))?),
            Some(mutual_information(original, &[Var::Y2], &[Var::Z], Some(&ext))?),
        ),
        None => (None, None),
    };
    let within = |v: Option<f64>| v.is_some_and(|v| v <= MI_TOL);
    let blind = i_x2_z <= MI_TOL && i_y2_z <= MI_TOL && within(original_i_x2_z) && within(original_i_y2_z);
    Ok(MinimizerReport {
        encoder: enc.clone(),
        loss: ib_loss(filtered, enc, beta)?,
        h_z: joint_entropy(filtered, &[Var::Z], z)?,
        i_x_z,
        sufficiency_gap: conditional_mi(filtered, &[Var::X], &[Var::Y1], &[Var::Z], z)?,
        superfluous,
        predictive,
        decomposition_residual: (superfluous + predictive - i_x_z).abs(),
        i_x2_z,
        i_y2_z,
        original_i_x2_z,
        original_i_y2_z,
        blind,
    })
}

/// Filters the joint to `y2 ∈ allowed_labels`, finds every bottleneck
/// minimizer on the result, and measures how much each one carries about
/// `x2` and `y2`.
pub fn verify_label_blindness(
    joint: &DiscreteJoint,
    allowed_labels: &[usize],
    config: &IbConfig,
) -> Result<BlindnessReport> {
    let filtered = filter_distribution(joint, allowed_labels)?;
    let solution = minimize_ib(&filtered, config)?;
    let original = ReportJointStats::of(joint)?;
    let minimizers = solution
        .minimizers
        .iter()
        .map(|enc| {
            debug_assert!(is_sufficient(&filtered, enc).unwrap_or(false));
            measure(joint, &filtered, enc, config.beta)
        })
        .collect::<Result<Vec<_>>>()?;
    let hypotheses_hold = original.i_x1_x2 <= MI_TOL;
    let label_blind = minimizers.iter().all(|m| m.blind);
    let mut allowed = allowed_labels.to_vec();
    allowed.sort_unstable();
    allowed.dedup();
    Ok(BlindnessReport {
        beta: config.beta,
        allowed_labels: allowed,
        mi_tolerance: MI_TOL,
        filtered: ReportJointStats::of(&filtered)?,
        original,
        hypotheses_hold,
        min_loss: solution.min_loss,
        n_sufficient: solution.n_sufficient,
        minimizers,
        label_blind,
        consistent: !hypotheses_hold || label_blind,
    })
}
