use serde::{Deserialize, Serialize};

use super::joint::{conditional_mi, joint_entropy, mutual_information, DiscreteJoint, Encoder, Var};
use super::{entropy_unchecked, MI_TOL};
use crate::error::{Error, Result};

pub const DEFAULT_BETA: f64 = 4.0;

/// Largest support the exhaustive search accepts by default (Bell(12) ≈ 4.2M
/// partitions).
pub const DEFAULT_MAX_CELLS: usize = 12;

/// Losses this close to the minimum count as tied minimizers.
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IbConfig {
    /// Weight on `I(z; y1)`; must exceed 1.
    pub beta: f64,
    /// Optional cap on the number of code symbols.
    #[serde(default)]
    pub max_code_size: Option<usize>,
    #[serde(default = "default_max_cells")]
    pub max_cells: usize,
}

fn default_max_cells() -> usize {
    DEFAULT_MAX_CELLS
}

impl Default for IbConfig {
    fn default() -> Self {
        Self {
            beta: DEFAULT_BETA,
            max_code_size: None,
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

impl IbConfig {
    fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "beta must be a finite value > 1, got {}",
                self.beta
            )));
        }
        if self.max_code_size == Some(0) {
            return Err(Error::InvalidArgument("max_code_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Both forms of the bottleneck loss for one encoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IbLoss {
    /// `I(x; z) - beta * I(z; y1)`
    pub mi_form: f64,
    /// `H(z) - beta * I(z; y1)`, equal to `mi_form` when `H(z | x) = 0`.
    pub entropy_form: f64,
}

impl IbLoss {
    pub fn forms_agree(&self, tol: f64) -> bool {
        (self.mi_form - self.entropy_form).abs() <= tol
    }
}

pub fn ib_loss(joint: &DiscreteJoint, encoder: &Encoder, beta: f64) -> Result<IbLoss> {
    let enc = Some(encoder);
    let i_xz = mutual_information(joint, &[Var::X], &[Var::Z], enc)?;
    let i_zy = mutual_information(joint, &[Var::Z], &[Var::Y1], enc)?;
    let h_z = joint_entropy(joint, &[Var::Z], enc)?;
    Ok(IbLoss {
        mi_form: i_xz - beta * i_zy,
        entropy_form: h_z - beta * i_zy,
    })
}

/// Number of set partitions of `n` elements.
pub fn bell_number(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("row is never empty"));
        for v in &row {
            let prev = *next.last().expect("seeded above");
            next.push(prev + v);
        }
        row = next;
    }
    row[0]
}

/// Visits every set partition of `0..n` with at most `max_blocks` blocks as a
/// restricted growth string (element `i` goes to block `rgs[i]`, and each
/// new block index is one past the largest used so far).
pub fn for_each_partition(n: usize, max_blocks: usize, mut f: impl FnMut(&[usize], usize)) {
    fn rec(i: usize, blocks: usize, max: usize, rgs: &mut Vec<usize>, f: &mut dyn FnMut(&[usize], usize)) {
        if i == rgs.len() {
            f(rgs, blocks);
            return;
        }
        for b in 0..blocks {
            rgs[i] = b;
            rec(i + 1, blocks, max, rgs, f);
        }
        if blocks < max {
            rgs[i] = blocks;
            rec(i + 1, blocks + 1, max, rgs, f);
        }
    }
    let mut rgs = vec![0; n];
    rec(0, 0, max_blocks, &mut rgs, &mut f);
}

/// Loss-minimizing encoders found by exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IbSolution {
    pub minimizers: Vec<Encoder>,
    pub min_loss: f64,
    /// Support size the search ran over.
    pub support_cells: usize,
    /// Sufficient encoders visited.
    pub n_sufficient: u64,
    /// Encoders visited in total (pruned subtrees excluded).
    pub n_visited: u64,
}

struct Cells {
    cells: Vec<(usize, usize)>,
    mass: Vec<f64>,
    /// Dense id of `y1` per cell.
    y: Vec<usize>,
    n_y: usize,
    h_y1: f64,
}

fn cells_of(joint: &DiscreteJoint, config: &IbConfig) -> Result<Cells> {
    config.validate()?;
    let cells = joint.support();
    if cells.len() > config.max_cells {
        return Err(Error::BudgetExceeded {
            cells: cells.len(),
            budget: config.max_cells,
        });
    }
    let mut labels: Vec<usize> = cells.iter().map(|&(a, _)| joint.f1()[a]).collect();
    labels.sort_unstable();
    labels.dedup();
    let y: Vec<usize> = cells
        .iter()
        .map(|&(a, _)| labels.binary_search(&joint.f1()[a]).expect("label collected above"))
        .collect();
    let mass: Vec<f64> = cells.iter().map(|&(a, b)| joint.p(a, b)).collect();
    let mut y_mass = vec![0.0; labels.len()];
    for (&yi, &m) in y.iter().zip(&mass) {
        y_mass[yi] += m;
    }
    Ok(Cells {
        h_y1: entropy_unchecked(&y_mass),
        n_y: labels.len(),
        cells,
        mass,
        y,
    })
}

struct Best {
    loss: f64,
    ties: Vec<Vec<usize>>,
}

impl Best {
    fn offer(&mut self, loss: f64, rgs: &[usize]) {
        if loss < self.loss - TIE_TOL {
            self.loss = loss;
            self.ties.clear();
            self.ties.push(rgs.to_vec());
        } else if loss <= self.loss + TIE_TOL {
            self.ties.push(rgs.to_vec());
            self.loss = self.loss.min(loss);
        }
    }
}

fn block_entropy(mass: &[f64]) -> f64 {
    entropy_unchecked(mass)
}

/// Exhaustive bottleneck minimization over deterministic encoders.
///
/// Enumerates set partitions of the support (codes up to relabeling), keeps
/// the sufficient ones, and returns every encoder attaining the minimum of
/// `I(x; z) - beta * I(z; y1)`. Because `y1` is a function of `x`, an
/// encoder is sufficient exactly when each block carries a single `y1`
/// value; once a block mixes two values no refinement of the remaining
/// cells can undo it, so those subtrees are skipped.
pub fn minimize_ib(joint: &DiscreteJoint, config: &IbConfig) -> Result<IbSolution> {
    let c = cells_of(joint, config)?;
    let n = c.cells.len();
    let max_blocks = config.max_code_size.unwrap_or(n).min(n);

    struct Search<'a> {
        c: &'a Cells,
        beta: f64,
        max_blocks: usize,
        rgs: Vec<usize>,
        block_mass: Vec<f64>,
        block_y: Vec<usize>,
        best: Best,
        n_leaves: u64,
    }

    impl Search<'_> {
        fn rec(&mut self, i: usize, blocks: usize) {
            if i == self.c.cells.len() {
                self.n_leaves += 1;
                // Every block is pure, so H(y1 | z) = 0 and I(z; y1) = H(y1);
                // with z a function of x, I(x; z) = H(z).
                let h_z = block_entropy(&self.block_mass[..blocks]);
                let loss = h_z - self.beta * self.c.h_y1;
                self.best.offer(loss, &self.rgs);
                return;
            }
            let (m, y) = (self.c.mass[i], self.c.y[i]);
            for b in 0..blocks {
                if self.block_y[b] == y {
                    self.rgs[i] = b;
                    let saved = self.block_mass[b];
                    self.block_mass[b] += m;
                    self.rec(i + 1, blocks);
                    self.block_mass[b] = saved;
                }
            }
            if blocks < self.max_blocks {
                self.rgs[i] = blocks;
                self.block_mass[blocks] = m;
                self.block_y[blocks] = y;
                self.rec(i + 1, blocks + 1);
                self.block_mass[blocks] = 0.0;
            }
        }
    }

    let mut s = Search {
        c: &c,
        beta: config.beta,
        max_blocks,
        rgs: vec![0; n],
        block_mass: vec![0.0; n],
        block_y: vec![usize::MAX; n],
        best: Best {
            loss: f64::INFINITY,
            ties: Vec::new(),
        },
        n_leaves: 0,
    };
    s.rec(0, 0);
    if s.best.ties.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no sufficient encoder exists with at most {max_blocks} codes"
        )));
    }
    let minimizers = s
        .best
        .ties
        .iter()
        .map(|rgs| Encoder::from_cells(joint.shape(), &c.cells, rgs))
        .collect();
    Ok(IbSolution {
        minimizers,
        min_loss: s.best.loss,
        support_cells: n,
        n_sufficient: s.n_leaves,
        n_visited: s.n_leaves,
    })
}

/// Minimizers of the loss over *all* deterministic encoders, sufficient or
/// not. For `beta > 1` these coincide with [`minimize_ib`]'s.
pub fn global_minimizers(joint: &DiscreteJoint, config: &IbConfig) -> Result<IbSolution> {
    let c = cells_of(joint, config)?;
    let n = c.cells.len();
    let max_blocks = config.max_code_size.unwrap_or(n).min(n);
    let mut best = Best {
        loss: f64::INFINITY,
        ties: Vec::new(),
    };
    let (mut visited, mut sufficient) = (0u64, 0u64);
    let mut block_mass = vec![0.0; n];
    let mut block_y = vec![0.0; n * c.n_y];
    for_each_partition(n, max_blocks, |rgs, blocks| {
        visited += 1;
        block_mass[..blocks].iter_mut().for_each(|m| *m = 0.0);
        block_y[..blocks * c.n_y].iter_mut().for_each(|m| *m = 0.0);
        for i in 0..n {
            block_mass[rgs[i]] += c.mass[i];
            block_y[rgs[i] * c.n_y + c.y[i]] += c.mass[i];
        }
        let h_z = block_entropy(&block_mass[..blocks]);
        let h_zy = block_entropy(&block_y[..blocks * c.n_y]);
        let i_zy = h_z + c.h_y1 - h_zy;
        if h_zy - h_z <= MI_TOL {
            sufficient += 1;
        }
        best.offer(h_z - config.beta * i_zy, rgs);
    });
    let minimizers = best
        .ties
        .iter()
        .map(|rgs| Encoder::from_cells(joint.shape(), &c.cells, rgs))
        .collect();
    Ok(IbSolution {
        minimizers,
        min_loss: best.loss,
        support_cells: n,
        n_sufficient: sufficient,
        n_visited: visited,
    })
}

/// Sufficiency of `z` for `y1`: `I(x; y1 | z) <= MI_TOL`.
pub(crate) fn is_sufficient(joint: &DiscreteJoint, encoder: &Encoder) -> Result<bool> {
    Ok(conditional_mi(joint, &[Var::X], &[Var::Y1], &[Var::Z], Some(encoder))? <= MI_TOL)
}
