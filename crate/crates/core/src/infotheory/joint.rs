use serde::{Deserialize, Serialize};

use super::{validate_pmf, MI_TOL, PMF_TOL};
use crate::error::{Error, Result};

/// Random variables that can be read off a support cell `(x1, x2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X1,
    X2,
    /// The pair `(x1, x2)`.
    X,
    Y1,
    Y2,
    /// The code assigned by an encoder.
    Z,
}

/// Joint pmf over `X1 × X2` with labelings `f1: X1 → Y1` and `f2: X2 → Y2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteJoint {
    n1: usize,
    n2: usize,
    /// Row-major `n1 × n2`.
    pmf: Vec<f64>,
    f1: Vec<usize>,
    f2: Vec<usize>,
}

impl DiscreteJoint {
    pub fn new(pmf: Vec<Vec<f64>>, f1: Vec<usize>, f2: Vec<usize>) -> Result<Self> {
        let n1 = pmf.len();
        let n2 = pmf.first().map_or(0, Vec::len);
        if n1 == 0 || n2 == 0 {
            return Err(Error::InvalidPmf("joint must be at least 1 × 1".into()));
        }
        if let Some(r) = pmf.iter().position(|row| row.len() != n2) {
            return Err(Error::InvalidPmf(format!("row {r} has the wrong length")));
        }
        let flat: Vec<f64> = pmf.into_iter().flatten().collect();
        validate_pmf(&flat, PMF_TOL)?;
        if f1.len() != n1 || f2.len() != n2 {
            return Err(Error::InvalidPmf(format!(
                "labelings must be total: |X1| = {n1}, |f1| = {}, |X2| = {n2}, |f2| = {}",
                f1.len(),
                f2.len()
            )));
        }
        Ok(Self {
            n1,
            n2,
            pmf: flat,
            f1,
            f2,
        })
    }

    /// Product of two marginals.
    pub fn independent(p1: &[f64], p2: &[f64], f1: Vec<usize>, f2: Vec<usize>) -> Result<Self> {
        let pmf = p1
            .iter()
            .map(|&a| p2.iter().map(|&b| a * b).collect())
            .collect();
        Self::new(pmf, f1, f2)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn p(&self, x1: usize, x2: usize) -> f64 {
        self.pmf[x1 * self.n2 + x2]
    }

    pub fn f1(&self) -> &[usize] {
        &self.f1
    }

    pub fn f2(&self) -> &[usize] {
        &self.f2
    }

    /// Cells with positive mass, row-major.
    pub fn support(&self) -> Vec<(usize, usize)> {
        (0..self.n1)
            .flat_map(|a| (0..self.n2).map(move |b| (a, b)))
            .filter(|&(a, b)| self.p(a, b) > 0.0)
            .collect()
    }

    pub fn marginal_x1(&self) -> Vec<f64> {
        (0..self.n1)
            .map(|a| (0..self.n2).map(|b| self.p(a, b)).sum())
            .collect()
    }

    pub fn marginal_x2(&self) -> Vec<f64> {
        (0..self.n2)
            .map(|b| (0..self.n1).map(|a| self.p(a, b)).sum())
            .collect()
    }

    fn value(&self, var: Var, x1: usize, x2: usize, code: Option<usize>) -> usize {
        match var {
            Var::X1 => x1,
            Var::X2 => x2,
            Var::X => x1 * self.n2 + x2,
            Var::Y1 => self.f1[x1],
            Var::Y2 => self.f2[x2],
            Var::Z => code.expect("code resolved before lookup"),
        }
    }
}

/// Deterministic encoder `z = g(x1, x2)`, stored densely over the grid.
/// Cells outside the encoder's domain hold `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Encoder {
    n1: usize,
    n2: usize,
    codes: Vec<Option<usize>>,
    code_size: usize,
}

impl Encoder {
    /// Encoder defined on the listed cells. Codes are relabeled canonically
    /// (first appearance in the given order gets 0, then 1, ...).
    pub fn from_cells(shape: (usize, usize), cells: &[(usize, usize)], codes: &[usize]) -> Self {
        let (n1, n2) = shape;
        let mut dense = vec![None; n1 * n2];
        let mut relabel: Vec<(usize, usize)> = Vec::new();
        for (&(a, b), &c) in cells.iter().zip(codes) {
            let canon = match relabel.iter().find(|(raw, _)| *raw == c) {
                Some(&(_, k)) => k,
                None => {
                    relabel.push((c, relabel.len()));
                    relabel.len() - 1
                }
            };
            dense[a * n2 + b] = Some(canon);
        }
        Self {
            n1,
            n2,
            codes: dense,
            code_size: relabel.len(),
        }
    }

    /// Encoder over the joint's support computed by `g`.
    pub fn from_fn(joint: &DiscreteJoint, g: impl Fn(usize, usize) -> usize) -> Self {
        let cells = joint.support();
        let codes: Vec<usize> = cells.iter().map(|&(a, b)| g(a, b)).collect();
        Self::from_cells(joint.shape(), &cells, &codes)
    }

    pub fn identity(joint: &DiscreteJoint) -> Self {
        let n2 = joint.n2;
        Self::from_fn(joint, |a, b| a * n2 + b)
    }

    pub fn constant(joint: &DiscreteJoint) -> Self {
        Self::from_fn(joint, |_, _| 0)
    }

    pub fn code(&self, x1: usize, x2: usize) -> Option<usize> {
        self.codes.get(x1 * self.n2 + x2).copied().flatten()
    }

    pub fn code_size(&self) -> usize {
        self.code_size
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    /// Codes listed over `cells`, in order.
    pub fn codes_on(&self, cells: &[(usize, usize)]) -> Vec<Option<usize>> {
        cells.iter().map(|&(a, b)| self.code(a, b)).collect()
    }

    /// Blocks of the partition this encoder induces on `cells`.
    pub fn blocks(&self, cells: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
        let mut blocks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.code_size];
        for &(a, b) in cells {
            if let Some(c) = self.code(a, b) {
                blocks[c].push((a, b));
            }
        }
        blocks.retain(|b| !b.is_empty());
        blocks
    }
}

fn resolve_codes(
    joint: &DiscreteJoint,
    vars: &[Var],
    encoder: Option<&Encoder>,
) -> Result<Vec<((usize, usize), Option<usize>)>> {
    let needs_z = vars.contains(&Var::Z);
    let enc = match (needs_z, encoder) {
        (true, None) => {
            return Err(Error::InvalidArgument(
                "selector z requires an encoder".into(),
            ))
        }
        (true, Some(e)) => {
            if e.shape() != joint.shape() {
                return Err(Error::InvalidArgument(format!(
                    "encoder shape {:?} does not match joint shape {:?}",
                    e.shape(),
                    joint.shape()
                )));
            }
            Some(e)
        }
        (false, _) => None,
    };
    joint
        .support()
        .into_iter()
        .map(|(a, b)| match enc {
            Some(e) => e.code(a, b).map(|c| ((a, b), Some(c))).ok_or_else(|| {
                Error::InvalidArgument(format!("encoder is undefined on support cell ({a}, {b})"))
            }),
            None => Ok(((a, b), None)),
        })
        .collect()
}

/// Entropy of the tuple `vars` under the joint (and encoder, if `Z` is used).
pub fn joint_entropy(joint: &DiscreteJoint, vars: &[Var], encoder: Option<&Encoder>) -> Result<f64> {
    let cells = resolve_codes(joint, vars, encoder)?;
    let mut keyed: Vec<(Vec<usize>, f64)> = cells
        .iter()
        .map(|&((a, b), code)| {
            let key = vars.iter().map(|&v| joint.value(v, a, b, code)).collect();
            (key, joint.p(a, b))
        })
        .collect();
    keyed.sort_by(|x, y| x.0.cmp(&y.0));
    let mut h = 0.0;
    let mut i = 0;
    while i < keyed.len() {
        let mut mass = 0.0;
        let mut j = i;
        while j < keyed.len() && keyed[j].0 == keyed[i].0 {
            mass += keyed[j].1;
            j += 1;
        }
        if mass > 0.0 {
            h -= mass * mass.log2();
        }
        i = j;
    }
    Ok(h)
}

fn union(a: &[Var], b: &[Var]) -> Vec<Var> {
    let mut out = a.to_vec();
    out.extend(b.iter().filter(|v| !a.contains(v)));
    out
}

fn check_selectors(sets: &[&[Var]]) -> Result<()> {
    if sets.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidArgument("empty variable selector".into()));
    }
    Ok(())
}

/// `H(a) + H(b) - H(a, b)` without clamping.
pub fn mutual_information_unclamped(
    joint: &DiscreteJoint,
    a: &[Var],
    b: &[Var],
    encoder: Option<&Encoder>,
) -> Result<f64> {
    check_selectors(&[a, b])?;
    Ok(joint_entropy(joint, a, encoder)? + joint_entropy(joint, b, encoder)?
        - joint_entropy(joint, &union(a, b), encoder)?)
}

fn clamp(v: f64) -> f64 {
    if v < 0.0 && v >= -MI_TOL {
        0.0
    } else {
        v
    }
}

/// `I(a; b)` in bits, with round-off in `[-1e-12, 0)` clamped to zero.
pub fn mutual_information(
    joint: &DiscreteJoint,
    a: &[Var],
    b: &[Var],
    encoder: Option<&Encoder>,
) -> Result<f64> {
    mutual_information_unclamped(joint, a, b, encoder).map(clamp)
}

/// `I(a; b | c) = H(a, c) + H(b, c) - H(a, b, c) - H(c)`.
pub fn conditional_mi(
    joint: &DiscreteJoint,
    a: &[Var],
    b: &[Var],
    given: &[Var],
    encoder: Option<&Encoder>,
) -> Result<f64> {
    check_selectors(&[a, b, given])?;
    let ac = union(a, given);
    let bc = union(b, given);
    let abc = union(&union(a, b), given);
    let v = joint_entropy(joint, &ac, encoder)? + joint_entropy(joint, &bc, encoder)?
        - joint_entropy(joint, &abc, encoder)?
        - joint_entropy(joint, given, encoder)?;
    Ok(clamp(v))
}

/// Restricts the joint to cells whose `f2(x2)` is in `allowed_labels`, then
/// renormalizes.
pub fn filter_distribution(joint: &DiscreteJoint, allowed_labels: &[usize]) -> Result<DiscreteJoint> {
    if allowed_labels.is_empty() {
        return Err(Error::InvalidArgument("allowed label set is empty".into()));
    }
    let keep: Vec<bool> = joint.f2.iter().map(|y| allowed_labels.contains(y)).collect();
    let mut pmf = joint.pmf.clone();
    for a in 0..joint.n1 {
        for b in 0..joint.n2 {
            if !keep[b] {
                pmf[a * joint.n2 + b] = 0.0;
            }
        }
    }
    let total: f64 = pmf.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidArgument(
            "filtered distribution has empty support".into(),
        ));
    }
    for v in &mut pmf {
        *v /= total;
    }
    Ok(DiscreteJoint {
        pmf,
        ..joint.clone()
    })
}
