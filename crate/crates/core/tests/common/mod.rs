//! Random corpora and brute-force oracles shared by the integration tests.
//! Oracles here never call the library's entropy or MI code.

#![allow(dead_code)]

use std::collections::BTreeMap;

use oodbench::infotheory::{for_each_partition, DiscreteJoint, Encoder};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

fn random_pmf(rng: &mut ChaCha8Rng, n: usize, allow_zero: bool) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    if allow_zero && n > 1 && rng.random_bool(0.15) {
        let i = rng.random_range(0..n);
        p[i] = 0.0;
    }
    let total: f64 = p.iter().sum();
    p.iter().map(|v| v / total).collect()
}

/// Independent joint with `|X1| ∈ 2..=4`, `|X2| ∈ 2..=3` (at most 12 cells)
/// and random deterministic labelings.
pub fn random_independent_joint(rng: &mut ChaCha8Rng) -> DiscreteJoint {
    let n1 = rng.random_range(2..=4);
    let n2 = rng.random_range(2..=3);
    let p1 = random_pmf(rng, n1, true);
    let p2 = random_pmf(rng, n2, true);
    let f1 = (0..n1).map(|_| rng.random_range(0..n1)).collect();
    let f2 = (0..n2).map(|_| rng.random_range(0..n2)).collect();
    DiscreteJoint::independent(&p1, &p2, f1, f2).expect("valid by construction")
}

/// Joint with an arbitrary (generally dependent) pmf.
pub fn random_joint(rng: &mut ChaCha8Rng, n1: usize, n2: usize) -> DiscreteJoint {
    let flat = random_pmf(rng, n1 * n2, true);
    let pmf = flat.chunks(n2).map(<[f64]>::to_vec).collect();
    let f1 = (0..n1).map(|_| rng.random_range(0..n1)).collect();
    let f2 = (0..n2).map(|_| rng.random_range(0..n2)).collect();
    DiscreteJoint::new(pmf, f1, f2).expect("valid by construction")
}

/// A random nonempty subset of the `y2` labels carrying positive mass.
pub fn random_label_subset(rng: &mut ChaCha8Rng, joint: &DiscreteJoint) -> Vec<usize> {
    let p2 = joint.marginal_x2();
    let mut labels: Vec<usize> = (0..p2.len()).filter(|&b| p2[b] > 0.0).map(|b| joint.f2()[b]).collect();
    labels.sort_unstable();
    labels.dedup();
    loop {
        let pick: Vec<usize> = labels.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        if !pick.is_empty() {
            return pick;
        }
    }
}

/// Every deterministic encoder on the support when there are at most
/// `full_limit` cells, otherwise `samples` random ones (plus identity and
/// constant).
pub fn encoder_corpus(
    rng: &mut ChaCha8Rng,
    joint: &DiscreteJoint,
    full_limit: usize,
    samples: usize,
) -> Vec<Encoder> {
    let cells = joint.support();
    let n = cells.len();
    let mut out = Vec::new();
    if n <= full_limit {
        for_each_partition(n, n, |rgs, _| out.push(Encoder::from_cells(joint.shape(), &cells, rgs)));
        return out;
    }
    out.push(Encoder::identity(joint));
    out.push(Encoder::constant(joint));
    for _ in 0..samples {
        let blocks = rng.random_range(1..=n);
        let codes: Vec<usize> = (0..n).map(|_| rng.random_range(0..blocks)).collect();
        out.push(Encoder::from_cells(joint.shape(), &cells, &codes));
    }
    out
}

/// Value of a named variable on cell `(a, b)` under `enc`.
pub fn value(joint: &DiscreteJoint, enc: &Encoder, var: char, a: usize, b: usize) -> usize {
    match var {
        '1' => a,
        '2' => b,
        'x' => a * joint.shape().1 + b,
        'y' => joint.f1()[a],
        'w' => joint.f2()[b],
        'z' => enc.code(a, b).expect("encoder covers the support"),
        _ => unreachable!("unknown variable {var}"),
    }
}

/// `sum p(a,b) log2(p(a,b) / (p(a) p(b)))`, with `a` and `b` strings of
/// variable names (`1`=x1, `2`=x2, `x`, `y`=y1, `w`=y2, `z`).
pub fn oracle_mi(joint: &DiscreteJoint, enc: &Encoder, a: &str, b: &str) -> f64 {
    let key = |vars: &str, i: usize, j: usize| -> Vec<usize> {
        vars.chars().map(|v| value(joint, enc, v, i, j)).collect()
    };
    let mut pa: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut pb: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    let mut pab: BTreeMap<(Vec<usize>, Vec<usize>), f64> = BTreeMap::new();
    for (i, j) in joint.support() {
        let p = joint.p(i, j);
        *pa.entry(key(a, i, j)).or_default() += p;
        *pb.entry(key(b, i, j)).or_default() += p;
        *pab.entry((key(a, i, j), key(b, i, j))).or_default() += p;
    }
    pab.iter()
        .map(|((ka, kb), &p)| p * (p / (pa[ka] * pb[kb])).log2())
        .sum()
}

/// `I(a; b | c)` as `sum p(a,b,c) log2(p(a,b,c) p(c) / (p(a,c) p(b,c)))`.
pub fn oracle_cmi(joint: &DiscreteJoint, enc: &Encoder, a: &str, b: &str, c: &str) -> f64 {
    let key = |vars: &str, i: usize, j: usize| -> Vec<usize> {
        vars.chars().map(|v| value(joint, enc, v, i, j)).collect()
    };
    type K = Vec<usize>;
    let mut pc: BTreeMap<K, f64> = BTreeMap::new();
    let mut pac: BTreeMap<(K, K), f64> = BTreeMap::new();
    let mut pbc: BTreeMap<(K, K), f64> = BTreeMap::new();
    let mut pabc: BTreeMap<(K, K, K), f64> = BTreeMap::new();
    for (i, j) in joint.support() {
        let p = joint.p(i, j);
        let (ka, kb, kc) = (key(a, i, j), key(b, i, j), key(c, i, j));
        *pc.entry(kc.clone()).or_default() += p;
        *pac.entry((ka.clone(), kc.clone())).or_default() += p;
        *pbc.entry((kb.clone(), kc.clone())).or_default() += p;
        *pabc.entry((ka, kb, kc)).or_default() += p;
    }
    pabc.iter()
        .map(|((ka, kb, kc), &p)| {
            let num = p * pc[kc];
            let den = pac[&(ka.clone(), kc.clone())] * pbc[&(kb.clone(), kc.clone())];
            p * (num / den).log2()
        })
        .sum()
}

/// Pairwise AUROC: `P(ood > id) + 0.5 P(ood == id)`.
pub fn pairwise_auroc(id: &[f64], ood: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &o in ood {
        for &i in id {
            if o > i {
                wins += 1.0;
            } else if o == i {
                wins += 0.5;
            }
        }
    }
    wins / (id.len() * ood.len()) as f64
}

/// Threshold scan: walk the distinct ID scores upward and stop at the first
/// `t` with `100 * #{id <= t} >= pct * n`, then count OOD scores `<= t`.
pub fn scan_fpr(id: &[f64], ood: &[f64], pct: usize) -> f64 {
    let mut ts = id.to_vec();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let n = id.len();
    for t in ts {
        let kept = id.iter().filter(|&&s| s <= t).count();
        if 100 * kept >= pct * n {
            return ood.iter().filter(|&&s| s <= t).count() as f64 / ood.len() as f64;
        }
    }
    unreachable!("the largest ID score keeps every ID sample")
}

/// Score vectors mixing continuous draws and values from a small grid, so
/// ties are frequent.
pub fn random_scores(rng: &mut ChaCha8Rng, n: usize, shift: f64) -> Vec<f64> {
    let tied = rng.random_bool(0.5);
    (0..n)
        .map(|_| {
            if tied {
                f64::from(rng.random_range(0..8)) / 4.0 + shift
            } else {
                rng.random_range(-3.0..3.0) + shift
            }
        })
        .collect()
}
