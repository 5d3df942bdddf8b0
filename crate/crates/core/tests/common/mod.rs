#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use predual::generate::{random_density_block, rational_unitary};
use predual::matrix::BlockMatrix;
use predual::{AlgebraShape, Functional};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// Random strictly decreasing cluster data with `Σ m_i ≤ max_total`.
pub fn random_clusters(rng: &mut ChaCha8Rng, max_total: usize) -> Vec<(BigRational, usize)> {
    let r = rng.random_range(1..=6usize);
    let mut values: Vec<BigRational> = Vec::new();
    while values.len() < r {
        let v = q(rng.random_range(1..=12), rng.random_range(1..=12));
        if !values.contains(&v) {
            values.push(v);
        }
    }
    values.sort_by(|a, b| b.cmp(a));
    let mut budget = max_total;
    let mut clusters = Vec::new();
    for (i, v) in values.into_iter().enumerate() {
        let reserve = r - i - 1;
        if budget <= reserve {
            break;
        }
        let m = rng.random_range(1..=4usize.min(budget - reserve));
        budget -= m;
        clusters.push((v, m));
    }
    clusters
}

/// Exhaustive oracle over every selection, in integers over a common
/// denominator. Returns (total `A`, sums `s` of all selections, selections).
pub struct BruteForce {
    pub total: i128,
    pub selections: Vec<(Vec<usize>, i128)>,
}

impl BruteForce {
    pub fn new(clusters: &[(BigRational, usize)]) -> Self {
        let denom = clusters.iter().fold(BigInt::from(1), |acc, (l, _)| acc.lcm(l.denom()));
        let ints: Vec<i128> = clusters
            .iter()
            .map(|(l, _)| {
                let v = l.numer() * (&denom / l.denom());
                i128::try_from(v).expect("small test values")
            })
            .collect();
        let mut selections = vec![(Vec::new(), 0i128)];
        for (c, (_, m)) in ints.iter().zip(clusters) {
            let mut next = Vec::new();
            for (k, s) in &selections {
                for ki in 0..=*m {
                    let mut k2 = k.clone();
                    k2.push(ki);
                    next.push((k2, s + c * ki as i128));
                }
            }
            selections = next;
        }
        let total = ints.iter().zip(clusters).map(|(c, (_, m))| c * *m as i128).sum();
        BruteForce { total, selections }
    }

    pub fn solutions(&self) -> Vec<Vec<usize>> {
        let mut s: Vec<Vec<usize>> = self
            .selections
            .iter()
            .filter(|(_, s)| 2 * s == self.total)
            .map(|(k, _)| k.clone())
            .collect();
        s.sort();
        s
    }

    pub fn solvable(&self) -> bool {
        self.selections.iter().any(|(_, s)| 2 * s == self.total)
    }

    /// Minimal `|2s − A|`, in common-denominator units.
    pub fn min_defect_units(&self) -> i128 {
        self.selections.iter().map(|(_, s)| (2 * s - self.total).abs()).min().unwrap()
    }

    /// Optimal selection under the tie-breaking rules.
    pub fn best(&self) -> Vec<usize> {
        self.selections
            .iter()
            .min_by_key(|(k, s)| ((2 * s - self.total).abs(), 2 * s > self.total, k.clone()))
            .map(|(k, _)| k.clone())
            .unwrap()
    }

    pub fn unit(&self, clusters: &[(BigRational, usize)]) -> BigRational {
        let denom = clusters.iter().fold(BigInt::from(1), |acc, (l, _)| acc.lcm(l.denom()));
        BigRational::new(1.into(), denom)
    }
}

/// Exact functional with the given cluster spectrum, spread over random
/// blocks, each `a = v·diag(w)` with a Gaussian-rational unitary `v`.
pub fn exact_functional(rng: &mut ChaCha8Rng, clusters: &[(BigRational, usize)]) -> Functional<BigRational> {
    let mut weights: Vec<BigRational> = clusters
        .iter()
        .flat_map(|(l, m)| std::iter::repeat_n(l.clone(), *m))
        .collect();
    weights.shuffle(rng);
    let mut blocks = Vec::new();
    let mut rest = weights.len();
    while rest > 0 {
        let d = rng.random_range(1..=rest.min(5));
        blocks.push(d);
        rest -= d;
    }
    // one extra block carrying no weight exercises the support
    if rng.random_bool(0.3) {
        blocks.push(rng.random_range(1..=2));
    }
    let shape = Arc::new(AlgebraShape::new(blocks.clone()).unwrap());
    let mut offset = 0;
    let mut dense = Vec::new();
    for &d in &blocks {
        let v = rational_unitary(rng, d);
        let w: Vec<BigRational> = (0..d)
            .map(|i| weights.get(offset + i).cloned().unwrap_or_else(|| q(0, 1)))
            .collect();
        offset += d;
        dense.push(DMatrix::from_fn(d, d, |i, j| &v[(i, j)] * Complex::new(w[j].clone(), q(0, 1))));
    }
    Functional::new(BlockMatrix::from_blocks(shape, dense).unwrap())
}

/// Random float functional: blocks `u·p` with `p` a density matrix of random
/// rank and `u` Haar unitary, overall trace norm 1.
pub fn float_functional(rng: &mut ChaCha8Rng, max_dim: usize, max_blocks: usize) -> Functional<f64> {
    let nb = rng.random_range(1..=max_blocks);
    let blocks: Vec<usize> = (0..nb).map(|_| rng.random_range(1..=max_dim)).collect();
    let shape = Arc::new(AlgebraShape::new(blocks.clone()).unwrap());
    let mut dense = Vec::new();
    for &d in &blocks {
        let rank = rng.random_range(1..=d);
        dense.push(random_density_block(rng, d, rank) / Complex::new(nb as f64, 0.0));
    }
    Functional::new(BlockMatrix::from_blocks(shape, dense).unwrap())
}

/// Float functional `u·diag(w)·u*`-style with prescribed weights on one block.
pub fn float_with_weights(rng: &mut ChaCha8Rng, weights: &[f64]) -> Functional<f64> {
    let d = weights.len();
    let u = predual::generate::random_unitary(rng, d);
    let w = predual::generate::random_unitary(rng, d);
    let diag = DMatrix::from_fn(d, d, |i, j| if i == j { Complex::new(weights[i], 0.0) } else { Complex::new(0.0, 0.0) });
    let shape = Arc::new(AlgebraShape::new(vec![d]).unwrap());
    Functional::new(BlockMatrix::from_blocks(shape, vec![&u * diag * w.adjoint()]).unwrap())
}
