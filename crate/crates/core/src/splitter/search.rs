//! Bounded subset-sum search over cluster spectra.
//!
//! Given clusters `(λ_i, m_i)` with `S = Σ λ_i m_i`, find `0 ≤ k_i ≤ m_i`
//! minimising `|2 Σ λ_i k_i − S|`. Ties prefer `Σ λ_i k_i ≤ S/2`, then the
//! lexicographically smallest `k`.

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest half-enumeration handled by meet-in-the-middle.
pub const MITM_HALF_LIMIT: u128 = 1 << 21;

/// Upper bound on elementary steps a single search may take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WorkCap {
    pub limit: u64,
}

impl WorkCap {
    pub const DEFAULT: u64 = 200_000_000;
    pub const ENV_VAR: &'static str = "PREDUAL_WORK_CAP";

    pub fn new(limit: u64) -> Self {
        WorkCap { limit }
    }

    /// Default cap, overridden by `PREDUAL_WORK_CAP` when it parses.
    pub fn from_env() -> Self {
        std::env::var(Self::ENV_VAR)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .map(WorkCap::new)
            .unwrap_or_default()
    }

    pub fn check(&self, needed: u128) -> Result<()> {
        if needed > self.limit as u128 {
            Err(Error::WorkCapExceeded {
                needed,
                cap: self.limit,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for WorkCap {
    fn default() -> Self {
        WorkCap::new(Self::DEFAULT)
    }
}

fn product_of_ranges(mults: &[usize]) -> u128 {
    mults
        .iter()
        .fold(1u128, |acc, &m| acc.saturating_mul(m as u128 + 1))
}

/// Index splitting the clusters into two halves of balanced enumeration size.
fn balanced_split(mults: &[usize]) -> (usize, u128, u128) {
    let mut best = (0, 1, product_of_ranges(mults));
    for p in 0..=mults.len() {
        let left = product_of_ranges(&mults[..p]);
        let right = product_of_ranges(&mults[p..]);
        if left.max(right) < best.1.max(best.2) {
            best = (p, left, right);
        }
    }
    best
}

/// Sums of every selection on `values`, in lexicographic order of selection.
fn enumerate_sums<T>(values: &[T], mults: &[usize]) -> Vec<T>
where
    T: Clone + Zero + Add<Output = T>,
{
    let mut sums = vec![T::zero()];
    for (v, &m) in values.iter().zip(mults) {
        let mut next = Vec::with_capacity(sums.len() * (m + 1));
        for s in &sums {
            let mut acc = s.clone();
            next.push(acc.clone());
            for _ in 0..m {
                acc = acc + v.clone();
                next.push(acc.clone());
            }
        }
        sums = next;
    }
    sums
}

/// Mixed-radix decoding of a lexicographic selection index.
fn decode(mut index: usize, mults: &[usize]) -> Vec<usize> {
    let mut k = vec![0; mults.len()];
    for (slot, &m) in k.iter_mut().zip(mults).rev() {
        *slot = index % (m + 1);
        index /= m + 1;
    }
    k
}

/// Best reachable integer sum `≤ half` with its lexicographically smallest
/// selection, by meet-in-the-middle.
fn mitm_integer<T>(values: &[T], mults: &[usize], half: &T) -> Vec<usize>
where
    T: Clone + Ord + Hash + Zero + Add<Output = T> + Sub<Output = T>,
{
    let (p, _, _) = balanced_split(mults);
    let left = enumerate_sums(&values[..p], &mults[..p]);
    let right = enumerate_sums(&values[p..], &mults[p..]);

    let mut first_right: HashMap<T, usize> = HashMap::with_capacity(right.len());
    for (i, s) in right.iter().enumerate() {
        first_right.entry(s.clone()).or_insert(i);
    }
    let mut sorted_right: Vec<T> = first_right.keys().cloned().collect();
    sorted_right.sort();

    let mut best: Option<T> = None;
    for s in &left {
        if s > half {
            continue;
        }
        let room = half.clone() - s.clone();
        let pos = sorted_right.partition_point(|r| *r <= room);
        if pos == 0 {
            continue;
        }
        let total = s.clone() + sorted_right[pos - 1].clone();
        if best.as_ref().map_or(true, |b| total > *b) {
            best = Some(total);
        }
    }
    let best = best.expect("the empty selection is always feasible");
    for (li, s) in left.iter().enumerate() {
        if *s > best {
            continue;
        }
        if let Some(&ri) = first_right.get(&(best.clone() - s.clone())) {
            let mut k = decode(li, &mults[..p]);
            k.extend(decode(ri, &mults[p..]));
            return k;
        }
    }
    unreachable!("best sum was found among the half sums")
}

/// Suffix reachability layers: `layers[i]` holds the sums `≤ half` reachable
/// with clusters `i..`.
struct Layers {
    words: usize,
    layers: Vec<Vec<u64>>,
}

impl Layers {
    fn get(&self, i: usize, s: usize) -> bool {
        self.layers[i][s / 64] >> (s % 64) & 1 == 1
    }
}

fn shifted_or(acc: &mut [u64], src: &[u64], shift: usize) {
    let word_shift = shift / 64;
    let bit_shift = shift % 64;
    for w in (word_shift..acc.len()).rev() {
        let lo = src[w - word_shift];
        let mut v = lo << bit_shift;
        if bit_shift > 0 && w > word_shift {
            v |= src[w - word_shift - 1] >> (64 - bit_shift);
        }
        acc[w] |= v;
    }
}

fn dp_cost(values: &[usize], mults: &[usize], half: usize) -> u128 {
    let words = (half / 64 + 1) as u128;
    values
        .iter()
        .zip(mults)
        .map(|(&c, &m)| {
            let copies = if c == 0 { 0 } else { m.min(half / c) } as u128;
            (copies + 2) * words
        })
        .sum()
}

fn build_layers(values: &[usize], mults: &[usize], half: usize) -> Layers {
    let words = half / 64 + 1;
    let mask_last = if (half + 1) % 64 == 0 {
        u64::MAX
    } else {
        (1u64 << ((half + 1) % 64)) - 1
    };
    let r = values.len();
    let mut layers = vec![vec![0u64; words]; r + 1];
    layers[r][0] = 1;
    for i in (0..r).rev() {
        let (head, tail) = layers.split_at_mut(i + 1);
        let next = &tail[0];
        let acc = &mut head[i];
        acc.copy_from_slice(next);
        let c = values[i];
        if c > 0 {
            for k in 1..=mults[i] {
                let shift = k * c;
                if shift > half {
                    break;
                }
                shifted_or(acc, next, shift);
            }
        }
        acc[words - 1] &= mask_last;
    }
    Layers { words, layers }
}

/// Lexicographically smallest selection reaching `target`, given layers.
fn reconstruct(layers: &Layers, values: &[usize], mults: &[usize], target: usize) -> Vec<usize> {
    let mut k = Vec::with_capacity(values.len());
    let mut rest = target;
    for i in 0..values.len() {
        let chosen = (0..=mults[i])
            .find(|&ki| {
                let used = ki * values[i];
                used <= rest && layers.get(i + 1, rest - used)
            })
            .expect("target is reachable");
        rest -= chosen * values[i];
        k.push(chosen);
    }
    k
}

fn best_in_layer(layers: &Layers, upto: usize) -> usize {
    for w in (0..layers.words).rev() {
        let word = layers.layers[0][w];
        if word != 0 {
            let s = w * 64 + 63 - word.leading_zeros() as usize;
            if s <= upto {
                return s;
            }
        }
    }
    0
}

/// Integer bounded subset-sum with the crate's tie-breaking rules.
fn integer_closest(values: &[BigInt], mults: &[usize], cap: WorkCap) -> Result<Vec<usize>> {
    let total: BigInt = values
        .iter()
        .zip(mults)
        .map(|(v, &m)| v * BigInt::from(m))
        .sum();
    let half = total.div_floor(&BigInt::from(2));

    let (_, l, r) = balanced_split(mults);
    if l.max(r) <= MITM_HALF_LIMIT {
        cap.check(l + r)?;
        let fits = total.bits() < 120;
        return Ok(if fits {
            let small: Vec<i128> = values.iter().map(|v| v.to_i128().expect("fits")).collect();
            mitm_integer(&small, mults, &half.to_i128().expect("fits"))
        } else {
            mitm_integer(values, mults, &half)
        });
    }

    let half_usize = match half.to_usize() {
        Some(h) if (h as u128) <= cap.limit as u128 => h,
        _ => {
            return Err(Error::WorkCapExceeded {
                needed: half.to_u128().unwrap_or(u128::MAX),
                cap: cap.limit,
            })
        }
    };
    let small: Vec<usize> = values.iter().map(|v| v.to_usize().expect("bounded by total")).collect();
    cap.check(dp_cost(&small, mults, half_usize))?;
    let layers = build_layers(&small, mults, half_usize);
    let best = best_in_layer(&layers, half_usize);
    Ok(reconstruct(&layers, &small, mults, best))
}

/// Scales rational values to coprime integers.
fn to_integers(values: &[BigRational]) -> Vec<BigInt> {
    let denom = values
        .iter()
        .fold(BigInt::from(1), |acc, v| acc.lcm(v.denom()));
    let ints: Vec<BigInt> = values
        .iter()
        .map(|v| v.numer() * (&denom / v.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|v| v / &g).collect()
    }
}

/// Exact optimum over rational cluster values.
pub fn exact_closest(clusters: &[(BigRational, usize)], cap: WorkCap) -> Result<Vec<usize>> {
    let values: Vec<BigRational> = clusters.iter().map(|c| c.0.clone()).collect();
    let mults: Vec<usize> = clusters.iter().map(|c| c.1).collect();
    integer_closest(&to_integers(&values), &mults, cap)
}

/// Lexicographic enumeration of every selection with `Σ λ_i k_i = S/2`.
pub fn exact_solutions(clusters: &[(BigRational, usize)], limit: usize, cap: WorkCap) -> Result<Vec<Vec<usize>>> {
    let values: Vec<BigRational> = clusters.iter().map(|c| c.0.clone()).collect();
    let mults: Vec<usize> = clusters.iter().map(|c| c.1).collect();
    let ints = to_integers(&values);
    let total: BigInt = ints.iter().zip(&mults).map(|(v, &m)| v * BigInt::from(m)).sum();
    if total.is_odd() {
        return Ok(Vec::new());
    }
    let target = total / 2;
    // suffix maxima for pruning
    let mut suffix = vec![BigInt::zero(); ints.len() + 1];
    for i in (0..ints.len()).rev() {
        suffix[i] = &suffix[i + 1] + &ints[i] * BigInt::from(mults[i]);
    }
    let mut out = Vec::new();
    let mut k = vec![0usize; ints.len()];
    let mut work: u128 = 0;
    solutions_dfs(&ints, &mults, &suffix, 0, target, &mut k, &mut out, limit, &mut work, cap)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn solutions_dfs(
    ints: &[BigInt],
    mults: &[usize],
    suffix: &[BigInt],
    i: usize,
    rest: BigInt,
    k: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
    limit: usize,
    work: &mut u128,
    cap: WorkCap,
) -> Result<()> {
    *work += 1;
    cap.check(*work)?;
    if out.len() >= limit {
        return Ok(());
    }
    if i == ints.len() {
        if rest.is_zero() {
            out.push(k.clone());
        }
        return Ok(());
    }
    for ki in 0..=mults[i] {
        let remaining = &rest - &ints[i] * BigInt::from(ki);
        if remaining < BigInt::zero() {
            break;
        }
        if remaining > suffix[i + 1] {
            continue;
        }
        k[i] = ki;
        solutions_dfs(ints, mults, suffix, i + 1, remaining, k, out, limit, work, cap)?;
        if out.len() >= limit {
            break;
        }
    }
    k[i] = 0;
    Ok(())
}

/// `|Σ λ_i (2k_i − m_i)|` in floating point.
pub fn float_defect(clusters: &[(f64, usize)], k: &[usize]) -> f64 {
    clusters
        .iter()
        .zip(k)
        .map(|(&(l, m), &ki)| l * (2.0 * ki as f64 - m as f64))
        .sum::<f64>()
        .abs()
}

fn float_mass(clusters: &[(f64, usize)], k: &[usize]) -> f64 {
    clusters.iter().zip(k).map(|(&(l, _), &ki)| l * ki as f64).sum()
}

/// Ordering key implementing the tie-breaking rules in float mode.
fn better(clusters: &[(f64, usize)], total: f64, a: &[usize], b: &[usize]) -> bool {
    let (da, db) = (float_defect(clusters, a), float_defect(clusters, b));
    if da != db {
        return da < db;
    }
    let lo_a = 2.0 * float_mass(clusters, a) <= total;
    let lo_b = 2.0 * float_mass(clusters, b) <= total;
    if lo_a != lo_b {
        return lo_a;
    }
    a < b
}

/// Float optimum. Exhaustive (meet-in-the-middle) while the halves are small;
/// beyond that a quantized dynamic program plus a greedy fill, whose result is
/// the best candidate found rather than a proven optimum.
pub fn float_closest(clusters: &[(f64, usize)], cap: WorkCap) -> Result<Vec<usize>> {
    let mults: Vec<usize> = clusters.iter().map(|c| c.1).collect();
    let values: Vec<f64> = clusters.iter().map(|c| c.0).collect();
    let total: f64 = clusters.iter().map(|&(l, m)| l * m as f64).sum();
    let (p, l, r) = balanced_split(&mults);
    if l.max(r) <= MITM_HALF_LIMIT {
        cap.check(l + r)?;
        return Ok(float_mitm(clusters, &values, &mults, p, total));
    }

    let mut candidates = vec![greedy(clusters, total)];
    let n_total: usize = mults.iter().sum();
    let budget = (cap.limit as u128 / (n_total as u128 + 2)).clamp(1 << 10, 1 << 22) as usize;
    let grid = 2.0 * budget as f64;
    let pitch = total / grid;
    let quantized: Vec<usize> = values.iter().map(|&v| (v / pitch).round() as usize).collect();
    let qtotal: usize = quantized.iter().zip(&mults).map(|(c, m)| c * m).sum();
    let half = qtotal / 2;
    if dp_cost(&quantized, &mults, half) <= cap.limit as u128 {
        let layers = build_layers(&quantized, &mults, half);
        let best = best_in_layer(&layers, half);
        let k = reconstruct(&layers, &quantized, &mults, best);
        let complement: Vec<usize> = k.iter().zip(&mults).map(|(a, m)| m - a).collect();
        candidates.push(k);
        candidates.push(complement);
    }
    if n_total <= KK_ITEM_LIMIT {
        let k = differencing(clusters);
        let complement: Vec<usize> = k.iter().zip(&mults).map(|(a, m)| m - a).collect();
        candidates.push(k);
        candidates.push(complement);
    }
    let mut best = refine(clusters, candidates[0].clone(), total);
    for c in candidates.into_iter().skip(1) {
        let c = refine(clusters, c, total);
        if better(clusters, total, &c, &best) {
            best = c;
        }
    }
    Ok(neighbourhood_search(clusters, best, total))
}

/// Enumeration size of each half in one neighbourhood round.
const LNS_HALF_LIMIT: u128 = 1 << 16;
const LNS_ROUNDS: usize = 32;
/// Values a single cluster may move by within a round.
const LNS_WINDOW: usize = 2;

/// Large-neighbourhood search: repeatedly frees a random group of clusters
/// (each within a window around its current value), fixes the rest, and
/// solves the freed part exactly by meet-in-the-middle.
fn neighbourhood_search(clusters: &[(f64, usize)], mut best: Vec<usize>, total: f64) -> Vec<usize> {
    let floor = 8.0 * f64::EPSILON * total;
    let mut rng = ChaCha8Rng::seed_from_u64(clusters.len() as u64);
    for _ in 0..LNS_ROUNDS {
        if float_defect(clusters, &best) <= floor {
            break;
        }
        let mut order: Vec<usize> = (0..clusters.len()).collect();
        order.shuffle(&mut rng);
        let mut free = Vec::new();
        let mut size = 1u128;
        for i in order {
            let lo = best[i].saturating_sub(LNS_WINDOW);
            let hi = (best[i] + LNS_WINDOW).min(clusters[i].1);
            let range = (hi - lo) as u128 + 1;
            if size * range > LNS_HALF_LIMIT * LNS_HALF_LIMIT {
                continue;
            }
            size *= range;
            free.push((i, lo, hi - lo));
        }
        let fixed: f64 = clusters
            .iter()
            .enumerate()
            .filter(|(i, _)| !free.iter().any(|f| f.0 == *i))
            .map(|(i, &(l, _))| l * best[i] as f64)
            .sum::<f64>()
            + free.iter().map(|&(i, lo, _)| clusters[i].0 * lo as f64).sum::<f64>();
        let values: Vec<f64> = free.iter().map(|f| clusters[f.0].0).collect();
        let ranges: Vec<usize> = free.iter().map(|f| f.2).collect();
        let pick = mitm_nearest(&values, &ranges, total / 2.0 - fixed);
        let mut candidate = best.clone();
        for (&(i, lo, _), d) in free.iter().zip(pick) {
            candidate[i] = lo + d;
        }
        if better(clusters, total, &candidate, &best) {
            best = candidate;
        }
    }
    best
}

/// Selection (each `0..=ranges_i`) whose sum is nearest to `target`.
fn mitm_nearest(values: &[f64], ranges: &[usize], target: f64) -> Vec<usize> {
    let (p, _, _) = balanced_split(ranges);
    let left = enumerate_sums(&values[..p], &ranges[..p]);
    let right = enumerate_sums(&values[p..], &ranges[p..]);
    let mut order: Vec<usize> = (0..right.len()).collect();
    order.sort_by(|&a, &b| right[a].total_cmp(&right[b]));
    let mut best = (f64::INFINITY, 0, 0);
    for (li, &s) in left.iter().enumerate() {
        let room = target - s;
        let pos = order.partition_point(|&i| right[i] < room);
        for idx in [pos.checked_sub(1), (pos < order.len()).then_some(pos)].into_iter().flatten() {
            let gap = (s + right[order[idx]] - target).abs();
            if gap < best.0 {
                best = (gap, li, order[idx]);
            }
        }
    }
    let mut k = decode(best.1, &ranges[..p]);
    k.extend(decode(best.2, &ranges[p..]));
    k
}

fn float_mitm(clusters: &[(f64, usize)], values: &[f64], mults: &[usize], p: usize, total: f64) -> Vec<usize> {
    let left = enumerate_sums(&values[..p], &mults[..p]);
    let right = enumerate_sums(&values[p..], &mults[p..]);
    let mut order: Vec<usize> = (0..right.len()).collect();
    order.sort_by(|&a, &b| right[a].total_cmp(&right[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| right[i]).collect();

    let half = total / 2.0;
    let mut best: Option<Vec<usize>> = None;
    for (li, &s) in left.iter().enumerate() {
        let room = half - s;
        let pos = sorted.partition_point(|&x| x <= room);
        let mut probes = Vec::with_capacity(2);
        if pos > 0 {
            let v = sorted[pos - 1];
            probes.push(sorted.partition_point(|&x| x < v));
        }
        if pos < sorted.len() {
            probes.push(pos);
        }
        for idx in probes {
            let mut k = decode(li, &mults[..p]);
            k.extend(decode(order[idx], &mults[p..]));
            if best.as_ref().map_or(true, |b| better(clusters, total, &k, b)) {
                best = Some(k);
            }
        }
    }
    best.expect("at least one selection exists")
}

/// Largest item count handed to the differencing heuristic.
const KK_ITEM_LIMIT: usize = 1 << 21;

/// Largest-differencing partition of the expanded items: repeatedly replace
/// the two largest remaining values by their difference, placing them on
/// opposite sides.
fn differencing(clusters: &[(f64, usize)]) -> Vec<usize> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Key(f64);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Key {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }

    let mut owner = Vec::new();
    let mut heap = BinaryHeap::new();
    for (i, &(l, m)) in clusters.iter().enumerate() {
        for _ in 0..m {
            heap.push((Key(l), Reverse(owner.len())));
            owner.push(i);
        }
    }
    let leaves = owner.len();
    let mut parent: Vec<(usize, bool)> = vec![(usize::MAX, false); leaves];
    while heap.len() > 1 {
        let (Key(a), Reverse(ia)) = heap.pop().expect("two entries");
        let (Key(b), Reverse(ib)) = heap.pop().expect("two entries");
        let id = parent.len();
        parent.push((usize::MAX, false));
        parent[ia] = (id, false);
        parent[ib] = (id, true);
        heap.push((Key(a - b), Reverse(id)));
    }
    let mut side = vec![false; parent.len()];
    for id in (0..parent.len()).rev() {
        let (p, flip) = parent[id];
        if p != usize::MAX {
            side[id] = side[p] ^ flip;
        }
    }
    let mut k = vec![0usize; clusters.len()];
    for (leaf, &i) in owner.iter().enumerate() {
        if side[leaf] {
            k[i] += 1;
        }
    }
    k
}

/// Local search: single steps `k_i ± 1` and swaps `k_i + 1, k_j − 1`,
/// taking the move that best cancels the residual until none improves.
fn refine(clusters: &[(f64, usize)], mut k: Vec<usize>, total: f64) -> Vec<usize> {
    for _ in 0..256 {
        let residual = total / 2.0 - float_mass(clusters, &k);
        let mut add: Vec<(f64, usize)> = Vec::new();
        let mut remove: Vec<(f64, usize)> = Vec::new();
        for (i, &(l, m)) in clusters.iter().enumerate() {
            if k[i] < m {
                add.push((l, i));
            }
            if k[i] > 0 {
                remove.push((l, i));
            }
        }
        add.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut moves: Vec<(f64, Option<usize>, Option<usize>)> = Vec::new();
        let nearest = |target: f64| -> Vec<usize> {
            let pos = add.partition_point(|a| a.0 < target);
            [pos.checked_sub(1), (pos < add.len()).then_some(pos)]
                .into_iter()
                .flatten()
                .collect()
        };
        for idx in nearest(residual) {
            moves.push((add[idx].0, Some(add[idx].1), None));
        }
        for &(l, j) in &remove {
            moves.push((-l, None, Some(j)));
            for idx in nearest(residual + l) {
                if add[idx].1 != j {
                    moves.push((add[idx].0 - l, Some(add[idx].1), Some(j)));
                }
            }
        }
        let current = float_defect(clusters, &k);
        let mut best: Option<(f64, Vec<usize>)> = None;
        for (_, inc, dec) in moves {
            let mut candidate = k.clone();
            if let Some(i) = inc {
                candidate[i] += 1;
            }
            if let Some(j) = dec {
                candidate[j] -= 1;
            }
            let d = float_defect(clusters, &candidate);
            if d < current && best.as_ref().map_or(true, |b| d < b.0) {
                best = Some((d, candidate));
            }
        }
        match best {
            Some((_, next)) => k = next,
            None => break,
        }
    }
    k
}

/// Largest-first fill up to `S/2`, then the better of stopping below or
/// stepping over the midpoint.
fn greedy(clusters: &[(f64, usize)], total: f64) -> Vec<usize> {
    let half = total / 2.0;
    let mut k = vec![0usize; clusters.len()];
    let mut mass = 0.0;
    for (i, &(l, m)) in clusters.iter().enumerate() {
        let room = ((half - mass) / l).floor().max(0.0) as usize;
        k[i] = room.min(m);
        mass += l * k[i] as f64;
    }
    let mut best = k.clone();
    for (i, &(_, m)) in clusters.iter().enumerate() {
        if k[i] < m {
            let mut over = k.clone();
            over[i] += 1;
            if better(clusters, total, &over, &best) {
                best = over;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::q;
    use num_traits::Signed;

    fn brute(clusters: &[(BigRational, usize)]) -> (BigRational, Vec<usize>) {
        let mults: Vec<usize> = clusters.iter().map(|c| c.1).collect();
        let total: BigRational = clusters.iter().map(|(l, m)| l * BigRational::from_integer((*m).into())).sum();
        let count = mults.iter().map(|m| m + 1).product::<usize>();
        let mut best: Option<(BigRational, bool, Vec<usize>)> = None;
        for idx in 0..count {
            let k = decode(idx, &mults);
            let mass: BigRational = clusters.iter().zip(&k).map(|((l, _), &ki)| l * BigRational::from_integer(ki.into())).sum();
            let two = BigRational::from_integer(2.into());
            let defect = (&mass * &two - &total).abs();
            let high = &mass * &two > total;
            let key = (defect.clone(), high, k.clone());
            if best.as_ref().map_or(true, |b| (key.0.clone(), key.1, key.2.clone()) < (b.0.clone(), b.1, b.2.clone())) {
                best = Some(key);
            }
        }
        let b = best.unwrap();
        (b.0, b.2)
    }

    #[test]
    fn exact_examples() {
        let cap = WorkCap::default();
        assert_eq!(exact_closest(&[(q(1, 2), 2)], cap).unwrap(), vec![1]);
        assert_eq!(exact_closest(&[(q(7, 10), 1), (q(3, 10), 1)], cap).unwrap(), vec![0, 1]);
        assert_eq!(exact_closest(&[(q(1, 2), 1), (q(3, 10), 1), (q(1, 5), 1)], cap).unwrap(), vec![0, 1, 1]);
    }

    #[test]
    fn enumeration_examples() {
        let cap = WorkCap::default();
        assert_eq!(exact_solutions(&[(q(1, 2), 2)], 100, cap).unwrap(), vec![vec![1]]);
        assert!(exact_solutions(&[(q(7, 10), 1), (q(3, 10), 1)], 100, cap).unwrap().is_empty());
        assert_eq!(
            exact_solutions(&[(q(1, 4), 2), (q(1, 8), 4)], 100, cap).unwrap(),
            vec![vec![0, 4], vec![1, 2], vec![2, 0]]
        );
        assert_eq!(exact_solutions(&[(q(1, 4), 2), (q(1, 8), 4)], 2, cap).unwrap().len(), 2);
    }

    #[test]
    fn dp_matches_brute_force() {
        // many clusters force the dynamic-programming path
        let clusters: Vec<(BigRational, usize)> = (0..30)
            .map(|i| (q(97 - 2 * i as i64, 1000), 1 + (i % 3)))
            .collect();
        let (_, l, r) = balanced_split(&clusters.iter().map(|c| c.1).collect::<Vec<_>>());
        assert!(l.max(r) > MITM_HALF_LIMIT);
        let k = exact_closest(&clusters, WorkCap::default()).unwrap();
        let total: BigRational = clusters.iter().map(|(l, m)| l * BigRational::from_integer((*m).into())).sum();
        let mass: BigRational = clusters.iter().zip(&k).map(|((l, _), &ki)| l * BigRational::from_integer(ki.into())).sum();
        assert!(mass.clone() * BigRational::from_integer(2.into()) <= total);
        let small: Vec<(BigRational, usize)> = clusters[..8].to_vec();
        let (_, expected) = brute(&small);
        assert_eq!(exact_closest(&small, WorkCap::default()).unwrap(), expected);
    }

    #[test]
    fn mitm_agrees_with_brute_force_on_small_instances() {
        let clusters = vec![(q(9, 20), 1), (q(1, 5), 2), (q(1, 12), 3), (q(1, 60), 4)];
        let (_, expected) = brute(&clusters);
        assert_eq!(exact_closest(&clusters, WorkCap::default()).unwrap(), expected);
    }

    #[test]
    fn cap_is_enforced() {
        let huge: Vec<(BigRational, usize)> = (0..60).map(|i| (q(1, 1_000_003 + 2 * i), 1)).collect();
        assert!(matches!(
            exact_closest(&huge, WorkCap::new(1000)),
            Err(Error::WorkCapExceeded { .. })
        ));
    }

    #[test]
    fn float_uniform_and_greedy() {
        let cap = WorkCap::default();
        assert_eq!(float_closest(&[(0.2, 5)], cap).unwrap(), vec![2]);
        assert_eq!(float_closest(&[(0.7, 1), (0.3, 1)], cap).unwrap(), vec![0, 1]);
        let many: Vec<(f64, usize)> = (0..200).map(|i| (1.0 / (300.0 + i as f64), 1)).collect();
        let k = float_closest(&many, cap).unwrap();
        assert!(float_defect(&many, &k) < 1e-9, "{}", float_defect(&many, &k));
    }
}
