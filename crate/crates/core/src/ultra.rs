//! Sequences of functionals on growing algebras and limit certificates for
//! their splitting defects.
//!
//! A free ultrafilter limit cannot be computed. The report instead asks
//! whether the full sequence of defects converges; when it does, every
//! ultrafilter limit agrees with it.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraShape;
use crate::error::{Error, Result};
use crate::functional::{Functional, Tolerances};
use crate::real::Real;
use crate::splitter::{approx_split, WorkCap};

/// Default spread accepted for a Cauchy tail.
pub const DEFAULT_CAUCHY_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// `i` atoms of mass `1/i`.
    UniformDiffuse,
    /// `2i` atoms of mass `1/(2i)`.
    UniformEven,
    /// `diag(7/10, 3/10)` at every stage.
    ConstantAtomic,
    /// `i` atoms with seeded random masses in a `[1, 8]` ratio band.
    RandomDiffuse,
}

impl Generator {
    pub const ALL: [Generator; 4] = [
        Generator::UniformDiffuse,
        Generator::UniformEven,
        Generator::ConstantAtomic,
        Generator::RandomDiffuse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Generator::UniformDiffuse => "uniform-diffuse",
            Generator::UniformEven => "uniform-even",
            Generator::ConstantAtomic => "constant-atomic",
            Generator::RandomDiffuse => "random-diffuse",
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::input(format!("unknown generator '{s}'")))
    }
}

/// Stages `1..=stages` of a named generator.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalSequence {
    pub generator: Generator,
    pub seed: u64,
    pub stages: usize,
}

impl FunctionalSequence {
    pub fn new(generator: Generator, stages: usize, seed: u64) -> Result<Self> {
        if stages == 0 {
            return Err(Error::input("sequence needs at least one stage"));
        }
        Ok(FunctionalSequence {
            generator,
            seed,
            stages,
        })
    }

    pub fn stage<R: Real>(&self, i: usize) -> Result<Functional<R>> {
        if i == 0 || i > self.stages {
            return Err(Error::input(format!("stage {i} outside 1..={}", self.stages)));
        }
        let uniform = |n: usize| -> Result<Functional<R>> {
            let shape = Arc::new(AlgebraShape::diffuse(n)?);
            Functional::diagonal(shape, &vec![R::one() / R::from_usize(n); n])
        };
        match self.generator {
            Generator::UniformDiffuse => uniform(i),
            Generator::UniformEven => uniform(2 * i),
            Generator::ConstantAtomic => {
                let shape = Arc::new(AlgebraShape::new(vec![2])?);
                Functional::diagonal(shape, &[R::from_ratio(7, 10), R::from_ratio(3, 10)])
            }
            Generator::RandomDiffuse => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let raw: Vec<i64> = (0..i).map(|_| rng.random_range(8..=64)).collect();
                let total: i64 = raw.iter().sum();
                let weights: Vec<R> = raw
                    .iter()
                    .map(|&u| R::from_rational(&BigRational::new(u.into(), total.into())))
                    .collect();
                Functional::diagonal(Arc::new(AlgebraShape::diffuse(i)?), &weights)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub index: usize,
    pub atoms: usize,
    pub defect: f64,
    /// Defect rendered in the run's number mode.
    pub defect_value: String,
    pub norm: f64,
    pub psi_norm: f64,
    pub plus_norm: f64,
    pub minus_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// `ε_i ≤ C/i` over the tested range.
    Vanishing,
    /// Converges (Cauchy or eventually monotone tail) but not like `C/i`.
    Stagnating,
    /// No sequence limit: the limit would depend on the ultrafilter.
    UltrafilterDependent,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Vanishing => "vanishing",
            Verdict::Stagnating => "stagnating",
            Verdict::UltrafilterDependent => "no sequence limit (ultrafilter-dependent)",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UltraReport {
    pub generator: Generator,
    pub seed: u64,
    pub mode: String,
    pub stages: Vec<StageRecord>,
    /// `max i·ε_i` over the first half of the stages.
    pub fitted_c: f64,
    /// Slope of `log ε_i` against `log i` over stages with `ε_i > 0`.
    pub decay_exponent: Option<f64>,
    pub cauchy_tolerance: f64,
    /// First stage from which the defects stay within `cauchy_tolerance`.
    pub cauchy_index: usize,
    pub cauchy_spread: f64,
    pub defect_limit: Option<f64>,
    pub norm_limit: Option<f64>,
    pub verdict: Verdict,
}

/// Approximately splits every stage and assesses the defect sequence.
pub fn run_sequence<R: Real>(seq: &FunctionalSequence, cauchy_tol: f64, cap: WorkCap) -> Result<UltraReport> {
    let tol = Tolerances::for_mode::<R>();
    let mut defects: Vec<R> = Vec::with_capacity(seq.stages);
    let mut records = Vec::with_capacity(seq.stages);
    for i in 1..=seq.stages {
        let phi = seq.stage::<R>(i)?;
        if phi.is_zero() {
            return Err(Error::input(format!("stage {i} is the zero functional")));
        }
        let cert = approx_split(&phi, &tol, cap)?;
        records.push(StageRecord {
            index: i,
            atoms: phi.shape().num_blocks(),
            defect: cert.defect.to_f64(),
            defect_value: cert.defect.render(),
            norm: cert.total.to_f64(),
            psi_norm: cert.norms.psi.to_f64(),
            plus_norm: cert.norms.plus.to_f64(),
            minus_norm: cert.norms.minus.to_f64(),
        });
        defects.push(cert.defect);
    }
    Ok(assess(seq, records, &defects, cauchy_tol))
}

fn slack<R: Real>(scale: f64) -> f64 {
    if R::EXACT {
        0.0
    } else {
        1e-12 * scale.max(1.0)
    }
}

fn assess<R: Real>(seq: &FunctionalSequence, stages: Vec<StageRecord>, defects: &[R], cauchy_tol: f64) -> UltraReport {
    let n = defects.len();
    let head = (n / 2).max(1);
    let scaled: Vec<R> = defects
        .iter()
        .enumerate()
        .map(|(j, e)| e.clone() * R::from_usize(j + 1))
        .collect();
    let c = scaled[..head].iter().cloned().fold(R::zero(), R::max_of);
    let tail_start = if n == 1 { 0 } else { head };
    let vanishing = scaled[tail_start..]
        .iter()
        .all(|s| s.le_within(&c, slack::<R>(c.to_f64())));

    let values: Vec<f64> = defects.iter().map(R::to_f64).collect();
    let (cauchy_index, cauchy_spread) = cauchy_tail(&values, cauchy_tol);
    let cauchy = cauchy_index <= head;
    let tail = &values[tail_start..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0] + 1e-15) || tail.windows(2).all(|w| w[1] + 1e-15 >= w[0]);
    let verdict = if vanishing {
        Verdict::Vanishing
    } else if cauchy || monotone {
        Verdict::Stagnating
    } else {
        Verdict::UltrafilterDependent
    };
    let defect_limit = match verdict {
        Verdict::Vanishing => Some(0.0),
        Verdict::Stagnating => values.last().copied(),
        Verdict::UltrafilterDependent => None,
    };
    let norms: Vec<f64> = stages.iter().map(|s| s.norm).collect();
    let (norm_index, _) = cauchy_tail(&norms, cauchy_tol);
    let norm_limit = (norm_index <= head).then(|| norms[n - 1]);
    UltraReport {
        generator: seq.generator,
        seed: seq.seed,
        mode: R::MODE.to_string(),
        stages,
        fitted_c: c.to_f64(),
        decay_exponent: decay_exponent(&values),
        cauchy_tolerance: cauchy_tol,
        cauchy_index,
        cauchy_spread,
        defect_limit,
        norm_limit,
        verdict,
    }
}

/// Smallest 1-based `I` with `max − min` of `values[I..]` at most `tol`,
/// together with that spread.
fn cauchy_tail(values: &[f64], tol: f64) -> (usize, f64) {
    let n = values.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut index = n;
    let mut spread = 0.0;
    for j in (0..n).rev() {
        let (l, h) = (lo.min(values[j]), hi.max(values[j]));
        if h - l > tol {
            break;
        }
        lo = l;
        hi = h;
        index = j + 1;
        spread = h - l;
    }
    (index, spread)
}

fn decay_exponent(values: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0.0)
        .map(|(j, &e)| (((j + 1) as f64).ln(), e.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (sxy, sxx) = points
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    (sxx > 0.0).then(|| sxy / sxx)
}

/// True iff every defect from the Cauchy index on is at most `target`.
pub fn certify_limit(report: &UltraReport, target: f64) -> bool {
    let start = report.cauchy_index.max(1) - 1;
    report.stages[start.min(report.stages.len())..]
        .iter()
        .all(|s| s.defect <= target)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<R: Real>(g: Generator, n: usize) -> UltraReport {
        run_sequence::<R>(&FunctionalSequence::new(g, n, 7).unwrap(), DEFAULT_CAUCHY_TOL, WorkCap::default()).unwrap()
    }

    #[test]
    fn uniform_diffuse_vanishes() {
        let r = run::<BigRational>(Generator::UniformDiffuse, 60);
        for s in &r.stages {
            let expected = if s.index % 2 == 0 { "0".to_string() } else { format!("1/{}", s.index) };
            let expected = if s.index == 1 { "1".to_string() } else { expected };
            assert_eq!(s.defect_value, expected);
            assert_eq!(s.psi_norm, s.norm);
        }
        assert_eq!(r.verdict, Verdict::Vanishing);
        assert_eq!(r.fitted_c, 1.0);
    }

    #[test]
    fn constant_atomic_stagnates() {
        let r = run::<BigRational>(Generator::ConstantAtomic, 20);
        assert!(r.stages.iter().all(|s| s.defect_value == "2/5"));
        assert_eq!(r.verdict, Verdict::Stagnating);
        assert_eq!(r.cauchy_index, 1);
        assert!(!certify_limit(&r, 0.1));
        assert!(certify_limit(&r, 0.4));
    }

    #[test]
    fn uniform_even_is_zero() {
        let r = run::<f64>(Generator::UniformEven, 30);
        assert!(r.stages.iter().all(|s| s.defect == 0.0));
        assert_eq!(r.verdict, Verdict::Vanishing);
        assert!(certify_limit(&r, 0.0));
    }

    #[test]
    fn random_diffuse_is_seeded_and_small() {
        let a = run::<f64>(Generator::RandomDiffuse, 40);
        let b = run::<f64>(Generator::RandomDiffuse, 40);
        assert_eq!(a, b);
        for s in &a.stages {
            // masses are at most 8/i, so the greedy bound is 16/i
            assert!(s.defect <= 16.0 / s.index as f64 + 1e-12);
        }
    }

    #[test]
    fn oscillating_defects_have_no_limit() {
        let seq = FunctionalSequence::new(Generator::ConstantAtomic, 10, 0).unwrap();
        let stages: Vec<StageRecord> = (1..=10)
            .map(|i| StageRecord {
                index: i,
                atoms: 1,
                defect: (i % 2) as f64,
                defect_value: String::new(),
                norm: 1.0,
                psi_norm: 1.0,
                plus_norm: 1.0,
                minus_norm: 1.0,
            })
            .collect();
        let defects: Vec<f64> = stages.iter().map(|s| s.defect).collect();
        let r = assess(&seq, stages, &defects, DEFAULT_CAUCHY_TOL);
        assert_eq!(r.verdict, Verdict::UltrafilterDependent);
        assert_eq!(r.defect_limit, None);
    }

    #[test]
    fn generator_names_round_trip() {
        for g in Generator::ALL {
            assert_eq!(g.name().parse::<Generator>().unwrap(), g);
        }
        assert!("gaussian".parse::<Generator>().is_err());
    }
}
