//! Seeded simulation of the scans.
//!
//! Every walk owns a ChaCha stream: the generator is seeded from the run's
//! `u64` seed and walk `k` uses stream `k`. Within a walk, random-scan index
//! draws and coin flips are taken from that stream in the order they occur.
//! One sweep is one application of the scan's transition matrix (a single
//! `K_i` for the random scan).

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::brauer::{BrauerDiagram, GenKind};
use crate::chains::{length_weights, ScanKind};
use crate::classes::class_of;
use crate::error::{Error, Result};
use crate::rational::{format_rational, Rational, Theta};
use crate::words::LengthTable;

/// Bernoulli trial with exact rational success probability.
///
/// A uniform `U` in `[0, 1)` is drawn one base-`2^64` digit at a time and
/// compared with the expansion of `p/q`; heads iff `U < p/q`.
#[derive(Debug, Clone)]
pub struct ExactCoin {
    prefix: Vec<u64>,
    rem: BigInt,
    den: BigInt,
}

const PREFIX_DIGITS: usize = 4;

impl ExactCoin {
    pub fn new(p: &Rational) -> Self {
        let den = p.denom().clone();
        let mut rem = p.numer().mod_floor(&den);
        let mut prefix = Vec::with_capacity(PREFIX_DIGITS);
        for _ in 0..PREFIX_DIGITS {
            let (d, r) = next_digit(&rem, &den);
            prefix.push(d);
            rem = r;
        }
        ExactCoin { prefix, rem, den }
    }

    pub fn flip<R: RngCore>(&self, rng: &mut R) -> bool {
        for &d in &self.prefix {
            let u = rng.next_u64();
            if u != d {
                return u < d;
            }
        }
        let mut rem = self.rem.clone();
        loop {
            if rem.is_zero() {
                // remaining digits of p/q are zero, U >= p/q
                return false;
            }
            let (d, r) = next_digit(&rem, &self.den);
            let u = rng.next_u64();
            if u != d {
                return u < d;
            }
            rem = r;
        }
    }
}

fn next_digit(rem: &BigInt, den: &BigInt) -> (u64, BigInt) {
    let (d, r) = (rem << 64u32).div_rem(den);
    (d.to_u64().expect("digit below 2^64"), r)
}

/// Precomputed left actions and lengths for walks at one `n`.
#[derive(Debug, Clone)]
pub struct Walker {
    n: usize,
    table: Arc<LengthTable>,
    /// `left[i - 1][d]` = index of `r_i d`.
    left: Vec<Vec<u32>>,
    coin: ExactCoin,
    theta: Theta,
}

impl Walker {
    pub fn new(n: usize, theta: &Theta) -> Self {
        let table = LengthTable::shared(n);
        let left = (1..n)
            .map(|i| {
                let r = BrauerDiagram::generator(GenKind::R, i, n).expect("index in range");
                table
                    .diagrams()
                    .par_iter()
                    .map(|d| table.index_of(&r.compose(d)).expect("closed basis") as u32)
                    .collect()
            })
            .collect();
        Walker {
            n,
            table,
            left,
            coin: ExactCoin::new(theta.value()),
            theta: theta.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &Theta {
        &self.theta
    }

    pub fn table(&self) -> &LengthTable {
        &self.table
    }

    fn index(&self, d: &BrauerDiagram) -> Result<usize> {
        if d.n() != self.n {
            return Err(Error::StrandMismatch {
                left: d.n(),
                right: self.n,
            });
        }
        Ok(self.table.index_of(d).expect("enumerated"))
    }

    /// One `K_i` move from basis index `x`.
    pub fn step_index<R: RngCore>(&self, x: usize, i: usize, rng: &mut R) -> usize {
        let y = self.left[i - 1][x] as usize;
        if self.table.length_at(y) >= self.table.length_at(x) || self.coin.flip(rng) {
            y
        } else {
            x
        }
    }

    fn sweep<R: RngCore>(&self, mut x: usize, kind: ScanKind, seq: Option<&[usize]>, rng: &mut R) -> usize {
        match seq {
            Some(seq) => {
                for &i in seq {
                    x = self.step_index(x, i, rng);
                }
            }
            None => {
                debug_assert_eq!(kind, ScanKind::Random);
                if self.n > 1 {
                    let i = rng.random_range(1..self.n);
                    x = self.step_index(x, i, rng);
                }
            }
        }
        x
    }

    fn check_kind(&self, kind: ScanKind) -> Result<()> {
        if let ScanKind::Single(i) = kind {
            if i == 0 || i >= self.n {
                return Err(Error::GeneratorIndex { index: i, n: self.n });
            }
        }
        Ok(())
    }

    /// Final basis index after `sweeps` sweeps from `start`.
    pub fn run_index<R: RngCore>(&self, start: usize, kind: ScanKind, sweeps: u64, rng: &mut R) -> usize {
        let seq = kind.sweep(self.n);
        let mut x = start;
        for _ in 0..sweeps {
            x = self.sweep(x, kind, seq.as_deref(), rng);
        }
        x
    }

    pub fn diagram(&self, k: usize) -> &BrauerDiagram {
        &self.table.diagrams()[k]
    }
}

/// A walk in progress.
#[derive(Debug, Clone)]
pub struct WalkState {
    pub current: BrauerDiagram,
    pub step: u64,
    pub rng: ChaCha8Rng,
}

impl WalkState {
    pub fn new(start: BrauerDiagram, seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        WalkState {
            current: start,
            step: 0,
            rng,
        }
    }
}

/// Apply one `K_i` move.
pub fn step_walk(walker: &Walker, state: &mut WalkState, i: usize) -> Result<()> {
    if i == 0 || i >= walker.n {
        return Err(Error::GeneratorIndex { index: i, n: walker.n });
    }
    let x = walker.index(&state.current)?;
    let y = walker.step_index(x, i, &mut state.rng);
    state.current = walker.diagram(y).clone();
    state.step += 1;
    Ok(())
}

/// Run `sweeps` sweeps of a scan from `start` on stream 0 of `seed`.
pub fn run_scan(
    start: &BrauerDiagram,
    kind: ScanKind,
    theta: &Theta,
    sweeps: u64,
    seed: u64,
) -> Result<WalkState> {
    let walker = Walker::new(start.n(), theta);
    walker.check_kind(kind)?;
    let mut state = WalkState::new(start.clone(), seed, 0);
    let x = walker.index(start)?;
    let y = walker.run_index(x, kind, sweeps, &mut state.rng);
    state.current = walker.diagram(y).clone();
    state.step = sweeps;
    Ok(state)
}

/// Empirical distribution of independent walks against the exact class
/// distribution.
#[derive(Debug, Clone, Serialize)]
pub struct SampleReport {
    pub n: usize,
    pub scan: ScanKind,
    pub theta: String,
    pub seed: u64,
    pub sweeps: u64,
    pub count: u64,
    pub start: String,
    pub class: String,
    pub states: Vec<String>,
    pub counts: Vec<u64>,
    /// Exact stationary probabilities as `num/den`.
    pub expected: Vec<String>,
    /// Pearson statistic, absent when undefined (one walk or one state).
    pub chi_square: Option<f64>,
    pub degrees_of_freedom: usize,
    pub p_value: Option<f64>,
}

pub fn sample_distribution(
    start: &BrauerDiagram,
    kind: ScanKind,
    theta: &Theta,
    sweeps: u64,
    count: u64,
    seed: u64,
) -> Result<SampleReport> {
    if count == 0 {
        return Err(Error::Precondition("count must be at least 1".into()));
    }
    let walker = Walker::new(start.n(), theta);
    walker.check_kind(kind)?;
    let x0 = walker.index(start)?;
    let class = class_of(start);
    let local: std::collections::HashMap<usize, usize> = class
        .members
        .iter()
        .enumerate()
        .map(|(k, d)| (walker.index(d).expect("same n"), k))
        .collect();
    let counts = (0..count)
        .into_par_iter()
        .fold(
            || vec![0u64; class.len()],
            |mut acc, w| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(w);
                let y = walker.run_index(x0, kind, sweeps, &mut rng);
                acc[local[&y]] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; class.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    let raw = length_weights(&class.members, theta);
    let z: Rational = raw.iter().sum();
    let pi: Vec<Rational> = raw.into_iter().map(|w| w / &z).collect();
    let dof = class.len().saturating_sub(1);
    let (chi_square, p_value) = if count < 2 || dof == 0 {
        (None, None)
    } else {
        let stat = pearson(&counts, &pi, count);
        let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
        (Some(stat), Some(1.0 - dist.cdf(stat)))
    };
    Ok(SampleReport {
        n: start.n(),
        scan: kind,
        theta: theta.to_string(),
        seed,
        sweeps,
        count,
        start: start.to_string(),
        class: class.key(),
        states: class.members.iter().map(ToString::to_string).collect(),
        counts,
        expected: pi.iter().map(format_rational).collect(),
        chi_square,
        degrees_of_freedom: dof,
        p_value,
    })
}

fn pearson(counts: &[u64], pi: &[Rational], total: u64) -> f64 {
    counts
        .iter()
        .zip(pi)
        .map(|(&o, p)| {
            let e = p.to_f64().unwrap_or(0.0) * total as f64;
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}
