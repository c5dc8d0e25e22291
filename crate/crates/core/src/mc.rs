//! Seeded Monte Carlo estimation of cover and visit-count events.
//!
//! Replication `r` draws from its own ChaCha stream keyed by `(seed, r)`; the
//! stream's word position plays the role of the step counter. Aggregation is
//! over integer counts, so results do not depend on the worker count.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{MarkovChain, StartRule, WalkTrace};
use crate::error::{Error, Result};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489004;
/// Above this many states the visited set switches from a bitset to a hash set.
pub const BITSET_LIMIT: usize = 4096;

pub fn stream(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// A binomial proportion with its Wilson 99% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub successes: u64,
    pub reps: u64,
    pub lo: f64,
    pub hi: f64,
    pub seed: u64,
}

impl Estimate {
    pub fn from_counts(successes: u64, reps: u64, seed: u64) -> Self {
        let (lo, hi) = wilson(successes, reps, Z99);
        let estimate = if reps == 0 {
            0.0
        } else {
            successes as f64 / reps as f64
        };
        Estimate {
            estimate,
            successes,
            reps,
            lo: lo.min(estimate),
            hi: hi.max(estimate),
            seed,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lo <= p && p <= self.hi
    }
}

pub fn wilson(successes: u64, reps: u64, z: f64) -> (f64, f64) {
    if reps == 0 {
        return (0.0, 1.0);
    }
    let n = reps as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn draw(row: &[(usize, f64)], rng: &mut ChaCha8Rng) -> usize {
    let mut u: f64 = rng.random();
    for &(v, p) in row {
        if u < p {
            return v;
        }
        u -= p;
    }
    row.last().expect("rows are nonempty").0
}

fn draw_start(start: &StartRule, rng: &mut ChaCha8Rng) -> usize {
    match start {
        StartRule::Vertex(v) => *v,
        StartRule::Distribution(d) => {
            let support: Vec<(usize, f64)> = start.support();
            let mut u: f64 = rng.random();
            for &(v, p) in &support {
                if u < p {
                    return v;
                }
                u -= p;
            }
            support.last().map(|&(v, _)| v).unwrap_or(d.len() - 1)
        }
    }
}

/// States of one replication's walk, `X_0..X_steps`.
pub fn walk_states(
    m: &MarkovChain,
    start: &StartRule,
    steps: usize,
    seed: u64,
    rep: u64,
) -> Vec<usize> {
    let mut rng = stream(seed, rep);
    let mut x = draw_start(start, &mut rng);
    let mut states = Vec::with_capacity(steps + 1);
    states.push(x);
    for _ in 0..steps {
        x = draw(m.row(x), &mut rng);
        states.push(x);
    }
    states
}

pub fn simulate_walk(
    m: &MarkovChain,
    start: &StartRule,
    steps: usize,
    seed: u64,
) -> Result<WalkTrace> {
    simulate_replica(m, start, steps, seed, 0)
}

pub fn simulate_replica(
    m: &MarkovChain,
    start: &StartRule,
    steps: usize,
    seed: u64,
    rep: u64,
) -> Result<WalkTrace> {
    start.validate(m.n())?;
    Ok(WalkTrace {
        states: walk_states(m, start, steps, seed, rep),
        seed,
        chain_id: m.fingerprint(),
    })
}

enum Visited {
    Bits(Vec<u64>),
    Hash(HashSet<usize>),
}

impl Visited {
    fn new(n: usize) -> Self {
        if n <= BITSET_LIMIT {
            Visited::Bits(vec![0; n.div_ceil(64)])
        } else {
            Visited::Hash(HashSet::new())
        }
    }

    /// Inserts `v`, returning true if it was new.
    fn insert(&mut self, v: usize) -> bool {
        match self {
            Visited::Bits(words) => {
                let (w, b) = (v / 64, 1u64 << (v % 64));
                let fresh = words[w] & b == 0;
                words[w] |= b;
                fresh
            }
            Visited::Hash(set) => set.insert(v),
        }
    }
}

fn membership(n: usize, set: &[usize]) -> Result<(Vec<bool>, usize)> {
    let mut mark = vec![false; n];
    let mut size = 0;
    for &v in set {
        if v >= n {
            return Err(Error::Precondition(format!("state {v} out of range")));
        }
        if !mark[v] {
            mark[v] = true;
            size += 1;
        }
    }
    Ok((mark, size))
}

/// Distinct states of `set` seen along one replication (`X_0` counted only if
/// `include_start`), stopping early once `stop_at` distinct states are seen.
#[allow(clippy::too_many_arguments)]
fn distinct_hits(
    m: &MarkovChain,
    start: &StartRule,
    mark: &[bool],
    horizon: usize,
    include_start: bool,
    stop_at: usize,
    seed: u64,
    rep: u64,
) -> usize {
    let mut rng = stream(seed, rep);
    let mut x = draw_start(start, &mut rng);
    let mut seen = Visited::new(m.n());
    let mut count = 0;
    if include_start && mark[x] && seen.insert(x) {
        count += 1;
    }
    for _ in 0..horizon {
        if count >= stop_at {
            break;
        }
        x = draw(m.row(x), &mut rng);
        if mark[x] && seen.insert(x) {
            count += 1;
        }
    }
    count
}

pub fn estimate_cover(
    m: &MarkovChain,
    start: &StartRule,
    targets: &[usize],
    horizon: usize,
    reps: u64,
    seed: u64,
    include_start: bool,
) -> Result<Estimate> {
    if reps == 0 {
        return Err(Error::Precondition("reps must be at least 1".into()));
    }
    start.validate(m.n())?;
    let (mark, size) = membership(m.n(), targets)?;
    let covered: u64 = (0..reps)
        .into_par_iter()
        .map(|r| {
            let hits = distinct_hits(m, start, &mark, horizon, include_start, size, seed, r);
            u64::from(hits == size)
        })
        .sum();
    Ok(Estimate::from_counts(covered, reps, seed))
}

/// Empirical law of `|X_[R] ∩ A|` over replications.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VisitStats {
    pub horizon: usize,
    pub reps: u64,
    pub seed: u64,
    /// `histogram[c]` = number of replications with exactly `c` distinct hits.
    pub histogram: Vec<u64>,
}

impl VisitStats {
    /// `Pr(|X_[R] ∩ A| < q)`.
    pub fn below(&self, q: usize) -> Estimate {
        let hits = self.histogram.iter().take(q).sum();
        Estimate::from_counts(hits, self.reps, self.seed)
    }

    pub fn mean(&self) -> f64 {
        let total: u64 = self
            .histogram
            .iter()
            .enumerate()
            .map(|(c, &k)| c as u64 * k)
            .sum();
        total as f64 / self.reps as f64
    }

    pub fn max(&self) -> usize {
        self.histogram.iter().rposition(|&k| k > 0).unwrap_or(0)
    }
}

pub fn estimate_visit_stats(
    m: &MarkovChain,
    start: &StartRule,
    horizon: usize,
    set: &[usize],
    reps: u64,
    seed: u64,
) -> Result<VisitStats> {
    if reps == 0 {
        return Err(Error::Precondition("reps must be at least 1".into()));
    }
    start.validate(m.n())?;
    let (mark, size) = membership(m.n(), set)?;
    let cap = size.min(horizon);
    let histogram = (0..reps)
        .into_par_iter()
        .fold(
            || vec![0u64; cap + 1],
            |mut h, r| {
                h[distinct_hits(m, start, &mark, horizon, false, usize::MAX, seed, r)] += 1;
                h
            },
        )
        .reduce(
            || vec![0u64; cap + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(VisitStats {
        horizon,
        reps,
        seed,
        histogram,
    })
}

/// Empirical `Pr(|X − center| > radius)` against a claimed bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailCheck {
    pub frequency: f64,
    pub bound: f64,
    pub stderr: f64,
    pub pass: bool,
}

pub fn empirical_tail_vs_bound(
    samples: &[f64],
    center: f64,
    radius: f64,
    bound: f64,
) -> Result<TailCheck> {
    if samples.is_empty() {
        return Err(Error::Precondition("no samples".into()));
    }
    let n = samples.len() as f64;
    let exceed = samples
        .iter()
        .filter(|&&x| (x - center).abs() > radius)
        .count();
    let frequency = exceed as f64 / n;
    let b = bound.clamp(0.0, 1.0);
    let stderr = (b * (1.0 - b) / n).sqrt();
    Ok(TailCheck {
        frequency,
        bound,
        stderr,
        pass: bound >= 1.0 || frequency <= bound + 3.0 * stderr,
    })
}
