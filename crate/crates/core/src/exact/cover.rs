//! Exact cover probabilities by dynamic programming over (state, covered subset of W).

use num_rational::BigRational;

use crate::chain::{MarkovChain, StartRule};
use crate::error::{Error, Result};
use crate::rational::{ExactChain, Prob};

/// Largest target set the subset DP accepts.
pub const MAX_TARGETS: usize = 24;
/// Cap on `n · 2^|W|` table entries.
pub const MAX_TABLE: usize = 1 << 25;

/// `Pr(X_[M] ⊇ W)`. With `include_start`, `X_0` counts toward coverage.
pub fn cover_probability(
    m: &MarkovChain,
    start: &StartRule,
    targets: &[usize],
    horizon: usize,
    include_start: bool,
) -> Result<f64> {
    start.validate(m.n())?;
    cover_dp(m.rows(), &start.support(), targets, horizon, include_start)
}

/// Same DP in exact rational arithmetic from a fixed start.
pub fn cover_probability_exact(
    chain: &ExactChain,
    start: usize,
    targets: &[usize],
    horizon: usize,
    include_start: bool,
) -> Result<BigRational> {
    if start >= chain.n() {
        return Err(Error::Precondition(format!("start {start} out of range")));
    }
    let one = (start, num_traits::One::one());
    cover_dp(chain.rows(), &[one], targets, horizon, include_start)
}

/// Generic subset DP. Mass that has covered all of `targets` is moved to an
/// absorbing accumulator so later steps skip it.
pub fn cover_dp<S: Prob>(
    rows: &[Vec<(usize, S)>],
    start: &[(usize, S)],
    targets: &[usize],
    horizon: usize,
    include_start: bool,
) -> Result<S> {
    let n = rows.len();
    let mut bit = vec![0u32; n];
    let mut width = 0usize;
    for &w in targets {
        if w >= n {
            return Err(Error::Precondition(format!("target {w} out of range")));
        }
        if bit[w] == 0 {
            bit[w] = 1 << width;
            width += 1;
            if width > MAX_TARGETS {
                return Err(Error::Budget(format!(
                    "|W| exceeds {MAX_TARGETS}; use the Monte Carlo estimator"
                )));
            }
        }
    }
    let masks = 1usize << width;
    if n.saturating_mul(masks) > MAX_TABLE {
        return Err(Error::Budget(format!(
            "table of {n} x 2^{width} entries is over budget; use the Monte Carlo estimator"
        )));
    }
    let full = masks - 1;
    let mut done = S::zero();
    let mut cur = vec![S::zero(); n * masks];
    let mut live = vec![false; n * masks];
    for (v, p) in start {
        let mask = if include_start { bit[*v] as usize } else { 0 };
        if mask == full {
            done = done + p.clone();
        } else {
            let idx = v * masks + mask;
            cur[idx] = cur[idx].clone() + p.clone();
            live[idx] = true;
        }
    }
    for _ in 0..horizon {
        let mut next = vec![S::zero(); n * masks];
        let mut next_live = vec![false; n * masks];
        for u in 0..n {
            for mask in 0..masks {
                let idx = u * masks + mask;
                if !live[idx] {
                    continue;
                }
                let mass = std::mem::replace(&mut cur[idx], S::zero());
                for (v, p) in &rows[u] {
                    let nm = mask | bit[*v] as usize;
                    let term = mass.clone() * p.clone();
                    if nm == full {
                        done = done + term;
                    } else {
                        let j = v * masks + nm;
                        next[j] = std::mem::replace(&mut next[j], S::zero()) + term;
                        next_live[j] = true;
                    }
                }
            }
        }
        cur = next;
        live = next_live;
        if !live.iter().any(|&l| l) {
            break;
        }
    }
    Ok(done)
}
