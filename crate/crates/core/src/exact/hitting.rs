//! Absorbing dynamic programs for hitting times, ball sets and recurrence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::MarkovChain;
use crate::error::{Error, Result};

/// First-entry probabilities into `absorb` at steps `1..=horizon` from `start`,
/// with mass killed on entering `kill`. Index 0 of the result is 0; `X_0` is
/// never tested.
pub fn first_entry_profile(
    m: &MarkovChain,
    start: &[f64],
    absorb: &[bool],
    kill: &[bool],
    horizon: usize,
) -> Vec<f64> {
    let mut profile = vec![0.0; horizon + 1];
    let mut dist = start.to_vec();
    for slot in profile.iter_mut().skip(1) {
        let mut next = m.step(&dist);
        for (x, mass) in next.iter_mut().enumerate() {
            if absorb[x] {
                *slot += *mass;
                *mass = 0.0;
            } else if kill[x] {
                *mass = 0.0;
            }
        }
        dist = next;
        if dist.iter().all(|&p| p == 0.0) {
            break;
        }
    }
    profile
}

fn indicator(n: usize, set: &[usize]) -> Vec<bool> {
    let mut mark = vec![false; n];
    for &x in set {
        mark[x] = true;
    }
    mark
}

fn point(n: usize, v: usize) -> Vec<f64> {
    let mut d = vec![0.0; n];
    d[v] = 1.0;
    d
}

/// Exact hitting statistics of a target set from one source.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HittingReport {
    pub source: usize,
    pub targets: Vec<usize>,
    pub horizon: usize,
    /// `Pr(T_B = t)` for `t = 0..=R`.
    pub hit: Vec<f64>,
    pub hit_beyond: f64,
    /// `Pr(T_B^+ = t)` for `t = 0..=R` (the 0 entry is always 0).
    pub hit_positive: Vec<f64>,
    pub hit_positive_beyond: f64,
    /// `(w, Pr(T_w ≤ min{R, T_v^+}))` for each target `w ≠ v`.
    pub before_return: Vec<(usize, f64)>,
}

pub fn hitting_stats(
    m: &MarkovChain,
    v: usize,
    targets: &[usize],
    horizon: usize,
) -> Result<HittingReport> {
    if horizon == 0 {
        return Err(Error::Precondition(
            "hitting horizon must be at least 1".into(),
        ));
    }
    let n = m.n();
    if v >= n || targets.iter().any(|&w| w >= n) {
        return Err(Error::Precondition("state out of range".into()));
    }
    let absorb = indicator(n, targets);
    let none = vec![false; n];
    let hit_positive = first_entry_profile(m, &point(n, v), &absorb, &none, horizon);
    let hit = if absorb[v] {
        let mut h = vec![0.0; horizon + 1];
        h[0] = 1.0;
        h
    } else {
        hit_positive.clone()
    };
    let beyond = |p: &[f64]| (1.0 - p.iter().sum::<f64>()).max(0.0);
    let mut others: Vec<usize> = targets.iter().copied().filter(|&w| w != v).collect();
    others.sort_unstable();
    others.dedup();
    let probs = before_return_for(m, v, &others, horizon);
    Ok(HittingReport {
        source: v,
        targets: targets.to_vec(),
        horizon,
        hit_beyond: beyond(&hit),
        hit_positive_beyond: beyond(&hit_positive),
        hit,
        hit_positive,
        before_return: others.into_iter().zip(probs).collect(),
    })
}

/// `Pr_v(T_w ≤ min{R, T_v^+})` for each `w` in `ws` (each `w ≠ v`).
pub fn before_return_for(m: &MarkovChain, v: usize, ws: &[usize], horizon: usize) -> Vec<f64> {
    let n = m.n();
    let start = point(n, v);
    let kill = indicator(n, &[v]);
    ws.par_iter()
        .map(|&w| {
            let absorb = indicator(n, &[w]);
            first_entry_profile(m, &start, &absorb, &kill, horizon)
                .iter()
                .sum()
        })
        .collect()
}

/// `Pr_v(w ∈ X_[R])` for each `w` in `ws`, where `X_[R] = {X_1..X_R}`.
pub fn visit_within(m: &MarkovChain, v: usize, ws: &[usize], horizon: usize) -> Vec<f64> {
    let n = m.n();
    let start = point(n, v);
    let none = vec![false; n];
    ws.par_iter()
        .map(|&w| {
            let absorb = indicator(n, &[w]);
            first_entry_profile(m, &start, &absorb, &none, horizon)
                .iter()
                .sum()
        })
        .collect()
}

/// `Pr_v(X_[R] ∩ A ≠ ∅)`.
pub fn hit_set_within(m: &MarkovChain, v: usize, set: &[usize], horizon: usize) -> f64 {
    let n = m.n();
    first_entry_profile(
        m,
        &point(n, v),
        &indicator(n, set),
        &vec![false; n],
        horizon,
    )
    .iter()
    .sum()
}

/// `B_v(R)` and `B′_v(R)` at threshold `δ/2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallSets {
    pub center: usize,
    pub radius: usize,
    pub delta: f64,
    pub ball: Vec<usize>,
    pub ball_before_return: Vec<usize>,
}

impl BallSets {
    pub fn contains_before_return(&self, w: usize) -> bool {
        self.ball_before_return.binary_search(&w).is_ok()
    }
}

pub fn ball_sets(m: &MarkovChain, v: usize, horizon: usize, delta: f64) -> Result<BallSets> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!(
            "delta {delta} must be positive"
        )));
    }
    let others: Vec<usize> = (0..m.n()).filter(|&w| w != v).collect();
    let cut = delta / 2.0;
    let visit = visit_within(m, v, &others, horizon);
    let before = before_return_for(m, v, &others, horizon);
    let pick = |probs: &[f64]| -> Vec<usize> {
        others
            .iter()
            .zip(probs)
            .filter(|(_, &p)| p > cut)
            .map(|(&w, _)| w)
            .collect()
    };
    Ok(BallSets {
        center: v,
        radius: horizon,
        delta,
        ball: pick(&visit),
        ball_before_return: pick(&before),
    })
}
