//! Closed-form inequalities about return probabilities and degree splits.

use serde::{Deserialize, Serialize};

use super::power::{apply_power, transition_power};
use crate::chain::{MarkovChain, STATIONARY_TOL};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Slack for comparisons between computed probabilities.
pub const SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReturnInequalities {
    /// `p^{t+s}(v,w) / π_w`.
    pub lhs: f64,
    /// `√(p^{2t}(v,v)/π_v · p^{2s}(w,w)/π_w)`.
    pub rhs: f64,
    pub pass_cauchy_schwarz: bool,
    /// `p^{2j}(v,v)` for `j = 0..=t+s+1`.
    pub even_returns: Vec<f64>,
    pub pass_monotone: bool,
}

pub fn check_return_inequalities(
    m: &MarkovChain,
    v: usize,
    w: usize,
    t: usize,
    s: usize,
) -> Result<ReturnInequalities> {
    if !m.is_reversible(STATIONARY_TOL)? {
        return Err(Error::Precondition(
            "return inequalities need a reversible chain".into(),
        ));
    }
    let pi = m.stationary(STATIONARY_TOL)?;
    let lhs = transition_power(m, v, t + s)[w] / pi[w];
    let vv = transition_power(m, v, 2 * t)[v];
    let ww = transition_power(m, w, 2 * s)[w];
    let rhs = (vv / pi[v] * ww / pi[w]).sqrt();

    let mut even_returns = Vec::with_capacity(t + s + 2);
    let mut dist = transition_power(m, v, 0);
    for _ in 0..=t + s + 1 {
        even_returns.push(dist[v]);
        dist = m.step(&m.step(&dist));
    }
    let pass_monotone = even_returns.windows(2).all(|p| p[1] <= p[0] + SLACK);
    Ok(ReturnInequalities {
        lhs,
        rhs,
        pass_cauchy_schwarz: lhs <= rhs + SLACK * rhs.max(1.0),
        even_returns,
        pass_monotone,
    })
}

/// High/low degree split: `Σ_{v∈B} p^t(v,S) ≤ (d/Δ)|S|` with
/// `B = {d_v > Δ}`, `S = {d_v ≤ d}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DegreeSplit {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    pub t: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn degree_split(g: &Graph, big: usize, small: usize, t: usize) -> Result<DegreeSplit> {
    if small > big {
        return Err(Error::Precondition(
            "low cutoff must not exceed high cutoff".into(),
        ));
    }
    let m = MarkovChain::random_walk(g)?;
    let high: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) > big).collect();
    let low: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) <= small).collect();
    let mut f = vec![0.0; g.n()];
    for &w in &low {
        f[w] = 1.0;
    }
    let reach = apply_power(&m, f, t);
    let lhs: f64 = high.iter().map(|&v| reach[v]).sum();
    let rhs = small as f64 / big as f64 * low.len() as f64;
    Ok(DegreeSplit {
        pass: lhs <= rhs + SLACK,
        high,
        low,
        t,
        lhs,
        rhs,
    })
}
