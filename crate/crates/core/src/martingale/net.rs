//! Truncated mass `φ_δ`, the random sub-multiset net and the size of the
//! resulting index family.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::params::MartingaleParams;
use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::mc::stream;

pub const DEFAULT_RETRIES: usize = 1000;

/// `Σ_{y∈Y} 1{φ(y,z) ≤ δ} φ(y,z)`, counting `Y` with multiplicity.
pub fn phi_delta(m: &MarkovChain, ys: &[usize], z: usize, delta: f64) -> f64 {
    ys.iter()
        .map(|&y| m.prob(y, z))
        .filter(|&p| p <= delta)
        .sum()
}

/// Per-check failure tallies across attempts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetFailures {
    pub size: usize,
    pub hood: usize,
    pub overlap: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetSample {
    pub attempt: usize,
    pub chosen: Vec<usize>,
    /// `W_0 = {z ∈ W : φ_δ(Y,z) > √K}`.
    pub heavy: Vec<usize>,
    /// `N_δ(Y') = {z ∈ W : φ_δ(Y',z) ≥ δ}`.
    pub neighbourhood: Vec<usize>,
    pub size_bound: f64,
    pub hood_bound: f64,
    pub overlap_needed: f64,
    pub overlap: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome")]
pub enum NetOutcome {
    Success {
        sample: NetSample,
        failures: NetFailures,
    },
    Failure {
        attempts: usize,
        failures: NetFailures,
    },
}

impl NetOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, NetOutcome::Success { .. })
    }
}

/// Keep each member of `Y` independently with probability `min(1, 32δ/K)` until
/// `|Y'| < 33δM/K`, `|N_δ(Y') ∖ W_0| < 64m/√K` and `|N_δ(Y') ∩ Z| > εm` with
/// `ε = δK`. Attempt `a` draws from stream `a` of `seed`.
#[allow(clippy::too_many_arguments)]
pub fn sample_net(
    m: &MarkovChain,
    ys: &[usize],
    zs: &[usize],
    ws: &[usize],
    delta: f64,
    k: f64,
    horizon: usize,
    max_retries: usize,
    seed: u64,
) -> Result<NetOutcome> {
    if !(delta >= 0.0 && k > 0.0) {
        return Err(Error::Precondition("need delta >= 0 and K > 0".into()));
    }
    let n = m.n();
    let mut in_w = vec![false; n];
    for &w in ws {
        if w >= n {
            return Err(Error::Precondition(format!("state {w} out of range")));
        }
        in_w[w] = true;
    }
    if zs.iter().any(|&z| z >= n || !in_w[z]) {
        return Err(Error::Precondition("Z must be a subset of W".into()));
    }
    if ys.iter().any(|&y| y >= n) {
        return Err(Error::Precondition("Y has a state out of range".into()));
    }
    let mw = ws.len() as f64;
    let keep = (32.0 * delta / k).min(1.0);
    let root_k = k.sqrt();
    let heavy: Vec<usize> = ws
        .iter()
        .copied()
        .filter(|&z| phi_delta(m, ys, z, delta) > root_k)
        .collect();
    let size_bound = 33.0 * delta * horizon as f64 / k;
    let hood_bound = 64.0 * mw / root_k;
    let overlap_needed = delta * k * mw;
    let mut failures = NetFailures::default();
    for attempt in 0..max_retries {
        let mut rng = stream(seed, attempt as u64);
        let chosen: Vec<usize> = ys
            .iter()
            .copied()
            .filter(|_| rng.random::<f64>() < keep)
            .collect();
        let neighbourhood: Vec<usize> = ws
            .iter()
            .copied()
            .filter(|&z| phi_delta(m, &chosen, z, delta) >= delta)
            .collect();
        let outside = neighbourhood.iter().filter(|z| !heavy.contains(z)).count();
        let overlap = neighbourhood.iter().filter(|z| zs.contains(z)).count();
        let ok_size = (chosen.len() as f64) < size_bound;
        let ok_hood = (outside as f64) < hood_bound;
        let ok_overlap = overlap as f64 > overlap_needed;
        failures.size += usize::from(!ok_size);
        failures.hood += usize::from(!ok_hood);
        failures.overlap += usize::from(!ok_overlap);
        if ok_size && ok_hood && ok_overlap {
            return Ok(NetOutcome::Success {
                sample: NetSample {
                    attempt,
                    chosen,
                    heavy,
                    neighbourhood,
                    size_bound,
                    hood_bound,
                    overlap_needed,
                    overlap,
                },
                failures,
            });
        }
    }
    Ok(NetOutcome::Failure {
        attempts: max_retries,
        failures,
    })
}

/// Both sides of `|I| < C(2m/β, 33Cδm/K)·C((64+C)m/√K, εm) < (15ε)^{−εm}`,
/// as logarithms. At asymptotic scale `εm` underflows, so each log is also given as
/// a rate per unit of `εm`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetFamilySize {
    pub log_eps_m: f64,
    /// `(33C/K²)(1 + ln(2K/(33Cβδ)))`, the first binomial's rate.
    pub first_rate: f64,
    /// `1 + ln((64+C)/(ε√K))`.
    pub second_rate: f64,
    /// `−ln(15ε)`.
    pub size_rate: f64,
    /// `εm·(first_rate + second_rate)`; zero once `εm` underflows.
    pub log_family_bound: f64,
    /// `−εm·ln(15ε)`.
    pub log_size_bound: f64,
    /// Exact log of the binomial product when `εm ≥ 1`.
    pub log_binomial_exact: Option<f64>,
    pub pass: bool,
}

fn ln_binomial(a: f64, b: f64) -> f64 {
    ln_gamma(a + 1.0) - ln_gamma(b + 1.0) - ln_gamma(a - b + 1.0)
}

pub fn net_family_size(params: &MartingaleParams, m: usize) -> Result<NetFamilySize> {
    if m == 0 {
        return Err(Error::Precondition("m must be positive".into()));
    }
    let (c, k, beta) = (params.c, params.k, params.beta);
    let log_eps = params.log_eps;
    let log_delta = params.log_delta;
    let log_eps_m = log_eps + (m as f64).ln();
    let first_rate =
        33.0 * c / (k * k) * (1.0 + (2.0 / beta).ln() - (33.0 * c).ln() - log_delta + k.ln());
    let second_rate = 1.0 + (64.0 + c).ln() - 0.5 * k.ln() - log_eps;
    let size_rate = -(15f64.ln()) - log_eps;
    let eps_m = log_eps_m.exp();
    let log_binomial_exact = (eps_m >= 1.0).then(|| {
        let mf = m as f64;
        let top1 = 2.0 * mf / beta;
        let bot1 = (33.0 * c * log_delta.exp() * mf / k).min(top1);
        let top2 = (64.0 + c) * mf / k.sqrt();
        let bot2 = eps_m.min(top2);
        ln_binomial(top1, bot1) + ln_binomial(top2, bot2)
    });
    Ok(NetFamilySize {
        log_eps_m,
        first_rate,
        second_rate,
        size_rate,
        log_family_bound: eps_m * (first_rate + second_rate),
        log_size_bound: eps_m * size_rate,
        log_binomial_exact,
        pass: first_rate + second_rate <= size_rate,
    })
}
