//! Random block partition for expanders.

use serde::{Deserialize, Serialize};

use super::{complement, random_blocks, screen_blocks, Partition, Provenance};
use crate::chain::{MarkovChain, STATIONARY_TOL};
use crate::error::{Error, Result};
use crate::exact::spectral_gap;

/// Cap on the horizon search before giving up on the `Rπ` term.
pub const MAX_WARMUP: usize = 1_000_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpanderDiagnostics {
    pub low_degree: usize,
    pub radius: usize,
    /// Smallest `T'` with `√Δ ε⁻¹ (1−ε)^{T'} + Rπ_max < δ/4`.
    pub warmup: usize,
    /// The `Rπ_max` term alone already reaches `δ/4`, so it was dropped from the search.
    pub stationary_term_dropped: bool,
    /// `Q = 4T'/δ`.
    pub q: f64,
    /// `ζ = θ/Q` with `θ = δ²`.
    pub zeta: f64,
    pub block_count: u64,
    pub nonempty_blocks: usize,
    pub bad: usize,
    pub nice: usize,
    pub not_nice: usize,
    /// `ϑ = ζ/2` for the verifier.
    pub theta_for_verifier: f64,
}

/// `degree_cutoff` plays the role of `Δ`: only states with at most that many
/// successors are partitioned.
pub fn expander_partition(
    m: &MarkovChain,
    eps: f64,
    delta: f64,
    degree_cutoff: usize,
    seed: u64,
) -> Result<(Partition, ExpanderDiagnostics)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta {delta} outside (0, 1)")));
    }
    let report = spectral_gap(m)?;
    if !report.is_eps_expander(eps) {
        return Err(Error::Precondition(format!(
            "chain is not a {eps}-expander (second modulus {})",
            report.second_modulus
        )));
    }
    let n = m.n();
    let pi = m.stationary(STATIONARY_TOL)?;
    let low: Vec<usize> = (0..n)
        .filter(|&v| m.out_degree(v) <= degree_cutoff)
        .collect();
    let radius = (n as f64).sqrt().ceil() as usize;
    let pi_max = low.iter().map(|&v| pi[v]).fold(0.0, f64::max);
    let stationary_term = radius as f64 * pi_max;
    let target = delta / 4.0;
    let stationary_term_dropped = stationary_term >= target;
    let offset = if stationary_term_dropped {
        0.0
    } else {
        stationary_term
    };
    let lead = (degree_cutoff.max(1) as f64).sqrt() / eps;
    let warmup = (0..=MAX_WARMUP)
        .find(|&t| lead * (1.0 - eps).powi(t as i32) + offset < target)
        .ok_or_else(|| Error::Budget("warm-up horizon search did not terminate".into()))?;
    let theta = delta * delta;
    let q = 4.0 * warmup as f64 / delta;
    let zeta = theta / q;
    let block_count = (q / theta).ceil().max(1.0) as u64;

    let candidates = random_blocks(&low, block_count, seed);
    let nonempty_blocks = candidates.len();
    let screened = screen_blocks(m, candidates, delta)?;
    let v0 = complement(n, &screened.kept);
    let diag = ExpanderDiagnostics {
        low_degree: low.len(),
        radius,
        warmup,
        stationary_term_dropped,
        q,
        zeta,
        block_count,
        nonempty_blocks,
        bad: screened.bad,
        nice: screened.nice,
        not_nice: screened.not_nice,
        theta_for_verifier: zeta / 2.0,
    };
    let p = Partition::new(
        n,
        v0,
        screened.kept,
        screened.designated,
        Provenance {
            construction: "expander".into(),
            params: serde_json::json!({
                "eps": eps,
                "delta": delta,
                "degree_cutoff": degree_cutoff,
                "block_count": block_count,
            }),
            seed: Some(seed),
        },
    )?;
    Ok((p, diag))
}
