//! High-degree vertices that rarely reach low-degree ones quickly.

use serde::{Deserialize, Serialize};

use super::hitting::hit_set_within;
use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::GAMMA;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HeavyWitness {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    pub horizon: usize,
    /// `(v, Pr_v(X_[T] ∩ S ≠ ∅))` for each `v ∈ B`.
    pub reach_low: Vec<(usize, f64)>,
    pub witness: Vec<usize>,
    /// Whether `|W| ≥ |B|/2`; reported, not enforced.
    pub half_met: bool,
}

/// `T = ⌊γΔ/(4d)⌋` and `W = {v ∈ B : Pr_v(X_[T] ∩ S ≠ ∅) < 1/2}`.
pub fn heavy_witness(g: &Graph, big: usize, small: usize) -> Result<HeavyWitness> {
    if small > big {
        return Err(Error::Precondition(
            "low cutoff must not exceed high cutoff".into(),
        ));
    }
    if small == 0 {
        return Err(Error::Precondition("low cutoff must be positive".into()));
    }
    let horizon = (GAMMA * big as f64 / (4.0 * small as f64)).floor() as usize;
    if horizon == 0 {
        return Err(Error::DegenerateHorizon(format!(
            "floor({GAMMA} * {big} / (4 * {small})) = 0"
        )));
    }
    let m = MarkovChain::random_walk(g)?;
    let high: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) > big).collect();
    let low: Vec<usize> = (0..g.n()).filter(|&v| g.degree(v) <= small).collect();
    let reach_low: Vec<(usize, f64)> = high
        .iter()
        .map(|&v| (v, hit_set_within(&m, v, &low, horizon)))
        .collect();
    let witness: Vec<usize> = reach_low
        .iter()
        .filter(|(_, p)| *p < 0.5)
        .map(|&(v, _)| v)
        .collect();
    Ok(HeavyWitness {
        half_met: 2 * witness.len() >= high.len(),
        high,
        low,
        horizon,
        reach_low,
        witness,
    })
}
