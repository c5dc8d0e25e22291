//! Partitions of the state space into watched blocks, their verifier and the
//! four constructions.

pub mod expander;
pub mod generic;
pub mod recurrent;
pub mod tree;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::exact::{ball_sets, hit_set_within, induced_chain, InducedChain};
use crate::martingale::asymptotic_params;
use crate::GAMMA;

pub use expander::{expander_partition, ExpanderDiagnostics};
pub use generic::{choose_scale, generic_partition, GenericDiagnostics, ScaleChoice};
pub use recurrent::{recurrent_partition, RecurrentDiagnostics};
pub use tree::{far_bound, keep_large, tree_safe_partition, FarBound};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub construction: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
}

/// `V = V0 ∪ V_1 ∪ … ∪ V_k` with designated `U_i ⊆ V_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub n: usize,
    pub v0: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub designated: Vec<Vec<usize>>,
    pub provenance: Provenance,
}

impl Partition {
    pub fn new(
        n: usize,
        v0: Vec<usize>,
        blocks: Vec<Vec<usize>>,
        designated: Vec<Vec<usize>>,
        provenance: Provenance,
    ) -> Result<Self> {
        let mut p = Partition {
            n,
            v0,
            blocks,
            designated,
            provenance,
        };
        p.v0.sort_unstable();
        for b in p.blocks.iter_mut().chain(p.designated.iter_mut()) {
            b.sort_unstable();
        }
        p.validate()?;
        Ok(p)
    }

    /// Everything in `V0`.
    pub fn trivial(n: usize, provenance: Provenance) -> Self {
        Partition {
            n,
            v0: (0..n).collect(),
            blocks: Vec::new(),
            designated: Vec::new(),
            provenance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPartition(msg));
        if self.blocks.len() != self.designated.len() {
            return bad("one designated set per block is required".into());
        }
        let mut seen = vec![false; self.n];
        for &v in self.v0.iter().chain(self.blocks.iter().flatten()) {
            if v >= self.n {
                return bad(format!("state {v} out of range"));
            }
            if seen[v] {
                return bad(format!("state {v} appears twice"));
            }
            seen[v] = true;
        }
        if let Some(v) = seen.iter().position(|&s| !s) {
            return bad(format!("state {v} is not covered"));
        }
        for (i, (b, u)) in self.blocks.iter().zip(&self.designated).enumerate() {
            if b.is_empty() {
                return bad(format!("block {i} is empty"));
            }
            if u.iter().any(|x| b.binary_search(x).is_err()) {
                return bad(format!("designated set {i} is not inside its block"));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Partition = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }
}

/// `max_{w ≠ v in W} φ_W(v,w) < δ`.
pub fn is_good(m: &MarkovChain, v: usize, set: &[usize], delta: f64) -> Result<bool> {
    if !set.contains(&v) {
        return Err(Error::Precondition(format!("{v} is not in W")));
    }
    Ok(induced_chain(m, set)?.max_off_diagonal(v) < delta)
}

/// Row maxima `max_{w≠v} φ_W(v,w)` and column maxima `max_{v≠w} φ_W(v,w)` of one induced chain.
pub(crate) fn row_col_max(ic: &InducedChain) -> (Vec<f64>, Vec<f64>) {
    let k = ic.states.len();
    let mut row = vec![0.0f64; k];
    let mut col = vec![0.0f64; k];
    for (i, r) in ic.chain.rows().iter().enumerate() {
        for &(j, p) in r {
            if i != j {
                row[i] = row[i].max(p);
                col[j] = col[j].max(p);
            }
        }
    }
    (row, col)
}

/// `{w ∈ W : max_{v≠w} φ_W(v,w) < δ}`.
pub fn designated_set(m: &MarkovChain, set: &[usize], delta: f64) -> Result<Vec<usize>> {
    let ic = induced_chain(m, set)?;
    let (_, col) = row_col_max(&ic);
    Ok(ic
        .states
        .iter()
        .zip(col)
        .filter(|&(_, c)| c < delta)
        .map(|(&w, _)| w)
        .collect())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Observation {
    /// `W ∩ B′_v(R) = ∅`.
    pub avoids_ball: bool,
    /// `Pr_v(X_[R] ∩ W = ∅)`.
    pub miss: f64,
    pub miss_small: bool,
    pub certified: bool,
}

/// Sufficient test for goodness; `certified == false` means inconclusive, never bad.
pub fn good_by_observation(
    m: &MarkovChain,
    v: usize,
    set: &[usize],
    horizon: usize,
    delta: f64,
) -> Result<Observation> {
    if !set.contains(&v) {
        return Err(Error::Precondition(format!("{v} is not in W")));
    }
    let balls = ball_sets(m, v, horizon, delta)?;
    let avoids_ball = set
        .iter()
        .all(|&w| w == v || !balls.contains_before_return(w));
    let miss = 1.0 - hit_set_within(m, v, set, horizon);
    let miss_small = miss < delta / 2.0;
    Ok(Observation {
        avoids_ball,
        miss,
        miss_small,
        certified: avoids_ball && miss_small,
    })
}

/// Threshold for the designated-set condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum DeltaThreshold {
    Constant(f64),
    /// `δ(C/γ², γ)` with `λ = 1`, compared in log space.
    Asymptotic,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockVerdict {
    pub size: usize,
    pub designated: usize,
    pub large: bool,
    pub designated_large: bool,
    /// `max{φ_i(v,w) : v ∈ V_i, v ≠ w ∈ U_i}`.
    pub max_into_designated: f64,
    pub small_transitions: bool,
    /// `⌈(C/γ)|V_i|⌉` induced steps are the budget for covering `U_i`.
    pub induced_steps: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorVerdict {
    pub n: usize,
    pub theta: f64,
    pub c: f64,
    pub gamma: f64,
    pub log_threshold: f64,
    pub blocks_large: bool,
    pub v0_small: bool,
    pub designated_large: bool,
    pub transitions_small: bool,
    pub pass: bool,
    pub per_block: Vec<BlockVerdict>,
}

pub fn verify_cor_p(
    m: &MarkovChain,
    p: &Partition,
    c: f64,
    theta: f64,
    threshold: DeltaThreshold,
) -> Result<CorVerdict> {
    p.validate()?;
    if p.n != m.n() {
        return Err(Error::InvalidPartition(format!(
            "partition has {} states, chain has {}",
            p.n,
            m.n()
        )));
    }
    let gamma = GAMMA;
    let log_threshold = match threshold {
        DeltaThreshold::Constant(d) => d.ln(),
        DeltaThreshold::Asymptotic => asymptotic_params(c / (gamma * gamma), gamma, 1.0)?.log_delta,
    };
    let n = p.n as f64;
    let per_block = p
        .blocks
        .par_iter()
        .zip(&p.designated)
        .map(|(b, u)| {
            let ic = induced_chain(m, b)?;
            let mut worst = 0.0f64;
            for &v in b {
                for &w in u {
                    if v != w {
                        worst = worst.max(ic.prob(v, w));
                    }
                }
            }
            Ok(BlockVerdict {
                size: b.len(),
                designated: u.len(),
                large: b.len() as f64 > theta * n,
                designated_large: u.len() as f64 > gamma * b.len() as f64,
                max_into_designated: worst,
                small_transitions: worst.ln() < log_threshold,
                induced_steps: (c / gamma * b.len() as f64).ceil() as u64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let blocks_large = per_block.iter().all(|b| b.large);
    let v0_small = (p.v0.len() as f64) < (1.0 - gamma) * n;
    let designated_large = per_block.iter().all(|b| b.designated_large);
    let transitions_small = per_block.iter().all(|b| b.small_transitions);
    Ok(CorVerdict {
        n: p.n,
        theta,
        c,
        gamma,
        log_threshold,
        blocks_large,
        v0_small,
        designated_large,
        transitions_small,
        pass: blocks_large && v0_small && designated_large && transitions_small,
        per_block,
    })
}

/// Uniform random assignment of `states` into `count` labelled blocks; only
/// nonempty blocks are returned, in label order.
pub(crate) fn random_blocks(states: &[usize], count: u64, seed: u64) -> Vec<Vec<usize>> {
    use rand::Rng;
    let mut rng = crate::mc::stream(seed, 0);
    let mut by_label: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for &v in states {
        by_label
            .entry(rng.random_range(0..count.max(1)))
            .or_default()
            .push(v);
    }
    by_label.into_values().collect()
}

/// Exact badness and designated sets for candidate blocks; blocks with
/// `|bad| < δ|W|/2` are kept, the rest go to `V0`.
pub(crate) struct Screened {
    pub kept: Vec<Vec<usize>>,
    pub designated: Vec<Vec<usize>>,
    pub dropped: Vec<usize>,
    pub bad: usize,
    pub nice: usize,
    pub not_nice: usize,
}

pub(crate) fn screen_blocks(
    m: &MarkovChain,
    blocks: Vec<Vec<usize>>,
    delta: f64,
) -> Result<Screened> {
    let judged = blocks
        .into_par_iter()
        .map(|b| {
            let ic = induced_chain(m, &b)?;
            let (row, col) = row_col_max(&ic);
            let bad = row.iter().filter(|&&r| r >= delta).count();
            let u: Vec<usize> = ic
                .states
                .iter()
                .zip(&col)
                .filter(|&(_, &c)| c < delta)
                .map(|(&w, _)| w)
                .collect();
            Ok((b, u, bad))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = Screened {
        kept: Vec::new(),
        designated: Vec::new(),
        dropped: Vec::new(),
        bad: 0,
        nice: 0,
        not_nice: 0,
    };
    for (b, u, bad) in judged {
        s.bad += bad;
        if (bad as f64) < delta * b.len() as f64 / 2.0 {
            s.nice += 1;
            s.kept.push(b);
            s.designated.push(u);
        } else {
            s.not_nice += 1;
            s.dropped.extend(b);
        }
    }
    Ok(s)
}

/// `V0 = V ∖ ⋃ blocks`.
pub(crate) fn complement(n: usize, blocks: &[Vec<usize>]) -> Vec<usize> {
    let mut inside = vec![false; n];
    for &v in blocks.iter().flatten() {
        inside[v] = true;
    }
    (0..n).filter(|&v| !inside[v]).collect()
}
