//! The chain watched on a subset: `φ_W(u, w) = Pr_u(X_{T_W^+} = w)`.

use nalgebra::DMatrix;

use crate::chain::{MarkovChain, DENSE_LIMIT};
use crate::error::{Error, Result};

/// An induced chain together with the original labels of its states.
#[derive(Clone, Debug)]
pub struct InducedChain {
    pub states: Vec<usize>,
    pub chain: MarkovChain,
}

impl InducedChain {
    pub fn index_of(&self, v: usize) -> Option<usize> {
        self.states.binary_search(&v).ok()
    }

    /// `φ_W(v, w)` by original labels.
    pub fn prob(&self, v: usize, w: usize) -> f64 {
        match (self.index_of(v), self.index_of(w)) {
            (Some(i), Some(j)) => self.chain.prob(i, j),
            _ => 0.0,
        }
    }

    /// `max_{w ∈ W, w ≠ v} φ_W(v, w)`; 0 when `|W| = 1`.
    pub fn max_off_diagonal(&self, v: usize) -> f64 {
        let i = self.index_of(v).expect("v in W");
        self.chain
            .row(i)
            .iter()
            .filter(|&&(j, _)| j != i)
            .map(|&(_, p)| p)
            .fold(0.0, f64::max)
    }

    /// Largest `φ_W(v, w)` over ordered pairs of distinct states.
    pub fn max_pairwise(&self) -> f64 {
        self.states
            .iter()
            .map(|&v| self.max_off_diagonal(v))
            .fold(0.0, f64::max)
    }
}

/// Solves `(I − P_UU) H = P_UW` on `U = V∖W`, then
/// `φ_W(u, ·) = P(u, W) + P(u, U) H`.
pub fn induced_chain(m: &MarkovChain, set: &[usize]) -> Result<InducedChain> {
    let n = m.n();
    let mut states = set.to_vec();
    states.sort_unstable();
    states.dedup();
    if states.is_empty() {
        return Err(Error::Precondition(
            "induced chain needs a nonempty set".into(),
        ));
    }
    if let Some(&bad) = states.iter().find(|&&v| v >= n) {
        return Err(Error::Precondition(format!("state {bad} out of range")));
    }
    if let Some(bad) = m.can_reach(&states).iter().position(|&r| !r) {
        return Err(Error::EscapingMass(bad));
    }
    let mut slot = vec![None; n];
    for (j, &w) in states.iter().enumerate() {
        slot[w] = Some(j);
    }
    let rest: Vec<usize> = (0..n).filter(|&x| slot[x].is_none()).collect();
    let k = states.len();
    let h = if rest.is_empty() {
        DMatrix::<f64>::zeros(0, k)
    } else {
        if rest.len() > DENSE_LIMIT {
            return Err(Error::Budget(format!(
                "induced chain solve over {} states exceeds {DENSE_LIMIT}",
                rest.len()
            )));
        }
        let mut pos = vec![usize::MAX; n];
        for (i, &x) in rest.iter().enumerate() {
            pos[x] = i;
        }
        let r = rest.len();
        let mut a = DMatrix::<f64>::identity(r, r);
        let mut b = DMatrix::zeros(r, k);
        for (i, &x) in rest.iter().enumerate() {
            for &(y, p) in m.row(x) {
                match slot[y] {
                    Some(j) => b[(i, j)] += p,
                    None => a[(i, pos[y])] -= p,
                }
            }
        }
        a.lu()
            .solve(&b)
            .ok_or_else(|| Error::Verification("singular absorbing system".into()))?
    };
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in rest.iter().enumerate() {
        pos[x] = i;
    }
    let rows = states
        .iter()
        .map(|&u| {
            let mut row = vec![0.0; k];
            for &(y, p) in m.row(u) {
                match slot[y] {
                    Some(j) => row[j] += p,
                    None => {
                        for (j, cell) in row.iter_mut().enumerate() {
                            *cell += p * h[(pos[y], j)];
                        }
                    }
                }
            }
            row.into_iter()
                .enumerate()
                .map(|(j, p)| (j, p.clamp(0.0, 1.0)))
                .collect()
        })
        .collect();
    Ok(InducedChain {
        states,
        chain: MarkovChain::new(rows)?,
    })
}
