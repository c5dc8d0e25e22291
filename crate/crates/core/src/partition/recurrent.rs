//! Partition of the `(δ,R)`-recurrent states by colouring their conflict graph.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{complement, Partition, Provenance};
use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::exact::{ball_sets, classify_recurrent, induced_chain};
use crate::graph::Graph;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecurrentDiagnostics {
    pub recurrent: Vec<usize>,
    pub conflict_edges: usize,
    pub colors: usize,
    /// Largest number of already-coloured conflict neighbours met by the greedy pass.
    pub max_forward_degree: usize,
    /// `2R/δ`.
    pub color_bound: f64,
    pub within_bound: bool,
    /// Largest induced pairwise probability over kept classes, against `3δ/2`.
    pub max_pairwise: f64,
}

pub fn recurrent_partition(
    g: &Graph,
    delta: f64,
    horizon: usize,
    theta: f64,
) -> Result<(Partition, RecurrentDiagnostics)> {
    let n = g.n();
    let m = MarkovChain::random_walk(g)?;
    let recurrent = classify_recurrent(&m, delta, horizon)?;
    let provenance = Provenance {
        construction: "recurrent".into(),
        params: serde_json::json!({ "delta": delta, "horizon": horizon, "theta": theta }),
        seed: None,
    };
    let color_bound = 2.0 * horizon as f64 / delta;
    let mut diag = RecurrentDiagnostics {
        recurrent: recurrent.clone(),
        conflict_edges: 0,
        colors: 0,
        max_forward_degree: 0,
        color_bound,
        within_bound: true,
        max_pairwise: 0.0,
    };
    if recurrent.is_empty() {
        return Ok((Partition::trivial(n, provenance), diag));
    }
    let k = recurrent.len();
    let mut slot = vec![usize::MAX; n];
    for (i, &v) in recurrent.iter().enumerate() {
        slot[v] = i;
    }
    let balls = recurrent
        .par_iter()
        .map(|&v| ball_sets(&m, v, horizon, delta).map(|b| b.ball_before_return))
        .collect::<Result<Vec<_>>>()?;
    let mut adj = vec![Vec::new(); k];
    for (i, ball) in balls.iter().enumerate() {
        for &w in ball {
            let j = slot[w];
            if j != usize::MAX && !adj[i].contains(&j) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    diag.conflict_edges = adj.iter().map(Vec::len).sum::<usize>() / 2;

    // Ascending degree order (ties by index); colouring runs from the top of
    // the order so each state only sees its forward neighbours.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (g.degree(recurrent[i]), recurrent[i]));
    let mut color = vec![usize::MAX; k];
    for &i in order.iter().rev() {
        let used: Vec<usize> = adj[i]
            .iter()
            .map(|&j| color[j])
            .filter(|&c| c != usize::MAX)
            .collect();
        diag.max_forward_degree = diag.max_forward_degree.max(used.len());
        color[i] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    diag.colors = color.iter().max().map_or(0, |&c| c + 1);
    diag.within_bound =
        diag.colors <= diag.max_forward_degree + 1 && diag.colors as f64 <= color_bound;

    let mut classes = vec![Vec::new(); diag.colors];
    for (i, &c) in color.iter().enumerate() {
        classes[c].push(recurrent[i]);
    }
    let cut = theta * n as f64;
    let blocks: Vec<Vec<usize>> = classes
        .into_iter()
        .filter(|c| c.len() as f64 > cut)
        .collect();
    let worst = blocks
        .par_iter()
        .map(|b| induced_chain(&m, b).map(|ic| ic.max_pairwise()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    diag.max_pairwise = worst;
    if worst >= 1.5 * delta {
        return Err(Error::Verification(format!(
            "recurrent class has induced transition {worst} >= 3δ/2"
        )));
    }
    let v0 = complement(n, &blocks);
    let p = Partition::new(n, v0, blocks.clone(), blocks, provenance)?;
    Ok((p, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn k2_gives_two_singletons() {
        let (p, d) = recurrent_partition(&generators::path(2), 0.5, 2, 0.1).unwrap();
        assert_eq!(d.recurrent, vec![0, 1]);
        assert_eq!(d.conflict_edges, 1);
        let mut blocks = p.blocks.clone();
        blocks.sort();
        assert_eq!(blocks, vec![vec![0], vec![1]]);
        assert!(d.within_bound);
    }

    #[test]
    fn nothing_recurrent() {
        // Without self-loops nothing returns within one step.
        let (p, d) = recurrent_partition(&generators::cycle(12), 0.1, 1, 0.1).unwrap();
        assert!(d.recurrent.is_empty());
        assert_eq!(p.v0.len(), 12);
    }
}
