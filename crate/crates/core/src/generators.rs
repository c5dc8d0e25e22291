//! Standard graph families and seeded random graphs used by experiments and tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
}

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "cycle needs at least 3 vertices");
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
}

pub fn complete(n: usize) -> Graph {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
    Graph::new(n, edges).expect("complete graph is simple")
}

/// Star `K_{1,leaves}` with center 0.
pub fn star(leaves: usize) -> Graph {
    Graph::new(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star is simple")
}

/// Uniform random labelled tree on `n` vertices (Prüfer decoding).
pub fn random_tree(n: usize, seed: u64) -> Graph {
    if n <= 1 {
        return Graph::new(n, []).unwrap();
    }
    if n == 2 {
        return path(2);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut leaves: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| degree[v] == 1).collect();
    for &c in &code {
        let leaf = *leaves.iter().next().unwrap();
        leaves.remove(&leaf);
        edges.push((leaf, c));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let rest: Vec<usize> = leaves.into_iter().collect();
    edges.push((rest[0], rest[1]));
    Graph::new(n, edges).expect("Prüfer decoding yields a tree")
}

/// Connected random `d`-regular graph from the configuration model with rejection.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n || (n * d) % 2 != 0 {
        return Err(Error::Precondition(format!(
            "no {d}-regular graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        stubs.shuffle(&mut rng);
        let pairs: Vec<(usize, usize)> = stubs.chunks(2).map(|c| (c[0], c[1])).collect();
        if let Ok(g) = Graph::new(n, pairs) {
            if g.is_connected() {
                return Ok(g);
            }
        }
    }
    Err(Error::Budget(format!(
        "could not sample a connected {d}-regular graph on {n} vertices"
    )))
}

/// Connected Erdős–Rényi graph `G(n, p)`, resampled until connected.
pub fn random_connected(n: usize, p: f64, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::new(n, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Budget(format!(
        "could not sample a connected G({n}, {p})"
    )))
}

/// Every connected simple graph on `n` labelled vertices (`n <= 6`).
pub fn all_connected(n: usize) -> Vec<Graph> {
    assert!(n <= 6, "enumeration is exponential in n^2");
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect();
    (0u64..1 << pairs.len())
        .filter_map(|mask| {
            let edges = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e);
            let g = Graph::new(n, edges).ok()?;
            g.is_connected().then_some(g)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_have_expected_shape() {
        assert_eq!(path(5).num_edges(), 4);
        assert_eq!(cycle(5).num_edges(), 5);
        assert_eq!(complete(6).num_edges(), 15);
        assert_eq!(star(5).degree(0), 5);
    }

    #[test]
    fn random_trees_are_trees() {
        for seed in 0..20 {
            let g = random_tree(30 + seed as usize, seed);
            assert!(g.is_tree());
        }
    }

    #[test]
    fn random_regular_is_regular_and_connected() {
        let g = random_regular(50, 3, 1).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert!(g.is_connected());
        assert!(random_regular(5, 3, 0).is_err());
    }

    #[test]
    fn connected_graph_counts() {
        // OEIS A001187: connected labelled graphs.
        assert_eq!(all_connected(1).len(), 1);
        assert_eq!(all_connected(2).len(), 1);
        assert_eq!(all_connected(3).len(), 4);
        assert_eq!(all_connected(4).len(), 38);
    }
}
