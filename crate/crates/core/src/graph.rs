//! Simple undirected graphs on dense vertex indices `0..n`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A finite simple graph. Vertices are `0..n`; adjacency lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, parallel edges and out-of-range endpoints.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
            list.push((u.min(v), u.max(v)));
        }
        for (v, nbrs) in adj.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if let Some(w) = nbrs.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!(
                    "parallel edge between {v} and {}",
                    w[0]
                )));
            }
        }
        list.sort_unstable();
        Ok(Graph {
            n,
            adj,
            edges: list,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// BFS distances from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.distances_from(0).iter().all(Option::is_some)
    }

    pub fn is_tree(&self) -> bool {
        self.n > 0 && self.num_edges() == self.n - 1 && self.is_connected()
    }

    /// Parses the edge-list text format: a header line `n m` followed by `m`
    /// lines `u v`. Lines starting with `#` and blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "missing header line"))?;
        let nums = parse_usizes(hline, header)?;
        let [n, m] = nums[..] else {
            return Err(Error::parse(hline, "header must be `n m`"));
        };
        let mut edges = Vec::with_capacity(m);
        for (line, l) in lines {
            let nums = parse_usizes(line, l)?;
            let [u, v] = nums[..] else {
                return Err(Error::parse(line, "edge line must be `u v`"));
            };
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(Error::parse(
                0,
                format!("header declares {m} edges, found {}", edges.len()),
            ));
        }
        Graph::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.num_edges());
        for &(u, v) in &self.edges {
            let _ = writeln!(s, "{u} {v}");
        }
        s
    }
}

fn parse_usizes(line: usize, text: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|e| Error::parse(line, format!("bad integer `{tok}`: {e}")))
        })
        .collect()
}
