//! Finite Markov chains stored as sparse row-stochastic matrices.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Row sums must lie within this distance of 1.
pub const ROW_SUM_TOL: f64 = 1e-9;
/// Tolerance for a supplied stationary vector: `πP = π` residual.
pub const STATIONARY_TOL: f64 = 1e-9;
/// Tolerance on `Σπ = 1` for a supplied stationary vector.
pub const MASS_TOL: f64 = 1e-12;
/// Largest state count handled by the dense direct solvers.
pub const DENSE_LIMIT: usize = 2000;

/// A Markov chain on states `0..n` with sparse rows of `(target, probability)`.
///
/// Rows are sorted by target with no duplicates and no explicit zeros.
/// Self-loops are allowed (induced chains produce them).
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovChain {
    rows: Vec<Vec<(usize, f64)>>,
    stationary: Option<Vec<f64>>,
    reversible: Option<bool>,
}

impl MarkovChain {
    pub fn new(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidChain("empty state space".into()));
        }
        let mut clean = Vec::with_capacity(n);
        for (u, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(v, _)| v);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (v, p) in row {
                if v >= n {
                    return Err(Error::InvalidChain(format!(
                        "row {u} targets state {v} >= n = {n}"
                    )));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidChain(format!(
                        "probability {p} at ({u}, {v}) outside [0, 1]"
                    )));
                }
                match merged.last_mut() {
                    Some((w, q)) if *w == v => *q += p,
                    _ => merged.push((v, p)),
                }
            }
            merged.retain(|&(_, p)| p > 0.0);
            let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidChain(format!("row {u} sums to {sum}")));
            }
            clean.push(merged);
        }
        Ok(MarkovChain {
            rows: clean,
            stationary: None,
            reversible: None,
        })
    }

    pub fn from_dense(matrix: &[Vec<f64>]) -> Result<Self> {
        let n = matrix.len();
        let rows = matrix
            .iter()
            .enumerate()
            .map(|(u, row)| {
                if row.len() != n {
                    return Err(Error::InvalidChain(format!(
                        "row {u} has {} entries, expected {n}",
                        row.len()
                    )));
                }
                Ok(row.iter().copied().enumerate().collect())
            })
            .collect::<Result<Vec<_>>>()?;
        MarkovChain::new(rows)
    }

    /// Simple random walk on `g`: uniform over neighbors, with the closed-form
    /// stationary law `d_v / 2|E|` and a reversibility certificate attached.
    pub fn random_walk(g: &Graph) -> Result<Self> {
        if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
            return Err(Error::DegenerateVertex(v));
        }
        let rows = (0..g.n())
            .map(|v| {
                let p = 1.0 / g.degree(v) as f64;
                g.neighbors(v).iter().map(|&w| (w, p)).collect()
            })
            .collect();
        let mut chain = MarkovChain::new(rows)?;
        let two_m = 2.0 * g.num_edges() as f64;
        chain.stationary = Some((0..g.n()).map(|v| g.degree(v) as f64 / two_m).collect());
        chain.reversible = Some(true);
        Ok(chain)
    }

    /// Attaches a stationary vector after checking `πP = π` and `Σπ = 1`.
    pub fn with_stationary(mut self, pi: Vec<f64>) -> Result<Self> {
        if pi.len() != self.n() {
            return Err(Error::InvalidChain(
                "stationary vector has wrong length".into(),
            ));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidChain(format!("stationary mass {total} != 1")));
        }
        let residual = max_abs_diff(&self.step(&pi), &pi);
        if residual > STATIONARY_TOL {
            return Err(Error::InvalidChain(format!(
                "stationary residual {residual:e} exceeds tolerance"
            )));
        }
        self.stationary = Some(pi);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, u: usize) -> &[(usize, f64)] {
        &self.rows[u]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn prob(&self, u: usize, v: usize) -> f64 {
        let row = &self.rows[u];
        row.binary_search_by_key(&v, |&(w, _)| w)
            .map(|i| row[i].1)
            .unwrap_or(0.0)
    }

    /// Number of distinct states reachable in one step, excluding `u` itself.
    pub fn out_degree(&self, u: usize) -> usize {
        self.rows[u].iter().filter(|&&(v, _)| v != u).count()
    }

    pub fn stored_stationary(&self) -> Option<&[f64]> {
        self.stationary.as_deref()
    }

    pub fn reversible_certificate(&self) -> Option<bool> {
        self.reversible
    }

    /// One step of the row-vector recursion `μ ↦ μP`.
    pub fn step(&self, dist: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (u, &mass) in dist.iter().enumerate() {
            if mass != 0.0 {
                for &(v, p) in &self.rows[u] {
                    out[v] += mass * p;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, p) in row {
                m[(u, v)] = p;
            }
        }
        m
    }

    /// States from which `targets` can be reached along positive-probability edges.
    pub fn can_reach(&self, targets: &[usize]) -> Vec<bool> {
        let n = self.n();
        let mut rev = vec![Vec::new(); n];
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, _) in row {
                rev[v].push(u);
            }
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = targets.to_vec();
        for &t in targets {
            seen[t] = true;
        }
        while let Some(v) = stack.pop() {
            for &u in &rev[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    pub fn is_irreducible(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.rows[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s) && self.can_reach(&[0]).iter().all(|&s| s)
    }

    /// Stationary distribution: the stored vector if present, else a direct
    /// solve (n ≤ 2000) or power iteration on the lazy chain.
    pub fn stationary(&self, tol: f64) -> Result<Vec<f64>> {
        if let Some(pi) = &self.stationary {
            return Ok(pi.clone());
        }
        if !self.is_irreducible() {
            return Err(Error::NotIrreducible);
        }
        let pi = if self.n() <= DENSE_LIMIT {
            self.stationary_direct()?
        } else {
            self.stationary_power(1e-12)
        };
        let residual = max_abs_diff(&self.step(&pi), &pi);
        if residual > tol {
            return Err(Error::Verification(format!(
                "stationary residual {residual:e} exceeds {tol:e}"
            )));
        }
        Ok(pi)
    }

    fn stationary_direct(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let mut a = self.to_dense().transpose();
        for i in 0..n {
            a[(i, i)] -= 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Verification("singular stationary system".into()))?;
        Ok(normalize(x.iter().map(|&p| p.max(0.0)).collect()))
    }

    fn stationary_power(&self, tol: f64) -> Vec<f64> {
        let n = self.n();
        let mut pi = vec![1.0 / n as f64; n];
        for _ in 0..1_000_000 {
            let stepped = self.step(&pi);
            let lazy: Vec<f64> = pi
                .iter()
                .zip(&stepped)
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let change: f64 = lazy.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = lazy;
            if change < tol {
                break;
            }
        }
        normalize(pi)
    }

    /// Detailed balance `π_u P(u,v) = π_v P(v,u)` for all pairs, within `tol`.
    pub fn is_reversible(&self, tol: f64) -> Result<bool> {
        if let Some(r) = self.reversible {
            return Ok(r);
        }
        let pi = self.stationary(STATIONARY_TOL.max(tol))?;
        Ok(self.detailed_balance_residual(&pi) <= tol)
    }

    /// Largest `|π_u P(u,v) − π_v P(v,u)|` over all pairs.
    pub fn detailed_balance_residual(&self, pi: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, p) in row {
                worst = worst.max((pi[u] * p - pi[v] * self.prob(v, u)).abs());
            }
        }
        worst
    }

    pub fn check_path_reversibility(&self, path: &[usize], tol: f64) -> Result<PathReversibility> {
        let first = *path
            .first()
            .ok_or_else(|| Error::Precondition("path must be nonempty".into()))?;
        if path.iter().any(|&v| v >= self.n()) {
            return Err(Error::Precondition("path leaves the state space".into()));
        }
        let pi = self.stationary(STATIONARY_TOL)?;
        let last = *path.last().unwrap();
        let forward: f64 = path.windows(2).map(|w| self.prob(w[0], w[1])).product();
        let backward: f64 = path.windows(2).map(|w| self.prob(w[1], w[0])).product();
        let lhs = pi[first] * forward;
        let rhs = pi[last] * backward;
        let scale = lhs.max(rhs).max(f64::MIN_POSITIVE);
        Ok(PathReversibility {
            lhs,
            rhs,
            pass: (lhs - rhs).abs() <= tol * scale,
        })
    }

    /// Stable 64-bit FNV-1a digest of the transition structure, used as a chain id.
    pub fn fingerprint(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        feed(&(self.n() as u64).to_le_bytes());
        for row in &self.rows {
            feed(&(row.len() as u64).to_le_bytes());
            for &(v, p) in row {
                feed(&(v as u64).to_le_bytes());
                feed(&p.to_bits().to_le_bytes());
            }
        }
        format!("{h:016x}")
    }

    /// Parses the sparse triplet format: a line `n`, then lines `u v p`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(0, "missing header line"))?;
        let n: usize = header
            .parse()
            .map_err(|e| Error::parse(hline, format!("bad state count: {e}")))?;
        let mut rows = vec![Vec::new(); n];
        for (line, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            let [u, v, p] = toks[..] else {
                return Err(Error::parse(line, "triplet line must be `u v p`"));
            };
            let u: usize = u.parse().map_err(|e| Error::parse(line, format!("{e}")))?;
            let v: usize = v.parse().map_err(|e| Error::parse(line, format!("{e}")))?;
            let p: f64 = p.parse().map_err(|e| Error::parse(line, format!("{e}")))?;
            if u >= n {
                return Err(Error::parse(line, format!("state {u} >= n = {n}")));
            }
            rows[u].push((v, p));
        }
        MarkovChain::new(rows)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n());
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, p) in row {
                let _ = writeln!(s, "{u} {v} {p:?}");
            }
        }
        s
    }
}

/// Both sides of the path-reversibility identity.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PathReversibility {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Rule for choosing `X_0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartRule {
    Vertex(usize),
    Distribution(Vec<f64>),
}

impl StartRule {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            StartRule::Vertex(v) if *v >= n => Err(Error::Precondition(format!(
                "start vertex {v} out of range"
            ))),
            StartRule::Vertex(_) => Ok(()),
            StartRule::Distribution(d) => {
                if d.len() != n {
                    return Err(Error::Precondition(
                        "start distribution has wrong length".into(),
                    ));
                }
                if d.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(Error::Precondition(
                        "start distribution entry outside [0,1]".into(),
                    ));
                }
                let total: f64 = d.iter().sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(Error::Precondition(format!(
                        "start distribution sums to {total}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Nonzero `(state, probability)` pairs.
    pub fn support(&self) -> Vec<(usize, f64)> {
        match self {
            StartRule::Vertex(v) => vec![(*v, 1.0)],
            StartRule::Distribution(d) => d
                .iter()
                .copied()
                .enumerate()
                .filter(|&(_, p)| p > 0.0)
                .collect(),
        }
    }

    pub fn to_distribution(&self, n: usize) -> Vec<f64> {
        let mut d = vec![0.0; n];
        for (v, p) in self.support() {
            d[v] = p;
        }
        d
    }
}

/// A realized trajectory `X_0..X_s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub states: Vec<usize>,
    pub seed: u64,
    pub chain_id: String,
}

impl WalkTrace {
    pub fn steps(&self) -> usize {
        self.states.len().saturating_sub(1)
    }

    /// Checks that every transition has positive probability under `chain`.
    pub fn validate(&self, chain: &MarkovChain) -> Result<()> {
        if self.states.is_empty() {
            return Err(Error::Precondition("empty trace".into()));
        }
        if let Some(w) = self
            .states
            .windows(2)
            .find(|w| chain.prob(w[0], w[1]) <= 0.0)
        {
            return Err(Error::Precondition(format!(
                "trace uses impossible transition {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(())
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    for x in &mut v {
        *x /= s;
    }
    v
}
