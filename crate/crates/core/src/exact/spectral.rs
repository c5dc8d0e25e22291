//! Spectra of reversible chains and the expander tail / hitting bounds.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::power::apply_power;
use crate::chain::{MarkovChain, DENSE_LIMIT, STATIONARY_TOL};
use crate::error::{Error, Result};

/// Absolute accuracy assumed for computed eigenvalues.
pub const EIGEN_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Eigenvalues in nonincreasing order.
    pub eigenvalues: Vec<f64>,
    /// `max{|λ_2|, |λ_n|}`; 0 for a single state.
    pub second_modulus: f64,
}

impl SpectralReport {
    /// Strict test `max{|λ_2|, |λ_n|} < 1 − ε`, with the eigensolver's
    /// roundoff counted against the chain so boundary cases are never certified.
    pub fn is_eps_expander(&self, eps: f64) -> bool {
        self.second_modulus + EIGEN_TOL < 1.0 - eps
    }

    /// Largest `ε` in the spectral sense, `1 − max{|λ_2|, |λ_n|}`.
    pub fn spectral_eps(&self) -> f64 {
        1.0 - self.second_modulus
    }
}

/// Full spectrum via the symmetric matrix `Π^{1/2} P Π^{−1/2}`.
pub fn spectral_gap(m: &MarkovChain) -> Result<SpectralReport> {
    let n = m.n();
    if n > DENSE_LIMIT {
        return Err(Error::Budget(format!(
            "dense eigensolve limited to n <= {DENSE_LIMIT}"
        )));
    }
    if !m.is_reversible(STATIONARY_TOL)? {
        return Err(Error::Precondition(
            "spectral analysis needs a reversible chain".into(),
        ));
    }
    let pi = m.stationary(STATIONARY_TOL)?;
    let mut a = DMatrix::zeros(n, n);
    for (u, row) in m.rows().iter().enumerate() {
        for &(v, p) in row {
            a[(u, v)] = (pi[u] / pi[v]).sqrt() * p;
        }
    }
    let sym = (&a + a.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .copied()
        .collect();
    eigenvalues.sort_by(|a, b| b.total_cmp(a));
    let second_modulus = if n > 1 {
        eigenvalues[1].abs().max(eigenvalues[n - 1].abs())
    } else {
        0.0
    };
    Ok(SpectralReport {
        eigenvalues,
        second_modulus,
    })
}

/// Per-start deviation `|p^t(v,S) − π_S|` against `√(π_S/π_v)(1−ε)^t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailRow {
    pub start: usize,
    pub deviation: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpanderBounds {
    pub t: usize,
    pub eps: f64,
    pub pi_s: f64,
    pub tail: Vec<TailRow>,
    pub max_deviation: f64,
    pub tail_pass: bool,
    /// `Pr_π(T_S > t)`.
    pub hitting_exact: f64,
    /// `(1 − π_S/2)^{εt/(2 log n)}`.
    pub hitting_bound: f64,
    pub hitting_pass: bool,
    /// `max_v Pr_v(T_S > t)`, reported but not compared.
    pub hitting_worst_start: f64,
}

pub fn expander_bounds(
    m: &MarkovChain,
    set: &[usize],
    t: usize,
    eps: f64,
) -> Result<ExpanderBounds> {
    let report = spectral_gap(m)?;
    if !report.is_eps_expander(eps) {
        return Err(Error::Precondition(format!(
            "chain is not a {eps}-expander (second modulus {})",
            report.second_modulus
        )));
    }
    let n = m.n();
    if n < 2 {
        return Err(Error::Precondition("expander bounds need n >= 2".into()));
    }
    let pi = m.stationary(STATIONARY_TOL)?;
    let mut in_set = vec![false; n];
    for &s in set {
        in_set[s] = true;
    }
    let pi_s: f64 = (0..n).filter(|&v| in_set[v]).map(|v| pi[v]).sum();
    let indicator: Vec<f64> = in_set.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let reach = apply_power(m, indicator, t);
    let decay = (1.0 - eps).powi(t as i32);
    let tail: Vec<TailRow> = (0..n)
        .map(|v| TailRow {
            start: v,
            deviation: (reach[v] - pi_s).abs(),
            bound: (pi_s / pi[v]).sqrt() * decay,
        })
        .collect();
    let tail_pass = tail.iter().all(|r| r.deviation <= r.bound + 1e-12);
    let max_deviation = tail.iter().map(|r| r.deviation).fold(0.0, f64::max);

    // Survival vector s_k(x) = Pr_x(T_S > k), by backward recursion.
    let mut surv: Vec<f64> = in_set.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect();
    for _ in 0..t {
        surv = m
            .rows()
            .iter()
            .enumerate()
            .map(|(x, row)| {
                if in_set[x] {
                    0.0
                } else {
                    row.iter().map(|&(y, p)| p * surv[y]).sum()
                }
            })
            .collect();
    }
    let hitting_exact: f64 = surv.iter().zip(&pi).map(|(s, p)| s * p).sum();
    let hitting_bound = (1.0 - pi_s / 2.0).powf(eps * t as f64 / (2.0 * (n as f64).ln()));
    Ok(ExpanderBounds {
        t,
        eps,
        pi_s,
        tail,
        max_deviation,
        tail_pass,
        hitting_exact,
        hitting_bound,
        hitting_pass: hitting_exact < hitting_bound,
        hitting_worst_start: surv.iter().copied().fold(0.0, f64::max),
    })
}
