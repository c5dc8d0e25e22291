//! Return-time laws `Pr_v(T_v^+ = t)`, recurrence classification and
//! return-survival evaluation at very large horizons.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use super::hitting::first_entry_profile;
use crate::chain::{MarkovChain, DENSE_LIMIT};
use crate::error::{Error, Result};

/// `Pr_v(T_v^+ = t)` for `t = 0..=R`.
pub fn return_profile(m: &MarkovChain, v: usize, horizon: usize) -> Vec<f64> {
    let n = m.n();
    let mut start = vec![0.0; n];
    start[v] = 1.0;
    let mut absorb = vec![false; n];
    absorb[v] = true;
    first_entry_profile(m, &start, &absorb, &vec![false; n], horizon)
}

/// `Pr_v(T_v^+ ≤ R)` for every state.
pub fn return_cdf_all(m: &MarkovChain, horizon: usize) -> Vec<f64> {
    (0..m.n())
        .into_par_iter()
        .map(|v| return_profile(m, v, horizon).iter().sum())
        .collect()
}

/// States with `Pr_v(T_v^+ ≤ R) > 1 − δ`.
pub fn classify_recurrent(m: &MarkovChain, delta: f64, horizon: usize) -> Result<Vec<usize>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta {delta} outside (0, 1)")));
    }
    if horizon == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    Ok(return_cdf_all(m, horizon)
        .into_iter()
        .enumerate()
        .filter(|&(_, p)| p > 1.0 - delta)
        .map(|(v, _)| v)
        .collect())
}

/// Evaluates `S(t) = Pr_v(T_v^+ > t)` for arbitrary `t`.
///
/// Small `t` comes from the step DP. Larger `t` on reversible chains uses the
/// spectral expansion of the chain killed at `v`, `S(t) = Σ c_k μ_k^{t−1}`.
#[derive(Clone, Debug)]
pub struct ReturnSurvival {
    table: Vec<f64>,
    modes: Option<Vec<(f64, f64)>>,
}

/// Step-DP prefix used before switching to the spectral form.
pub const SURVIVAL_TABLE: usize = 4096;

impl ReturnSurvival {
    pub fn new(m: &MarkovChain, v: usize, reversible: bool) -> Result<Self> {
        let profile = return_profile(m, v, SURVIVAL_TABLE);
        let mut table = Vec::with_capacity(profile.len());
        let mut left = 1.0f64;
        for f in &profile {
            left -= f;
            table.push(left.max(0.0));
        }
        let modes = if reversible && m.n() > 1 {
            Some(killed_modes(m, v)?)
        } else {
            None
        };
        Ok(ReturnSurvival { table, modes })
    }

    pub fn survival(&self, t: u64) -> Result<f64> {
        if let Some(&s) = self.table.get(t as usize) {
            return Ok(s);
        }
        let modes = self.modes.as_ref().ok_or_else(|| {
            Error::Budget(format!(
                "return survival at t = {t} needs a reversible chain or t < {SURVIVAL_TABLE}"
            ))
        })?;
        let e = (t - 1) as f64;
        let odd = (t - 1) % 2 == 1;
        let s: f64 = modes
            .iter()
            .map(|&(c, mu)| {
                let mag = mu.abs().powf(e);
                if mu < 0.0 && odd {
                    -c * mag
                } else {
                    c * mag
                }
            })
            .sum();
        Ok(s.clamp(0.0, 1.0))
    }

    /// `Pr_v(T_v^+ ∈ (a, b])`.
    pub fn window(&self, a: u64, b: u64) -> Result<f64> {
        Ok((self.survival(a)? - self.survival(b)?).max(0.0))
    }
}

fn killed_modes(m: &MarkovChain, v: usize) -> Result<Vec<(f64, f64)>> {
    let n = m.n();
    if n > DENSE_LIMIT {
        return Err(Error::Budget(format!(
            "spectral survival needs n <= {DENSE_LIMIT}"
        )));
    }
    let pi = m.stationary(1e-9)?;
    let rest: Vec<usize> = (0..n).filter(|&x| x != v).collect();
    let k = rest.len();
    let mut a = DMatrix::zeros(k, k);
    for (i, &x) in rest.iter().enumerate() {
        for (j, &y) in rest.iter().enumerate() {
            let pxy = m.prob(x, y);
            if pxy > 0.0 {
                a[(i, j)] = (pi[x] / pi[y]).sqrt() * pxy;
            }
        }
    }
    let sym = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let left: Vec<f64> = rest.iter().map(|&x| m.prob(v, x) / pi[x].sqrt()).collect();
    let right: Vec<f64> = rest.iter().map(|&x| pi[x].sqrt()).collect();
    Ok((0..k)
        .map(|j| {
            let u = eig.eigenvectors.column(j);
            let l: f64 = u.iter().zip(&left).map(|(a, b)| a * b).sum();
            let r: f64 = u.iter().zip(&right).map(|(a, b)| a * b).sum();
            (l * r, eig.eigenvalues[j])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn k2_everything_recurrent() {
        let m = MarkovChain::random_walk(&generators::path(2)).unwrap();
        assert_eq!(classify_recurrent(&m, 0.1, 2).unwrap(), vec![0, 1]);
    }

    #[test]
    fn p3_end_is_transient_at_short_horizon() {
        let m = MarkovChain::random_walk(&generators::path(3)).unwrap();
        assert_eq!(return_profile(&m, 0, 2), vec![0.0, 0.0, 0.5]);
        assert!(!classify_recurrent(&m, 0.1, 2).unwrap().contains(&0));
    }

    #[test]
    fn long_horizon_makes_everything_recurrent() {
        let m = MarkovChain::random_walk(&generators::cycle(7)).unwrap();
        assert_eq!(classify_recurrent(&m, 1e-6, 2000).unwrap().len(), 7);
    }

    #[test]
    fn spectral_survival_matches_step_dp() {
        let g = generators::random_connected(9, 0.4, 5).unwrap();
        let m = MarkovChain::random_walk(&g).unwrap();
        for v in 0..9 {
            let s = ReturnSurvival::new(&m, v, true).unwrap();
            let modes = s.modes.as_ref().unwrap();
            for t in [1u64, 2, 5, 17, 60] {
                let e = (t - 1) as i32;
                let spectral: f64 = modes.iter().map(|&(c, mu)| c * mu.powi(e)).sum();
                assert!(
                    (spectral - s.table[t as usize]).abs() < 1e-10,
                    "v={v} t={t}"
                );
            }
            assert!(s.survival(1 << 40).unwrap() < 1e-12);
        }
    }

    #[test]
    fn survival_beyond_table_needs_spectral_form() {
        let m = MarkovChain::random_walk(&generators::path(4)).unwrap();
        let s = ReturnSurvival::new(&m, 0, false).unwrap();
        assert!(s.survival(10).is_ok());
        assert!(matches!(s.survival(1 << 20), Err(Error::Budget(_))));
    }
}
