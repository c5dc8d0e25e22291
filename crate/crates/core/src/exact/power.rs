use crate::chain::MarkovChain;

/// `p^t(v, ·)`: the law of `X_t` from `X_0 = v`.
pub fn transition_power(m: &MarkovChain, v: usize, t: usize) -> Vec<f64> {
    let mut dist = vec![0.0; m.n()];
    dist[v] = 1.0;
    evolve(m, dist, t)
}

/// `μ P^t`.
pub fn evolve(m: &MarkovChain, mut dist: Vec<f64>, t: usize) -> Vec<f64> {
    for _ in 0..t {
        dist = m.step(&dist);
    }
    dist
}

/// `P^t f` for a column vector `f`; entry `v` is `E_v f(X_t)`.
pub fn apply_power(m: &MarkovChain, mut f: Vec<f64>, t: usize) -> Vec<f64> {
    for _ in 0..t {
        f = m
            .rows()
            .iter()
            .map(|row| row.iter().map(|&(w, p)| p * f[w]).sum())
            .collect();
    }
    f
}
