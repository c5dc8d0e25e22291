//! Scale selection and the general random block partition.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{complement, random_blocks, screen_blocks, Partition, Provenance};
use crate::chain::{MarkovChain, StartRule, STATIONARY_TOL};
use crate::error::{Error, Result};
use crate::exact::{ball_sets, ReturnSurvival};
use crate::mc::estimate_visit_stats;

/// Default exponent `k` in `δ^k`.
pub const DEFAULT_K_EXP: u32 = 5;
/// Largest radius for which the exact ball bookkeeping is run.
pub const EXACT_RADIUS: u64 = 4096;
/// Replications per state for the `D` estimate.
pub const D_REPS: u64 = 400;
/// Total walk steps allowed for the `D` estimate.
pub const D_STEP_BUDGET: f64 = 2e8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScaleChoice {
    pub index: u32,
    pub k_exp: u32,
    pub c: f64,
    pub delta: f64,
    /// Minimal `N` with `(1−δ)^N < δ^k`.
    pub n_min: u64,
    /// `N` actually used, bumped to odd so that `R′ + 1` is even at the first index.
    pub n: u64,
    pub r_prev: u64,
    /// `R′ = N·R_{i−1}`.
    pub r_prime: u64,
    pub r_prime_plus_one_even: bool,
    /// `Q = (4/δ)R′`.
    pub q: f64,
    /// `R = R_i`.
    pub r: u64,
    /// `Q_1 = Qδ^{−3}`.
    pub q1: f64,
    /// `Q_2 = Q_1δ^{−4}`.
    pub q2: f64,
    pub theta: f64,
    /// `|R − CQ_2/θ| / R`, nonzero only through rounding `R_i` up to an integer.
    pub identity_residual: f64,
    /// States with `Pr_v(T_v^+ ∈ (R_{i−1}, R_i]) < δ^k` at the chosen index.
    pub qualifying: usize,
    /// Largest number of scanned indices any single state failed.
    pub max_failures: u32,
}

/// Smallest `N` with `(1−δ)^N < δ^k`.
pub fn min_repeats(delta: f64, k_exp: u32) -> u64 {
    let target = delta.powi(k_exp as i32);
    let mut n = 0u64;
    let mut p = 1.0f64;
    while p >= target {
        p *= 1.0 - delta;
        n += 1;
    }
    n
}

fn survivals(m: &MarkovChain) -> Result<Vec<ReturnSurvival>> {
    let reversible = m.is_reversible(STATIONARY_TOL)?;
    (0..m.n())
        .into_par_iter()
        .map(|v| ReturnSurvival::new(m, v, reversible))
        .collect()
}

pub fn choose_scale(m: &MarkovChain, delta: f64, k_exp: u32, c: f64) -> Result<ScaleChoice> {
    let surv = survivals(m)?;
    choose_scale_with(&surv, delta, k_exp, c).map(|(s, _)| s)
}

/// Returns the choice together with the per-state window test at that index.
fn choose_scale_with(
    surv: &[ReturnSurvival],
    delta: f64,
    k_exp: u32,
    c: f64,
) -> Result<(ScaleChoice, Vec<bool>)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("delta {delta} outside (0, 1)")));
    }
    if k_exp == 0 || !(c > 0.0) {
        return Err(Error::Precondition("need k >= 1 and C > 0".into()));
    }
    let n_states = surv.len();
    let small = delta.powi(k_exp as i32);
    let n_min = min_repeats(delta, k_exp);
    let n = n_min | 1;
    let growth = 4.0 * c * n as f64 * delta.powi(-10);
    let cap = 10.0 * delta.powi(-(k_exp as i32));
    let need = 0.9 * n_states as f64;
    let mut failures = vec![0u32; n_states];
    let mut r_prev = 1u64;
    let mut i = 1u32;
    while (i as f64) < cap {
        let exact = growth * r_prev as f64;
        if exact >= 2f64.powi(62) {
            return Err(Error::ScaleSelection(format!(
                "R_{i} = {exact:e} overflows before 0.9n states qualify"
            )));
        }
        let r = exact.ceil() as u64;
        let ok = surv
            .par_iter()
            .map(|s| s.window(r_prev, r).map(|w| w < small))
            .collect::<Result<Vec<bool>>>()?;
        for (f, &o) in failures.iter_mut().zip(&ok) {
            *f += u32::from(!o);
        }
        let qualifying = ok.iter().filter(|&&o| o).count();
        if qualifying as f64 >= need {
            let r_prime = n * r_prev;
            let q = 4.0 / delta * r_prime as f64;
            let q1 = q * delta.powi(-3);
            let q2 = q1 * delta.powi(-4);
            let theta = delta * delta;
            let choice = ScaleChoice {
                index: i,
                k_exp,
                c,
                delta,
                n_min,
                n,
                r_prev,
                r_prime,
                r_prime_plus_one_even: (r_prime + 1) % 2 == 0,
                q,
                r,
                q1,
                q2,
                theta,
                identity_residual: (r as f64 - c * q2 / theta).abs() / r as f64,
                qualifying,
                max_failures: failures.iter().copied().max().unwrap_or(0),
            };
            return Ok((choice, ok));
        }
        r_prev = r;
        i += 1;
    }
    Err(Error::ScaleSelection(format!(
        "no index below {cap} has 0.9n qualifying states"
    )))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GenericDiagnostics {
    pub scale: ScaleChoice,
    /// `|T|` against `0.6n`.
    pub transient_set: usize,
    pub transient_target: f64,
    pub transient_ok: bool,
    /// `|D|` against `2θn`.
    pub dense_set: usize,
    pub dense_target: f64,
    pub dense_ok: bool,
    /// How `D` was decided: `all_short` when `Q_1 > |T|`, `monte_carlo`, or `budget` (all of `T`).
    pub dense_method: String,
    /// States of `T` whose Wilson interval straddled `θδ`.
    pub straddling: usize,
    pub zeta: f64,
    pub block_count: u64,
    pub nonempty_blocks: usize,
    /// Blocks with `|W_i| > ζn/2`.
    pub blocks_large: usize,
    pub bad: usize,
    /// Bad fraction among partitioned states against `4θ`.
    pub bad_fraction: f64,
    pub bad_target: f64,
    pub nice: usize,
    pub not_nice: usize,
    /// Exact `max_v |B_v(R) ∩ T|` against `Q`, when `R` is small enough.
    pub max_ball: Option<usize>,
    pub ball_ok: Option<bool>,
    /// Exact `max_v ζ|B′_v(R) ∩ T|` against `θ`.
    pub max_union_bound: Option<f64>,
}

pub fn generic_partition(
    m: &MarkovChain,
    c: f64,
    delta: f64,
    k_exp: u32,
    degree_cutoff: usize,
    seed: u64,
) -> Result<(Partition, GenericDiagnostics)> {
    let n = m.n();
    let surv = survivals(m)?;
    let (scale, window_ok) = choose_scale_with(&surv, delta, k_exp, c)?;
    let r = scale.r;
    let theta = scale.theta;
    let transient = surv
        .iter()
        .map(|s| s.survival(r).map(|p| p >= delta))
        .collect::<Result<Vec<bool>>>()?;
    let t_set: Vec<usize> = (0..n)
        .filter(|&v| transient[v] && m.out_degree(v) < degree_cutoff && window_ok[v])
        .collect();

    let q1_count = scale.q1.ceil();
    let mut straddling = 0;
    let (dense, dense_method): (Vec<usize>, &str) = if t_set.is_empty() {
        (Vec::new(), "all_short")
    } else if q1_count > t_set.len() as f64 {
        (t_set.clone(), "all_short")
    } else if (r as f64) * (D_REPS as f64) * (t_set.len() as f64) > D_STEP_BUDGET {
        (t_set.clone(), "budget")
    } else {
        let cut = theta * delta;
        let mut d = Vec::new();
        for (k, &v) in t_set.iter().enumerate() {
            let stats = estimate_visit_stats(
                m,
                &StartRule::Vertex(v),
                r as usize,
                &t_set,
                D_REPS,
                seed ^ (k as u64) << 20,
            )?;
            let e = stats.below(q1_count as usize);
            if e.lo > cut {
                d.push(v);
            } else if e.hi > cut {
                straddling += 1;
                d.push(v);
            }
        }
        (d, "monte_carlo")
    };
    let rest: Vec<usize> = t_set
        .iter()
        .copied()
        .filter(|v| dense.binary_search(v).is_err())
        .collect();

    let zeta = theta / scale.q;
    let block_count = (scale.q / theta).ceil().max(1.0) as u64;
    let candidates = random_blocks(&rest, block_count, seed);
    let nonempty_blocks = candidates.len();
    let blocks_large = candidates
        .iter()
        .filter(|b| b.len() as f64 > zeta * n as f64 / 2.0)
        .count();
    let screened = screen_blocks(m, candidates, delta)?;

    let (max_ball, ball_ok, max_union_bound) = if r <= EXACT_RADIUS && !t_set.is_empty() {
        let sizes = t_set
            .par_iter()
            .map(|&v| {
                let b = ball_sets(m, v, r as usize, delta)?;
                let inside = |set: &[usize]| {
                    set.iter()
                        .filter(|w| t_set.binary_search(w).is_ok())
                        .count()
                };
                Ok((inside(&b.ball), inside(&b.ball_before_return)))
            })
            .collect::<Result<Vec<_>>>()?;
        let mb = sizes.iter().map(|s| s.0).max().unwrap_or(0);
        let mu = sizes.iter().map(|s| s.1).max().unwrap_or(0) as f64 * zeta;
        (Some(mb), Some(mb as f64 <= scale.q), Some(mu))
    } else {
        (None, None, None)
    };

    let v0 = complement(n, &screened.kept);
    let diag = GenericDiagnostics {
        transient_set: t_set.len(),
        transient_target: 0.6 * n as f64,
        transient_ok: t_set.len() as f64 >= 0.6 * n as f64,
        dense_set: dense.len(),
        dense_target: 2.0 * theta * n as f64,
        dense_ok: (dense.len() as f64) < 2.0 * theta * n as f64,
        dense_method: dense_method.into(),
        straddling,
        zeta,
        block_count,
        nonempty_blocks,
        blocks_large,
        bad: screened.bad,
        bad_fraction: if rest.is_empty() {
            0.0
        } else {
            screened.bad as f64 / rest.len() as f64
        },
        bad_target: 4.0 * theta,
        nice: screened.nice,
        not_nice: screened.not_nice,
        max_ball,
        ball_ok,
        max_union_bound,
        scale,
    };
    let p = Partition::new(
        n,
        v0,
        screened.kept,
        screened.designated,
        Provenance {
            construction: "generic".into(),
            params: serde_json::json!({
                "c": c,
                "delta": delta,
                "k_exp": k_exp,
                "degree_cutoff": degree_cutoff,
                "scale_index": diag.scale.index,
                "r": r,
            }),
            seed: Some(seed),
        },
    )?;
    Ok((p, diag))
}
