//! Tail bounds for `ξ` and the per-trace bookkeeping behind them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::xi::{build_xi, XiSpec};
use crate::chain::{MarkovChain, WalkTrace};
use crate::error::{Error, Result};
use crate::mc::{empirical_tail_vs_bound, TailCheck};

/// `exp(−η²/(2kL²))` for a martingale with `k` steps and increments bounded by `L`.
pub fn azuma_bound(k: usize, l: f64, eta: f64) -> f64 {
    (-eta * eta / (2.0 * k as f64 * l * l)).exp()
}

/// `2·exp(−ϑ²λ⁴m/(8L)²)`.
pub fn alltime_bound(theta: f64, lambda: f64, big_l: f64, m: usize) -> f64 {
    2.0 * (-theta * theta * lambda.powi(4) * m as f64 / (8.0 * big_l).powi(2)).exp()
}

/// `2Lm/λ²`.
pub fn mbound(big_l: f64, m: usize, lambda: f64) -> f64 {
    2.0 * big_l * m as f64 / (lambda * lambda)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TechReport {
    pub f: f64,
    pub g: f64,
    pub pass: bool,
}

/// `f = Σ_i p_i Π_{j<i} (1−p_j)^{−1}` against `g − 1 = Π_i (1−p_i)^{−1} − 1`.
pub fn tech_inequality(p: &[f64]) -> Result<TechReport> {
    if p.iter().any(|&x| !(0.0..1.0).contains(&x)) {
        return Err(Error::Precondition("entries must lie in [0, 1)".into()));
    }
    let mut f = 0.0;
    let mut prefix = 1.0;
    for &x in p {
        f += x * prefix;
        prefix /= 1.0 - x;
    }
    let g = prefix;
    Ok(TechReport {
        f,
        g,
        pass: f <= g - 1.0 + 1e-12 * g.max(1.0),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailRow {
    pub theta: f64,
    /// Two-sided Azuma, `2·exp(−η²/(2kL²))`.
    pub azuma: f64,
    pub alltime: f64,
    pub check: TailCheck,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub m: usize,
    pub lambda: f64,
    pub k: f64,
    pub steps: usize,
    pub increment_bound: f64,
    pub max_increment: f64,
    pub increment_pass: bool,
    pub mbound: f64,
    /// Per trace `Σ_i Σ_{v : i−1 < T_v∧r_v} 2φ(x_{i−1},v)ξ_{i−1}^v`.
    pub totals: Vec<f64>,
    pub max_total: f64,
    pub mbound_pass: bool,
    pub coverage_pass: bool,
    pub mean_final: f64,
    pub tails: Vec<TailRow>,
}

fn increment_total(
    m: &MarkovChain,
    trace: &WalkTrace,
    spec: &XiSpec,
) -> Result<(f64, super::xi::MartingaleTrace)> {
    let mt = build_xi(m, trace, spec)?;
    let mut total = 0.0;
    for i in 1..trace.states.len() {
        let x = trace.states[i - 1];
        for (j, &v) in spec.targets.iter().enumerate() {
            let open_hit = mt.hit[j].is_none_or(|h| h > i - 1);
            let open_r = mt.r[j].is_none_or(|r| r > i - 1);
            if open_hit && open_r {
                total += 2.0 * m.prob(x, v) * mt.xi_v[j][i - 1];
            }
        }
    }
    Ok((total, mt))
}

/// Bookkeeping over a batch of walks: Mbound totals, increment and coverage
/// bounds, and empirical `Pr(|ξ_M − m| > ϑm)` against Azuma and the all-time bound.
pub fn concentration_report(
    m: &MarkovChain,
    traces: &[WalkTrace],
    spec: &XiSpec,
    thetas: &[f64],
) -> Result<ConcentrationReport> {
    if traces.is_empty() {
        return Err(Error::Precondition("no traces".into()));
    }
    let results: Vec<(f64, f64, bool, f64)> = traces
        .par_iter()
        .map(|t| {
            let (total, mt) = increment_total(m, t, spec)?;
            Ok((
                total,
                mt.max_increment,
                mt.coverage_bound_holds(),
                *mt.xi.last().unwrap(),
            ))
        })
        .collect::<Result<_>>()?;
    let mw = spec.m();
    let big_l = spec.big_l();
    let increment_bound = spec.increment_bound();
    let bound_m = mbound(big_l, mw, spec.lambda);
    let totals: Vec<f64> = results.iter().map(|r| r.0).collect();
    let max_total = totals.iter().copied().fold(0.0, f64::max);
    let max_increment = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let finals: Vec<f64> = results.iter().map(|r| r.3).collect();
    let steps = traces
        .iter()
        .map(WalkTrace::steps)
        .max()
        .unwrap_or(0)
        .max(1);
    let center = mw as f64;
    let tails = thetas
        .iter()
        .map(|&theta| {
            let azuma = 2.0 * azuma_bound(steps, increment_bound, theta * center);
            let alltime = alltime_bound(theta, spec.lambda, big_l, mw);
            let check =
                empirical_tail_vs_bound(&finals, center, theta * center, azuma.min(alltime))?;
            Ok(TailRow {
                theta,
                azuma,
                alltime,
                check,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ConcentrationReport {
        m: mw,
        lambda: spec.lambda,
        k: spec.k,
        steps,
        increment_bound,
        max_increment,
        increment_pass: max_increment <= increment_bound * (1.0 + 1e-12),
        mbound: bound_m,
        mbound_pass: max_total <= bound_m + 1e-9,
        totals,
        max_total,
        coverage_pass: results.iter().all(|r| r.2),
        mean_final: finals.iter().sum::<f64>() / finals.len() as f64,
        tails,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::mc::simulate_replica;
    use crate::StartRule;
    use std::f64::consts::E;

    #[test]
    fn formula_values() {
        assert!((azuma_bound(8, 1.0, 4.0) - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(azuma_bound(3, 2.0, 0.0), 1.0);
        assert!((azuma_bound(100, 2.0, 40.0) - (-2f64).exp()).abs() < 1e-15);
        assert!((mbound(E, 1, 0.5) - 8.0 * E).abs() < 1e-12);
        let a = alltime_bound(1.0, 1.0, E, 64);
        assert!((a - 2.0 * (-1.0 / (E * E)).exp()).abs() < 1e-12);
        assert!(a > 1.0);
    }

    #[test]
    fn tech_examples() {
        let r = tech_inequality(&[0.5, 0.5]).unwrap();
        assert_eq!((r.f, r.g - 1.0), (1.5, 3.0));
        let e = tech_inequality(&[]).unwrap();
        assert_eq!((e.f, e.g), (0.0, 1.0));
        assert!(e.pass && r.pass);
        let q = tech_inequality(&[0.3]).unwrap();
        assert!((q.f - 0.3).abs() < 1e-15 && q.g - 1.0 >= q.f);
        assert!(tech_inequality(&[1.0]).is_err());
    }

    #[test]
    fn p5_report_is_consistent() {
        let m = MarkovChain::random_walk(&generators::path(5)).unwrap();
        let spec = XiSpec::new(&m, &[0, 4], 1.0).unwrap();
        let traces: Vec<WalkTrace> = (0..200)
            .map(|r| simulate_replica(&m, &StartRule::Vertex(2), 40, 11, r).unwrap())
            .collect();
        let rep = concentration_report(&m, &traces, &spec, &[0.5, 1.0, 2.0]).unwrap();
        assert!(rep.mbound_pass && rep.increment_pass && rep.coverage_pass);
        assert!(rep.tails.iter().all(|t| t.check.pass));
    }

    #[test]
    fn immediate_cover_counts_only_the_first_step() {
        let m = MarkovChain::random_walk(&generators::path(3)).unwrap();
        let spec = XiSpec::new(&m, &[0, 2], 1.0).unwrap();
        let t = WalkTrace {
            states: vec![1, 0, 1, 2],
            seed: 0,
            chain_id: String::new(),
        };
        let (total, _) = increment_total(&m, &t, &spec).unwrap();
        // Step 1 from b: both targets open, 2·(1/2)·1 each. Step 2 from a: only
        // the right end is open, φ(a, c) = 0. Step 3 from b: 2·(1/2)·ξ_2^c = 2·(1/2)·2.
        assert!((total - 4.0).abs() < 1e-12, "{total}");
    }
}
