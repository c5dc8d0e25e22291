//! Acceptance criteria, one line per criterion.
//!
//! Runs as a plain binary so the lines are always visible in `cargo test`
//! output. Exits nonzero if a criterion fails for a reason other than a
//! documented conflict in the decisions ledger.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use covertime_core::exact::{
    ball_sets, check_return_inequalities, cover_probability, cover_probability_exact, degree_split,
    expander_bounds, induced_chain, spectral_gap,
};
use covertime_core::martingale::{
    assoc_bound, build_xi, check_martingale_step, concentration_report, martingale_step,
    asymptotic_params, super_martingale_s, tech_inequality, XiSpec, XiState,
};
use covertime_core::mc::{estimate_cover, simulate_replica};
use covertime_core::partition::{
    far_bound, keep_large, tree_safe_partition, verify_cor_p, DeltaThreshold,
};
use covertime_core::rational::ExactChain;
use covertime_core::{generators, Error, Graph, MarkovChain, StartRule, GAMMA};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Verdict {
    pass: bool,
    detail: String,
    /// Set when a failure is fully accounted for by a ledger entry.
    conflict: Option<String>,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict {
        pass,
        detail,
        conflict: None,
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (1u32..(1 << items.len()))
        .map(|mask| {
            (0..items.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| items[i])
                .collect()
        })
        .collect()
}

fn spec_or_skip(m: &MarkovChain, targets: &[usize], k: f64) -> Option<XiSpec> {
    match XiSpec::new(m, targets, k) {
        Ok(s) => Some(s),
        Err(Error::DegenerateLambda { .. }) => None,
        Err(e) => panic!("unexpected error building the process: {e}"),
    }
}

/// Per-depth covered mass by walk enumeration, with and without `X_0`.
struct Enumerated {
    float_inc: Vec<f64>,
    float_exc: Vec<f64>,
    exact_inc: Vec<BigRational>,
    exact_exc: Vec<BigRational>,
}

fn enumerate_cover(m: &MarkovChain, c: &ExactChain, start: usize, depth: usize) -> Enumerated {
    let full = (1u32 << m.n()) - 1;
    let mut out = Enumerated {
        float_inc: vec![0.0; depth + 1],
        float_exc: vec![0.0; depth + 1],
        exact_inc: vec![BigRational::zero(); depth + 1],
        exact_exc: vec![BigRational::zero(); depth + 1],
    };
    #[allow(clippy::too_many_arguments)]
    fn go(
        m: &MarkovChain,
        c: &ExactChain,
        x: usize,
        l: usize,
        depth: usize,
        with_start: u32,
        without: u32,
        p: f64,
        q: &BigRational,
        full: u32,
        out: &mut Enumerated,
    ) {
        if with_start == full {
            out.float_inc[l] += p;
            out.exact_inc[l] += q;
        }
        if without == full {
            out.float_exc[l] += p;
            out.exact_exc[l] += q;
        }
        if l == depth {
            return;
        }
        for ((y, pf), (y2, pq)) in m.row(x).iter().zip(&c.rows()[x]) {
            assert_eq!(y, y2);
            let bit = 1 << y;
            go(m, c, *y, l + 1, depth, with_start | bit, without | bit, p * pf, &(q * pq), full, out);
        }
    }
    go(m, c, start, 0, depth, 1 << start, 0, 1.0, &BigRational::one(), full, &mut out);
    out
}

fn criterion_1() -> Verdict {
    let cases: Vec<(Graph, usize)> = (2..=5)
        .flat_map(generators::all_connected)
        .flat_map(|g| (0..g.n()).map(move |s| (g.clone(), s)))
        .collect();
    let results: Vec<(usize, usize)> = cases
        .par_iter()
        .map(|(g, start)| {
            let m = MarkovChain::random_walk(g).unwrap();
            let c = ExactChain::random_walk(g).unwrap();
            let all: Vec<usize> = (0..g.n()).collect();
            let e = enumerate_cover(&m, &c, *start, 8);
            let mut checks = 0;
            let mut bad = 0;
            for len in 0..=8 {
                for inc in [false, true] {
                    let dp = cover_probability(&m, &StartRule::Vertex(*start), &all, len, inc).unwrap();
                    let ex = cover_probability_exact(&c, *start, &all, len, inc).unwrap();
                    let (bf, bq) = if inc {
                        (e.float_inc[len], &e.exact_inc[len])
                    } else {
                        (e.float_exc[len], &e.exact_exc[len])
                    };
                    checks += 2;
                    bad += usize::from((dp - bf).abs() > 1e-12);
                    bad += usize::from(&ex != bq);
                }
            }
            (checks, bad)
        })
        .collect();
    let checks: usize = results.iter().map(|r| r.0).sum();
    let bad: usize = results.iter().map(|r| r.1).sum();
    verdict(
        bad == 0,
        format!("{} (graph, start) pairs, M ≤ 8, {checks} comparisons, {bad} mismatches", cases.len()),
    )
}

fn criterion_2() -> Verdict {
    let c = 2.0f64;
    let target = -(1.0 - (-c).exp()).ln();
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for n in [8usize, 10, 12] {
        let m = MarkovChain::random_walk(&generators::complete(n)).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let p = cover_probability(&m, &StartRule::Vertex(0), &all, (c as usize) * n, false).unwrap();
        let dev = (-p.ln() / n as f64 - target).abs();
        worst = worst.max(dev);
        parts.push(format!("n={n}: {dev:.4}"));
    }
    verdict(
        worst <= 0.05,
        format!("|rate − {target:.4}| {} (tolerance 0.05)", parts.join(", ")),
    )
}

/// Step checks at every history of length ≤ `depth` from `x0`.
fn exhaustive_steps(m: &MarkovChain, spec: &XiSpec, x0: usize, depth: usize) -> (u64, u64) {
    fn go(m: &MarkovChain, spec: &XiSpec, s: &XiState, left: usize, acc: &mut (u64, u64)) {
        let c = martingale_step(m, spec, s);
        acc.0 += 1;
        acc.1 += u64::from(!c.pass);
        if left == 0 {
            return;
        }
        for &(y, _) in m.row(s.current) {
            go(m, spec, &s.advanced(m, spec, y), left - 1, acc);
        }
    }
    let mut acc = (0, 0);
    go(m, spec, &XiState::start(m, spec, x0), depth, &mut acc);
    acc
}

/// `Σ p·ξ_l` over all walks, for each `l ≤ depth`.
fn expected_xi(m: &MarkovChain, spec: &XiSpec, x0: usize, depth: usize) -> Vec<f64> {
    fn go(m: &MarkovChain, spec: &XiSpec, s: &XiState, p: f64, left: usize, out: &mut Vec<f64>) {
        out[s.time] += p * s.xi();
        if left == 0 {
            return;
        }
        for &(y, q) in m.row(s.current) {
            go(m, spec, &s.advanced(m, spec, y), p * q, left - 1, out);
        }
    }
    let mut out = vec![0.0; depth + 1];
    go(m, spec, &XiState::start(m, spec, x0), 1.0, depth, &mut out);
    out
}

fn random_weighted_chain(r: &mut ChaCha8Rng, n: usize, seed: u64) -> MarkovChain {
    let g = generators::random_connected(n, r.random_range(0.3..0.8), seed).unwrap();
    let rows = (0..n)
        .map(|u| {
            let w: Vec<f64> = g.neighbors(u).iter().map(|_| r.random_range(0.1..1.0)).collect();
            let total: f64 = w.iter().sum();
            g.neighbors(u).iter().zip(&w).map(|(&v, &x)| (v, x / total)).collect()
        })
        .collect();
    MarkovChain::new(rows).unwrap()
}

fn criterion_3() -> Verdict {
    let graphs: Vec<Graph> = (2..=5).flat_map(generators::all_connected).collect();

    // Exhaustive step checks.
    let (steps, step_fail, skipped) = graphs
        .par_iter()
        .map(|g| {
            let m = MarkovChain::random_walk(g).unwrap();
            let all: Vec<usize> = (0..g.n()).collect();
            let mut acc = (0u64, 0u64, 0u64);
            for w in subsets(&all).into_iter().filter(|w| w.len() < g.n()) {
                let Some(spec) = spec_or_skip(&m, &w, 1.0) else {
                    acc.2 += 1;
                    continue;
                };
                for x0 in (0..g.n()).filter(|x| !w.contains(x)) {
                    let (c, f) = exhaustive_steps(&m, &spec, x0, 6);
                    acc.0 += c;
                    acc.1 += f;
                }
            }
            acc
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));

    // Random larger instances, half of them non-reversible weighted chains.
    let mut r = rng(3);
    let mut random_fail = 0;
    let mut random_done = 0;
    while random_done < 1000 {
        let n = r.random_range(6..=10);
        let seed = r.random::<u64>();
        let m = if random_done % 2 == 0 {
            MarkovChain::random_walk(&generators::random_connected(n, r.random_range(0.3..0.8), seed).unwrap())
                .unwrap()
        } else {
            random_weighted_chain(&mut r, n, seed)
        };
        let size = r.random_range(1..=3);
        let mut w: Vec<usize> = (1..n).collect();
        for i in 0..size {
            let j = r.random_range(i..w.len());
            w.swap(i, j);
        }
        w.truncate(size);
        w.sort();
        let Some(spec) = spec_or_skip(&m, &w, r.random_range(0.2..3.0)) else { continue };
        let len = r.random_range(0..=20);
        let t = simulate_replica(&m, &StartRule::Vertex(0), len, seed, 0).unwrap();
        random_fail += usize::from(!check_martingale_step(&m, &t.states, &spec).unwrap().pass);
        random_done += 1;
    }

    // E ξ_l = m for every l ≤ 8.
    let (mean_cases, mean_worst) = graphs
        .par_iter()
        .map(|g| {
            let m = MarkovChain::random_walk(g).unwrap();
            let rest: Vec<usize> = (1..g.n()).collect();
            let mut acc = (0usize, 0.0f64);
            for w in subsets(&rest) {
                let Some(spec) = spec_or_skip(&m, &w, 1.0) else { continue };
                for e in expected_xi(&m, &spec, 0, 8) {
                    acc.1 = acc.1.max((e - w.len() as f64).abs());
                }
                acc.0 += 1;
            }
            acc
        })
        .reduce(|| (0, 0.0), |a, b| (a.0 + b.0, a.1.max(b.1)));

    // Increment bound over sampled steps.
    let mut sampled = 0usize;
    let mut inc_fail = 0usize;
    let mut seed = 0u64;
    while sampled < 100_000 {
        let g = generators::random_connected(8, 0.4, seed).unwrap();
        let m = MarkovChain::random_walk(&g).unwrap();
        seed += 1;
        let Some(spec) = spec_or_skip(&m, &[3, 5, 7], 1.0) else { continue };
        for rep in 0..50 {
            let t = simulate_replica(&m, &StartRule::Vertex(0), 100, seed, rep).unwrap();
            let mt = build_xi(&m, &t, &spec).unwrap();
            inc_fail += usize::from(mt.max_increment > spec.increment_bound() * (1.0 + 1e-12));
            sampled += 100;
        }
    }

    let pass = step_fail == 0 && random_fail == 0 && mean_worst <= 1e-10 && inc_fail == 0 && steps > 0;
    verdict(
        pass,
        format!(
            "exhaustive {steps} steps ({step_fail} fail, {skipped} target sets with λ = 0 skipped); \
             {random_done} random instances ({random_fail} fail); E ξ_l over {mean_cases} sets, max |E ξ − m| = {mean_worst:.2e}; \
             {sampled} sampled steps ({inc_fail} traces over L/λ²)"
        ),
    )
}

fn criterion_4() -> Verdict {
    let ks = [std::f64::consts::LN_2, 1.0, 2.0];
    let mut r = rng(4);
    let mut jobs = Vec::new();
    while jobs.len() < 240 {
        let n = r.random_range(4..=8);
        let seed = r.random::<u64>();
        let g = generators::random_connected(n, r.random_range(0.3..0.8), seed).unwrap();
        let m = MarkovChain::random_walk(&g).unwrap();
        let size = r.random_range(1..=4.min(n - 1));
        let mut w: Vec<usize> = (1..n).collect();
        for i in 0..size {
            let j = r.random_range(i..w.len());
            w.swap(i, j);
        }
        w.truncate(size);
        w.sort();
        let k = ks[jobs.len() % 3];
        let Some(spec) = spec_or_skip(&m, &w, k) else { continue };
        let isize = r.random_range(1..=3.min(w.len()));
        let subset: Vec<usize> = w[..isize].to_vec();
        let horizon = r.random_range(6..=16);
        jobs.push((m, spec, subset, horizon, seed));
    }
    let results: Vec<(bool, bool, usize)> = jobs
        .par_iter()
        .map(|(m, spec, subset, horizon, seed)| {
            let rep = assoc_bound(m, &StartRule::Vertex(0), spec, subset, *horizon).unwrap();
            let mut steps = 0;
            let mut sup = true;
            for walk in 0..20 {
                let t = simulate_replica(m, &StartRule::Vertex(0), *horizon, *seed, walk).unwrap();
                let s = super_martingale_s(m, &t, subset, spec).unwrap();
                steps += s.steps.len();
                sup &= s.all_pass;
            }
            (rep.pass && rep.star_below, sup, steps)
        })
        .collect();
    let assoc_fail = results.iter().filter(|r| !r.0).count();
    let sup_fail = results.iter().filter(|r| !r.1).count();
    let steps: usize = results.iter().map(|r| r.2).sum();
    verdict(
        assoc_fail == 0 && sup_fail == 0,
        format!(
            "{} instances (n ≤ 8, M ≤ 16, |I| ≤ 3, K ∈ {{ln 2, 1, 2}}): {assoc_fail} over p^|I| or Q* above Q; \
             {steps} supermartingale steps, {sup_fail} instances failing",
            jobs.len()
        ),
    )
}

fn reversible_weighted(r: &mut ChaCha8Rng, n: usize, seed: u64) -> MarkovChain {
    let g = generators::random_connected(n, r.random_range(0.3..0.8), seed).unwrap();
    let mut weight = vec![vec![0.0; n]; n];
    for &(u, v) in g.edges() {
        let x = r.random_range(0.1..2.0);
        weight[u][v] = x;
        weight[v][u] = x;
    }
    let rows = weight
        .iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            row.iter()
                .enumerate()
                .filter(|(_, &x)| x > 0.0)
                .map(|(v, &x)| (v, x / total))
                .collect()
        })
        .collect();
    MarkovChain::new(rows).unwrap()
}

fn criterion_5() -> Verdict {
    let mut report = Vec::new();
    let mut violations = 0usize;

    // Return inequalities on 200 reversible chains.
    let mut r = rng(51);
    let mut checks = 0;
    let mut v_ret = 0;
    for i in 0..200u64 {
        let n = r.random_range(3..=10);
        let m = if i % 2 == 0 {
            MarkovChain::random_walk(&generators::random_connected(n, r.random_range(0.3..0.8), i).unwrap()).unwrap()
        } else {
            reversible_weighted(&mut r, n, i)
        };
        for _ in 0..10 {
            let (v, w) = (r.random_range(0..n), r.random_range(0..n));
            let (t, s) = (r.random_range(0..=8), r.random_range(0..=8));
            let c = check_return_inequalities(&m, v, w, t, s).unwrap();
            v_ret += usize::from(!c.pass_cauchy_schwarz) + usize::from(!c.pass_monotone);
            checks += 2;
        }
    }
    violations += v_ret;
    report.push(format!("return/mono {v_ret}/{checks}"));

    // Far bound on every pair of 60 random trees.
    let far = (0..60u64)
        .into_par_iter()
        .map(|seed| {
            let g = generators::random_tree(5 + (seed as usize % 30), seed);
            let mut acc = (0usize, 0usize);
            for v in 0..g.n() {
                for w in (0..g.n()).filter(|&w| w != v) {
                    acc.0 += 1;
                    acc.1 += usize::from(!far_bound(&g, v, w).unwrap().pass);
                }
            }
            acc
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    violations += far.1;
    report.push(format!("far {}/{}", far.1, far.0));

    // Tech inequality on 10^4 vectors.
    let mut r = rng(52);
    let mut v_tech = 0;
    for _ in 0..10_000 {
        let len = r.random_range(0..=20);
        let p: Vec<f64> = (0..len).map(|_| r.random_range(0.0..=0.99)).collect();
        v_tech += usize::from(!tech_inequality(&p).unwrap().pass);
    }
    violations += v_tech;
    report.push(format!("tech {v_tech}/10000"));

    // Tail and hitting bounds on random cubic expanders.
    let mut r = rng(53);
    let mut exp_checks = 0;
    let mut v_tail = 0;
    let mut v_hit = 0;
    for i in 0..6u64 {
        let n = if i % 2 == 0 { 50 } else { 80 };
        let g = generators::random_regular(n, 3, i).unwrap();
        let m = MarkovChain::random_walk(&g).unwrap();
        let eps = spectral_gap(&m).unwrap().spectral_eps() * 0.99;
        for _ in 0..3 {
            let size = r.random_range(1..=5);
            let mut set: Vec<usize> = (0..size).map(|_| r.random_range(0..n)).collect();
            set.sort();
            set.dedup();
            for t in 0..=60 {
                let b = expander_bounds(&m, &set, t, eps).unwrap();
                v_tail += usize::from(!b.tail_pass);
                v_hit += usize::from(!b.hitting_pass);
                exp_checks += 1;
            }
        }
    }
    violations += v_tail + v_hit;
    report.push(format!("tail {v_tail}/{exp_checks}, hitting {v_hit}/{exp_checks}"));

    // High/low degree mass bound.
    let mut r = rng(54);
    let mut split_checks = 0;
    let mut v_split = 0;
    for i in 0..100u64 {
        let n = r.random_range(8..=20);
        let g = generators::random_connected(n, r.random_range(0.15..0.7), i).unwrap();
        let degs = g.degrees();
        let (lo, hi) = (*degs.iter().min().unwrap(), *degs.iter().max().unwrap());
        let small = r.random_range(lo..=hi);
        let big = r.random_range(small..=hi);
        for t in 0..=10 {
            v_split += usize::from(!degree_split(&g, big, small, t).unwrap().pass);
            split_checks += 1;
        }
    }
    violations += v_split;
    report.push(format!("degree split {v_split}/{split_checks}"));

    // Ball symmetry by degree.
    let mut r = rng(55);
    let mut sym_checks = 0;
    let mut v_sym = 0;
    for i in 0..100u64 {
        let n = r.random_range(3..=10);
        let g = generators::random_connected(n, r.random_range(0.2..0.8), i).unwrap();
        let m = MarkovChain::random_walk(&g).unwrap();
        let radius = r.random_range(1..=10);
        let delta = r.random_range(0.05..1.5);
        let balls: Vec<_> = (0..n).map(|v| ball_sets(&m, v, radius, delta).unwrap()).collect();
        for v in 0..n {
            for w in (0..n).filter(|&w| w != v) {
                if g.degree(w) >= g.degree(v) && balls[w].contains_before_return(v) {
                    sym_checks += 1;
                    v_sym += usize::from(!balls[v].contains_before_return(w));
                }
            }
        }
    }
    violations += v_sym;
    report.push(format!("ball symmetry {v_sym}/{sym_checks}"));

    verdict(violations == 0, format!("violations: {}", report.join(", ")))
}

fn criterion_6() -> Verdict {
    let mut r = rng(6);
    let sizes: Vec<(u64, usize)> = (0..100u64).map(|s| (s, r.random_range(10..=300))).collect();
    struct Run {
        k_ok: bool,
        safe: bool,
        pass: bool,
        tie_only: bool,
    }
    let runs: Vec<Run> = sizes
        .par_iter()
        .flat_map_iter(|&(seed, n)| {
            let g = generators::random_tree(n, seed);
            let m = MarkovChain::random_walk(&g).unwrap();
            [0.5, 1.0 / 3.0].into_iter().map(move |delta| {
                let p = tree_safe_partition(&g, delta, 0).unwrap();
                let t = (1.0 / delta).round();
                let k = p.blocks.len();
                let k_ok = k as f64 <= (t + 1.0) * t.powf(t + 1.0);
                let safe = p
                    .blocks
                    .iter()
                    .all(|b| induced_chain(&m, b).unwrap().max_pairwise() <= delta + 1e-12);
                let theta = 1.0 / (2.0 * k as f64);
                let kept = keep_large(&p, theta).unwrap();
                let v = verify_cor_p(&m, &kept, 1.0, theta, DeltaThreshold::Constant(delta)).unwrap();
                // The only admissible failures: transitions exactly at δ and blocks exactly at ϑn.
                let tie_only = v.v0_small
                    && v.designated_large
                    && v.per_block.iter().all(|b| {
                        (b.small_transitions || (b.max_into_designated - delta).abs() <= 1e-12)
                            && (b.large || b.size * 2 * k == n)
                    });
                Run {
                    k_ok,
                    safe,
                    pass: v.pass,
                    tie_only,
                }
            })
        })
        .collect();
    let total = runs.len();
    let k_ok = runs.iter().filter(|r| r.k_ok).count();
    let safe = runs.iter().filter(|r| r.safe).count();
    let passed = runs.iter().filter(|r| r.pass).count();
    let explained = runs.iter().filter(|r| r.pass || r.tie_only).count();
    let pass = k_ok == total && safe == total && passed == total;
    let conflict = (!pass && k_ok == total && safe == total && explained == total).then(|| {
        format!(
            "{} of {total} verifier failures are exact ties (max φ = δ against the strict \
             transition condition, or |V_i| = ϑn against the strict size condition)",
            total - passed
        )
    });
    Verdict {
        pass,
        detail: format!(
            "{total} runs (100 trees, n ≤ 300, δ ∈ {{1/2, 1/3}}): class bound {k_ok}/{total}, \
             exact safety {safe}/{total}, partition verifier {passed}/{total}"
        ),
        conflict,
    }
}

fn criterion_7() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, g, w, x0) in [
        ("P5", generators::path(5), vec![0, 4], 2),
        ("K6", generators::complete(6), vec![0, 1], 2),
    ] {
        let m = MarkovChain::random_walk(&g).unwrap();
        let spec = XiSpec::new(&m, &w, 1.0).unwrap();
        let traces: Vec<_> = (0..100_000u64)
            .into_par_iter()
            .map(|rep| simulate_replica(&m, &StartRule::Vertex(x0), 64, 7, rep).unwrap())
            .collect();
        let rep = concentration_report(&m, &traces, &spec, &[0.5, 1.0, 2.0]).unwrap();
        let tails_ok = rep.tails.iter().all(|t| t.check.pass);
        pass &= tails_ok && rep.mbound_pass && rep.increment_pass;
        let tails: Vec<String> = rep
            .tails
            .iter()
            .map(|t| format!("ϑ={}: {:.4} ≤ {:.4}", t.theta, t.check.frequency, t.check.bound))
            .collect();
        parts.push(format!(
            "{name}: {}; max total {:.3} ≤ {:.3}",
            tails.join(", "),
            rep.max_total,
            rep.mbound
        ));
    }
    verdict(pass, parts.join(" | "))
}

fn criterion_8() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, g, start, horizon) in [
        ("P3", generators::path(3), 1usize, 3usize),
        ("K4", generators::complete(4), 0, 6),
    ] {
        let m = MarkovChain::random_walk(&g).unwrap();
        let all: Vec<usize> = (0..g.n()).collect();
        let start = StartRule::Vertex(start);
        let exact = cover_probability(&m, &start, &all, horizon, true).unwrap();
        let hits = (0..100u64)
            .filter(|&seed| {
                estimate_cover(&m, &start, &all, horizon, 2000, seed, true)
                    .unwrap()
                    .contains(exact)
            })
            .count();
        pass &= hits >= 95;
        parts.push(format!("{name} (exact {exact:.6}): {hits}/100"));
    }
    verdict(pass, parts.join(", "))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_covertime")
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Stdout with the wall-clock line removed, plus the exit status.
fn run_cli(args: &[String], threads: Option<&str>) -> (bool, String) {
    let mut cmd = Command::new(bin());
    cmd.args(args).arg("--quiet");
    match threads {
        Some(t) => cmd.env("COVERTIME_THREADS", t),
        None => cmd.env_remove("COVERTIME_THREADS"),
    };
    let out = cmd.output().expect("binary runs");
    let text = String::from_utf8(out.stdout).expect("utf-8 output");
    let payload = text
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"duration_ms\""))
        .collect::<Vec<_>>()
        .join("\n");
    (out.status.success(), payload)
}

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let file = |name: &str| -> String { dir.path().join(name).to_string_lossy().into_owned() };
    let cubic = file("cubic.edges");
    std::fs::write(&cubic, generators::random_regular(40, 3, 1).unwrap().to_text()).unwrap();
    let quartic = file("quartic.edges");
    std::fs::write(&quartic, generators::random_regular(30, 4, 2).unwrap().to_text()).unwrap();
    let tree_out = file("tree.json");
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<String>>();
    let (p3, path10, k4) = (fixture("p3.edges"), fixture("path10.edges"), fixture("k4.edges"));
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("cover exact", s(&["cover", "--graph", &p3, "--start", "1", "--horizon", "3", "--exact", "--include-start"])),
        ("cover rational", s(&["cover", "--graph", &p3, "--start", "1", "--horizon", "3", "--exact", "--rational", "--include-start"])),
        ("cover mc", s(&["cover", "--graph", &p3, "--start", "1", "--horizon", "3", "--mc", "20000", "--seed", "7", "--include-start"])),
        ("partition tree", s(&["partition", "tree", "--graph", &path10, "--delta", "0.5", "--out", &tree_out])),
        ("partition recurrent", s(&["partition", "recurrent", "--graph", &k4, "--delta", "0.5", "--horizon", "3", "--theta", "0.1"])),
        ("partition expander", s(&["partition", "expander", "--graph", &cubic, "--delta", "0.3", "--seed", "3"])),
        ("partition generic", s(&["partition", "generic", "--graph", &quartic, "--delta", "0.4", "--k-exp", "2", "--seed", "5"])),
        ("partition verify", s(&["partition", "verify", "--partition", &tree_out, "--C", "2", "--theta", "0.02", "--delta-fun", "0.5"])),
        ("martingale", s(&["martingale", "--graph", &p3, "--W", "2", "--K", "1", "--walks", "1000", "--seed", "0"])),
        ("spectral", s(&["spectral", "--graph", &k4, "--set", "0", "--t", "5"])),
        ("params", s(&["params", "--C", "1", "--beta", "0.1", "--lambda", "1", "--m", "1000"])),
    ];
    let mut failed = Vec::new();
    for (name, args) in &commands {
        let (ok1, a) = run_cli(args, None);
        let (ok2, b) = run_cli(args, None);
        let (ok3, c) = run_cli(args, Some("1"));
        if !(ok1 && ok2 && ok3 && a == b && a == c && !a.is_empty()) {
            failed.push(*name);
        }
    }
    verdict(
        failed.is_empty(),
        format!(
            "{} commands rerun twice and once single-threaded; differing: {:?}",
            commands.len(),
            failed
        ),
    )
}

fn criterion_10() -> Verdict {
    let e = std::f64::consts::E;
    let mut worst = 0.0f64;
    let mut cases = 0;
    let mut rel = |got: f64, want: f64| {
        worst = worst.max((got - want).abs() / want.abs().max(1e-300));
    };
    for c in [1.0, 2.0, 10.0, 100.0, 1e4] {
        for beta in [0.5, 0.1, 1e-3, 1e-100, 1e-300] {
            for lambda in [1.0, 0.5, 0.01] {
                let p = asymptotic_params(c, beta, lambda).unwrap();
                let k = (20.0 * e * (64.0 + c)).powi(2).max((1.0 / beta).ln());
                // δ = ε/K with ε = λe^{−K}/5, so 1/δ = 5Ke^K/λ.
                let log_inv_delta = 5f64.ln() + k.ln() + k - lambda.ln();
                let log_rho = GAMMA.ln() + k.ln() - 160f64.ln() - k;
                rel(p.k, k);
                rel(p.log_p, -k);
                rel(p.log_eps, lambda.ln() - 5f64.ln() - k);
                rel(p.log_delta, -log_inv_delta);
                rel(p.log_theta, -2.0 * log_inv_delta);
                rel(p.degree.log_d, log_inv_delta);
                rel(p.degree.log_rho, log_rho);
                rel(
                    p.degree.log_big_delta,
                    16f64.ln() + (beta * c).ln() + 2.0 * log_inv_delta - GAMMA.ln() - log_rho,
                );
                cases += 1;
            }
        }
    }
    verdict(
        worst <= 1e-9,
        format!("{cases} (C, β, λ) points, max relative error {worst:.2e}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("exact-oracle equivalence", criterion_1),
        ("complete-graph anchor", criterion_2),
        ("martingale suite", criterion_3),
        ("association suite", criterion_4),
        ("inequality suites", criterion_5),
        ("tree partition", criterion_6),
        ("concentration", criterion_7),
        ("Monte Carlo vs exact", criterion_8),
        ("determinism", criterion_9),
        ("parameter bookkeeping", criterion_10),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let v = run();
        let secs = started.elapsed().as_secs_f64();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {} ({secs:.1} s)", i + 1, v.detail);
        if v.pass {
            passed += 1;
        } else if let Some(c) = &v.conflict {
            println!("              documented conflict: {c}");
        } else {
            unexpected += 1;
        }
    }
    println!("acceptance: {passed}/10 pass, {unexpected} unexpected failures");
    if unexpected > 0 {
        std::process::exit(1);
    }
}
