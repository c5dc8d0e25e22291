//! The process `ξ_s = Σ_v ξ_s^v` with `ξ_s^v = 1{T_v > s∧r_v} / H_v(s∧r_v − 1)`.

use serde::{Deserialize, Serialize};

use crate::chain::{MarkovChain, WalkTrace};
use crate::error::{Error, Result};

/// Largest `K` for which `L = e^K` is used directly.
pub const MAX_K: f64 = 500.0;
/// Relative slack for exact one-step expectation checks.
pub const STEP_SLACK: f64 = 1e-9;

/// `λ = 1 − max{φ(v,w) : v ∈ V, v ≠ w ∈ W}`. With `exclude_pendant`, only
/// states with at least two distinct successors are considered.
pub fn lambda_of(m: &MarkovChain, targets: &[usize], exclude_pendant: bool) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::Precondition("target set must be nonempty".into()));
    }
    let mut in_w = vec![false; m.n()];
    for &w in targets {
        if w >= m.n() {
            return Err(Error::Precondition(format!("target {w} out of range")));
        }
        in_w[w] = true;
    }
    let mut worst = (0usize, 0usize, 0.0f64);
    for v in 0..m.n() {
        if exclude_pendant && m.out_degree(v) < 2 {
            continue;
        }
        for &(w, p) in m.row(v) {
            if w != v && in_w[w] && p > worst.2 {
                worst = (v, w, p);
            }
        }
    }
    let lambda = 1.0 - worst.2;
    if lambda <= 0.0 {
        return Err(Error::DegenerateLambda {
            from: worst.0,
            to: worst.1,
            prob: worst.2,
        });
    }
    Ok(lambda)
}

/// Target set with the constants `λ` and `K` of one analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiSpec {
    pub targets: Vec<usize>,
    pub lambda: f64,
    pub k: f64,
}

impl XiSpec {
    pub fn new(m: &MarkovChain, targets: &[usize], k: f64) -> Result<Self> {
        let lambda = lambda_of(m, targets, false)?;
        Self::with_lambda(m, targets, lambda, k)
    }

    pub fn with_lambda(m: &MarkovChain, targets: &[usize], lambda: f64, k: f64) -> Result<Self> {
        if !(k > 0.0 && k <= MAX_K) {
            return Err(Error::Precondition(format!("K = {k} outside (0, {MAX_K}]")));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Precondition(format!(
                "lambda = {lambda} outside (0, 1]"
            )));
        }
        let mut targets = targets.to_vec();
        targets.sort_unstable();
        targets.dedup();
        if targets.iter().any(|&w| w >= m.n()) {
            return Err(Error::Precondition("target out of range".into()));
        }
        Ok(XiSpec { targets, lambda, k })
    }

    pub fn m(&self) -> usize {
        self.targets.len()
    }

    pub fn big_l(&self) -> f64 {
        self.k.exp()
    }

    /// `λ/L`, the crossing level defining `r_v`.
    pub fn threshold(&self) -> f64 {
        self.lambda / self.big_l()
    }

    /// `L/λ²`, the bound on `|ξ_s − ξ_{s−1}|`.
    pub fn increment_bound(&self) -> f64 {
        self.big_l() / (self.lambda * self.lambda)
    }

    pub fn p(&self) -> f64 {
        (-self.k).exp()
    }

    pub fn position(&self, v: usize) -> Option<usize> {
        self.targets.binary_search(&v).ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Track {
    /// `H_v(s)`.
    h: f64,
    /// `H_v(s − 1)`.
    h_prev: f64,
    r: Option<usize>,
    /// `H_v(r_v − 1)` once `r_v` is known.
    h_at_cross: f64,
    hit: Option<usize>,
}

/// The per-target state of the process after observing `X_0..X_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct XiState {
    pub time: usize,
    pub current: usize,
    tracks: Vec<Track>,
}

impl XiState {
    pub fn start(m: &MarkovChain, spec: &XiSpec, x0: usize) -> Self {
        let thr = spec.threshold();
        let tracks = spec
            .targets
            .iter()
            .map(|&v| {
                let h = 1.0 - m.prob(x0, v);
                Track {
                    h,
                    h_prev: 1.0,
                    r: (h < thr).then_some(0),
                    h_at_cross: 1.0,
                    hit: (x0 == v).then_some(0),
                }
            })
            .collect();
        XiState {
            time: 0,
            current: x0,
            tracks,
        }
    }

    pub fn advance(&mut self, m: &MarkovChain, spec: &XiSpec, y: usize) {
        let s = self.time + 1;
        let thr = spec.threshold();
        for (t, &v) in self.tracks.iter_mut().zip(&spec.targets) {
            if y == v && t.hit.is_none() {
                t.hit = Some(s);
            }
            t.h_prev = t.h;
            t.h *= 1.0 - m.prob(y, v);
            if t.r.is_none() && t.h < thr {
                t.r = Some(s);
                t.h_at_cross = t.h_prev;
            }
        }
        self.time = s;
        self.current = y;
    }

    pub fn advanced(&self, m: &MarkovChain, spec: &XiSpec, y: usize) -> Self {
        let mut next = self.clone();
        next.advance(m, spec, y);
        next
    }

    /// `ξ_s^v` for the target at position `i`.
    pub fn xi_v(&self, i: usize) -> f64 {
        let t = &self.tracks[i];
        let cap = t.r.unwrap_or(self.time);
        if t.hit.is_some_and(|hit| hit <= cap) {
            return 0.0;
        }
        if t.r.is_some() {
            1.0 / t.h_at_cross
        } else {
            1.0 / t.h_prev
        }
    }

    pub fn xi(&self) -> f64 {
        (0..self.tracks.len()).map(|i| self.xi_v(i)).sum()
    }

    /// `S^I_s = Π_{v∈I} ξ_s^v` over target positions `subset`.
    pub fn s_product(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&i| self.xi_v(i)).product()
    }

    /// Whether `Q_v = {T_v > r_v}` is already decided, and how.
    pub fn q_status(&self, i: usize) -> Option<bool> {
        let t = &self.tracks[i];
        match (t.hit, t.r) {
            (Some(hit), Some(r)) => Some(hit > r),
            (Some(_), None) => Some(false),
            (None, Some(_)) => Some(true),
            (None, None) => None,
        }
    }

    /// Targets still able to change: not hit and not yet crossed.
    pub fn is_open(&self, i: usize) -> bool {
        self.tracks[i].hit.is_none() && self.tracks[i].r.is_none()
    }

    pub fn h(&self, i: usize) -> f64 {
        self.tracks[i].h
    }

    pub fn crossing(&self, i: usize) -> Option<usize> {
        self.tracks[i].r
    }

    pub fn hit_time(&self, i: usize) -> Option<usize> {
        self.tracks[i].hit
    }
}

/// Full per-step record of the process along one walk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MartingaleTrace {
    pub targets: Vec<usize>,
    pub m: usize,
    pub lambda: f64,
    pub k: f64,
    pub horizon: usize,
    /// `h[i][t] = H_v(t)` for target `i`.
    pub h: Vec<Vec<f64>>,
    pub r: Vec<Option<usize>>,
    pub hit: Vec<Option<usize>>,
    /// `xi_v[i][s] = ξ_s^v`.
    pub xi_v: Vec<Vec<f64>>,
    pub xi: Vec<f64>,
    pub q: Vec<Option<bool>>,
    pub r_event: Vec<bool>,
    pub q_star: Vec<bool>,
    /// First step at which every `Q_v` is decided, so `ξ` is frozen at `ξ_∞`.
    pub frozen_at: Option<usize>,
    pub max_increment: f64,
    pub covered: bool,
}

impl MartingaleTrace {
    pub fn q_star_count(&self) -> usize {
        self.q_star.iter().filter(|&&q| q).count()
    }

    /// If `W` is covered by `M`, then `ξ_M ≤ (L/λ)·#{v : Q_v^*}`.
    pub fn coverage_bound_holds(&self) -> bool {
        if !self.covered {
            return true;
        }
        let bound = self.k.exp() / self.lambda * self.q_star_count() as f64;
        *self.xi.last().unwrap() <= bound * (1.0 + STEP_SLACK)
    }
}

pub fn build_xi(m: &MarkovChain, trace: &WalkTrace, spec: &XiSpec) -> Result<MartingaleTrace> {
    let states = &trace.states;
    let x0 = *states
        .first()
        .ok_or_else(|| Error::Precondition("empty trace".into()))?;
    if spec.position(x0).is_some() {
        return Err(Error::Precondition(format!("walk starts inside W at {x0}")));
    }
    let mw = spec.m();
    let mut state = XiState::start(m, spec, x0);
    let mut h = vec![Vec::with_capacity(states.len()); mw];
    let mut xi_v = vec![Vec::with_capacity(states.len()); mw];
    let mut xi = Vec::with_capacity(states.len());
    let mut frozen_at = None;
    let mut record =
        |state: &XiState, h: &mut Vec<Vec<f64>>, xi_v: &mut Vec<Vec<f64>>, xi: &mut Vec<f64>| {
            let mut total = 0.0;
            for i in 0..mw {
                h[i].push(state.h(i));
                let x = state.xi_v(i);
                xi_v[i].push(x);
                total += x;
            }
            xi.push(total);
            if frozen_at.is_none() && (0..mw).all(|i| state.q_status(i).is_some()) {
                frozen_at = Some(state.time);
            }
        };
    record(&state, &mut h, &mut xi_v, &mut xi);
    for &y in &states[1..] {
        state.advance(m, spec, y);
        record(&state, &mut h, &mut xi_v, &mut xi);
    }
    let horizon = states.len() - 1;
    let r: Vec<Option<usize>> = (0..mw).map(|i| state.crossing(i)).collect();
    let hit: Vec<Option<usize>> = (0..mw).map(|i| state.hit_time(i)).collect();
    let q: Vec<Option<bool>> = (0..mw).map(|i| state.q_status(i)).collect();
    let r_event: Vec<bool> = r.iter().map(|r| r.is_some_and(|r| r <= horizon)).collect();
    let q_star = q
        .iter()
        .zip(&r_event)
        .map(|(q, &re)| re && *q == Some(true))
        .collect();
    let max_increment = xi
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    Ok(MartingaleTrace {
        targets: spec.targets.clone(),
        m: mw,
        lambda: spec.lambda,
        k: spec.k,
        horizon,
        covered: hit.iter().all(Option::is_some),
        h,
        r,
        hit,
        xi_v,
        xi,
        q,
        r_event,
        q_star,
        frozen_at,
        max_increment,
    })
}

/// `E[Y_{s+1} | X_0..X_s]` next to `Y_s`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StepCheck {
    pub expected_next: f64,
    pub current: f64,
    pub pass: bool,
}

fn state_after(m: &MarkovChain, spec: &XiSpec, history: &[usize]) -> Result<XiState> {
    let x0 = *history
        .first()
        .ok_or_else(|| Error::Precondition("empty history".into()))?;
    if spec.position(x0).is_some() {
        return Err(Error::Precondition(format!(
            "history starts inside W at {x0}"
        )));
    }
    let mut state = XiState::start(m, spec, x0);
    for &y in &history[1..] {
        state.advance(m, spec, y);
    }
    Ok(state)
}

/// Martingale property of `ξ` at the end of `history`, by exact one-step expectation.
pub fn check_martingale_step(
    m: &MarkovChain,
    history: &[usize],
    spec: &XiSpec,
) -> Result<StepCheck> {
    let state = state_after(m, spec, history)?;
    Ok(martingale_step(m, spec, &state))
}

pub fn martingale_step(m: &MarkovChain, spec: &XiSpec, state: &XiState) -> StepCheck {
    let current = state.xi();
    let expected_next: f64 = m
        .row(state.current)
        .iter()
        .map(|&(y, p)| p * state.advanced(m, spec, y).xi())
        .sum();
    StepCheck {
        expected_next,
        current,
        pass: (expected_next - current).abs() <= STEP_SLACK * current.max(1.0),
    }
}

/// One step of the `S^I` check; `tight` marks steps where equality is expected.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SuperStep {
    pub expected_next: f64,
    pub current: f64,
    pub tight: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuperMartingaleReport {
    pub subset: Vec<usize>,
    pub values: Vec<f64>,
    pub steps: Vec<SuperStep>,
    pub all_pass: bool,
}

pub fn super_step(
    m: &MarkovChain,
    spec: &XiSpec,
    state: &XiState,
    positions: &[usize],
) -> SuperStep {
    let current = state.s_product(positions);
    let expected_next: f64 = m
        .row(state.current)
        .iter()
        .map(|&(y, p)| p * state.advanced(m, spec, y).s_product(positions))
        .sum();
    let open = positions.iter().filter(|&&i| state.is_open(i)).count();
    let tight = current == 0.0 || open <= 1;
    let slack = STEP_SLACK * current.max(1.0);
    let pass =
        expected_next <= current + slack && (!tight || (expected_next - current).abs() <= slack);
    SuperStep {
        expected_next,
        current,
        tight,
        pass,
    }
}

/// `S_k^I = 1{∩_{v∈I} T_v > k∧r_v} Π_{v∈I} H_v(k∧r_v − 1)^{−1}` along a trace,
/// with the supermartingale inequality checked exactly at every step.
pub fn super_martingale_s(
    m: &MarkovChain,
    trace: &WalkTrace,
    subset: &[usize],
    spec: &XiSpec,
) -> Result<SuperMartingaleReport> {
    if subset.is_empty() {
        return Err(Error::Precondition("subset must be nonempty".into()));
    }
    let positions = subset
        .iter()
        .map(|&v| {
            spec.position(v)
                .ok_or_else(|| Error::Precondition(format!("{v} is not a target")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut state = state_after(m, spec, &trace.states[..1])?;
    let mut values = vec![state.s_product(&positions)];
    let mut steps = Vec::with_capacity(trace.steps());
    for &y in &trace.states[1..] {
        steps.push(super_step(m, spec, &state, &positions));
        state.advance(m, spec, y);
        values.push(state.s_product(&positions));
    }
    Ok(SuperMartingaleReport {
        subset: subset.to_vec(),
        all_pass: steps.iter().all(|s| s.pass),
        values,
        steps,
    })
}
