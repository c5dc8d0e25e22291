//! Safe colorings of trees: every color class has induced pairwise transition
//! probabilities at most `δ`.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Partition, Provenance};
use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::exact::induced_chain;
use crate::graph::Graph;

/// Slack when confirming `max φ_W ≤ δ` on computed induced chains.
pub const SAFETY_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FarBound {
    /// `Pr_v(T_w < T_v^+)`.
    pub exact: f64,
    /// `1/d(v,w)`.
    pub bound: f64,
    pub pass: bool,
}

pub fn far_bound(g: &Graph, v: usize, w: usize) -> Result<FarBound> {
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    if v == w || v >= g.n() || w >= g.n() {
        return Err(Error::Precondition("need two distinct vertices".into()));
    }
    let d = g.distances_from(v)[w].expect("trees are connected");
    let m = MarkovChain::random_walk(g)?;
    let exact = induced_chain(&m, &[v, w])?.prob(v, w);
    let bound = 1.0 / d as f64;
    Ok(FarBound {
        exact,
        bound,
        pass: exact <= bound + 1e-12,
    })
}

/// `⌈1/δ⌉`, robust to `1/δ` landing a hair above an integer.
pub fn level_period(delta: f64) -> usize {
    ((1.0 / delta) - 1e-9).ceil().max(1.0) as usize
}

/// Palette slot of a color inside one application of the level colouring:
/// `Some(j)` for the palette of relative level `j`, `None` for the terminal palette.
type Slot = (Option<usize>, usize);

/// Safe colouring of the targets at relative depth `t` below a common root.
/// `anc(x, j)` names the ancestor of target `x` at relative depth `j`.
fn color_level(targets: &[usize], t: usize, anc: &dyn Fn(usize, usize) -> i64) -> Vec<Slot> {
    let tt = (t as u64).saturating_pow(t as u32);
    let mut color: Vec<Option<Slot>> = vec![None; targets.len()];
    loop {
        let open: Vec<usize> = (0..targets.len()).filter(|&k| color[k].is_none()).collect();
        if open.len() as u64 <= tt {
            for (idx, &k) in open.iter().enumerate() {
                color[k] = Some((None, idx));
            }
            break;
        }
        let mut pick = None;
        for j in (0..t).rev() {
            let limit = (t as u64).saturating_pow((t - j) as u32);
            let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
            for &k in &open {
                groups.entry(anc(targets[k], j)).or_default().push(k);
            }
            if let Some((_, members)) = groups.into_iter().find(|(_, m)| m.len() as u64 > limit) {
                pick = Some((j, members));
                break;
            }
        }
        // The root always qualifies once more than t^t targets are open.
        let (j, members) = pick.expect("root qualifies");
        let mut by_child: BTreeMap<i64, VecDeque<usize>> = BTreeMap::new();
        for k in members {
            by_child
                .entry(anc(targets[k], j + 1))
                .or_default()
                .push_back(k);
        }
        let mut idx = 0;
        loop {
            let live: Vec<i64> = by_child
                .iter()
                .filter(|(_, q)| !q.is_empty())
                .map(|(&c, _)| c)
                .collect();
            if live.len() < t {
                break;
            }
            for c in live {
                let k = by_child.get_mut(&c).unwrap().pop_front().unwrap();
                color[k] = Some((Some(j), idx));
            }
            idx += 1;
        }
    }
    color.into_iter().map(|c| c.expect("all colored")).collect()
}

/// Partition of a tree into classes with `max φ_W(v,w) ≤ δ`, using at most
/// `(t+1)t^{t+1}` classes for `t = ⌈1/δ⌉`. Levels `i ≡ q (mod t)` share palette `q`.
pub fn tree_safe_partition(g: &Graph, delta: f64, root: usize) -> Result<Partition> {
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Precondition(format!("delta {delta} outside (0, 1]")));
    }
    let n = g.n();
    if root >= n {
        return Err(Error::Precondition(format!("root {root} out of range")));
    }
    let t = level_period(delta);
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut order = vec![root];
    let mut seen = vec![false; n];
    seen[root] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &w in g.neighbors(u) {
            if !seen[w] {
                seen[w] = true;
                parent[w] = u;
                depth[w] = depth[u] + 1;
                order.push(w);
            }
        }
    }
    let up = |mut x: usize, steps: usize| {
        for _ in 0..steps {
            x = parent[x];
        }
        x
    };
    let mut levels: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        if levels.len() <= depth[v] {
            levels.resize(depth[v] + 1, Vec::new());
        }
        levels[depth[v]].push(v);
    }

    let mut classes: BTreeMap<(usize, Option<usize>, usize), Vec<usize>> = BTreeMap::new();
    for (i, level) in levels.iter().enumerate() {
        let q = i % t;
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &x in level {
            let key = if i >= t { up(x, t) } else { root };
            groups.entry(key).or_default().push(x);
        }
        for (_, mut members) in groups {
            members.sort_unstable();
            // Relative depth j sits at absolute depth i − t + j; shallow levels
            // hang below a virtual path of length t − i above the root.
            let anc = |x: usize, j: usize| -> i64 {
                if i + j < t {
                    -((j + 1) as i64)
                } else {
                    up(x, t - j) as i64
                }
            };
            for (x, (pal, idx)) in members.iter().zip(color_level(&members, t, &anc)) {
                classes.entry((q, pal, idx)).or_default().push(*x);
            }
        }
    }

    let blocks: Vec<Vec<usize>> = classes.into_values().collect();
    let max_classes = (t as f64 + 1.0) * (t as f64).powi(t as i32 + 1);
    if blocks.len() as f64 > max_classes {
        return Err(Error::Verification(format!(
            "{} classes exceed the bound {max_classes}",
            blocks.len()
        )));
    }
    // A lone vertex has no walk to check.
    if n > 1 {
        let m = MarkovChain::random_walk(g)?;
        for b in &blocks {
            let worst = induced_chain(&m, b)?.max_pairwise();
            if worst > delta + SAFETY_SLACK {
                return Err(Error::Verification(format!(
                    "class {b:?} has induced transition {worst} > {delta}"
                )));
            }
        }
    }
    Partition::new(
        n,
        Vec::new(),
        blocks.clone(),
        blocks,
        Provenance {
            construction: "tree".into(),
            params: serde_json::json!({ "delta": delta, "root": root, "t": t }),
            seed: None,
        },
    )
}

/// Keep classes with `|W_i| ≥ ϑn`, `U_i = V_i`, the rest in `V0`.
pub fn keep_large(p: &Partition, theta: f64) -> Result<Partition> {
    let cut = theta * p.n as f64;
    let blocks: Vec<Vec<usize>> = p
        .blocks
        .iter()
        .filter(|b| b.len() as f64 >= cut)
        .cloned()
        .collect();
    let v0 = super::complement(p.n, &blocks);
    let mut provenance = p.provenance.clone();
    provenance.params["kept_theta"] = serde_json::json!(theta);
    Partition::new(p.n, v0, blocks.clone(), blocks, provenance)
}
