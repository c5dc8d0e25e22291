//! One function per subcommand; each returns the JSON document and a one-line summary.

use clap::{Args, Subcommand};
use covertime_core::exact::{
    cover_probability, cover_probability_exact, expander_bounds, spectral_gap,
};
use covertime_core::martingale::{
    assoc_bound, concentration_report, lambda_of, martingale_step, net_family_size, asymptotic_params,
    super_martingale_s, XiSpec, XiState,
};
use covertime_core::mc::{estimate_cover, simulate_replica};
use covertime_core::partition::{
    expander_partition, generic_partition, recurrent_partition, tree_safe_partition, verify_cor_p,
    DeltaThreshold, Partition,
};
use covertime_core::rational::{to_f64, ExactChain};
use covertime_core::{Error, Graph, MarkovChain, Result, StartRule};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bad;
use crate::input::{parse_list, parse_start, parse_states, ChainSource};
use crate::output::Run;

pub type Outcome = Result<(Value, String)>;

fn params_of<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

#[derive(Args, Debug, Serialize)]
pub struct CoverArgs {
    #[command(flatten)]
    pub source: ChainSource,
    /// Start state, `uniform`, or `stationary`.
    #[arg(long, default_value = "0")]
    pub start: String,
    /// Target states: `all` or a comma list.
    #[arg(long, default_value = "all")]
    pub target: String,
    #[arg(long)]
    pub horizon: usize,
    /// Count `X_0` toward coverage.
    #[arg(long)]
    pub include_start: bool,
    /// Exact dynamic programming.
    #[arg(long, required_unless_present = "mc", conflicts_with = "mc")]
    pub exact: bool,
    /// Exact rational arithmetic (graph input, vertex start).
    #[arg(long, requires = "exact")]
    pub rational: bool,
    /// Monte Carlo with this many replications.
    #[arg(long)]
    pub mc: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn cover(a: &CoverArgs) -> Outcome {
    let mut run = Run::new("cover", params_of(a), a.seed);
    let loaded = a.source.load(&mut run)?;
    let m = loaded.chain();
    let start = parse_start(&a.start, m)?;
    let targets = parse_states(&a.target, m.n())?;
    let (result, summary) = if let Some(reps) = a.mc {
        let e = estimate_cover(m, &start, &targets, a.horizon, reps, a.seed, a.include_start)?;
        let s = format!("cover ≈ {:.6} (99% CI [{:.6}, {:.6}], {reps} walks)", e.estimate, e.lo, e.hi);
        (json!({ "mode": "mc", "estimate": e }), s)
    } else if a.rational {
        let StartRule::Vertex(v) = start else {
            return Err(Error::Precondition("--rational needs a vertex start".into()));
        };
        let c = ExactChain::random_walk(loaded.graph()?)?;
        let p = cover_probability_exact(&c, v, &targets, a.horizon, a.include_start)
            .map_err(budget_hint)?;
        let s = format!("cover = {p}");
        (json!({ "mode": "rational", "exact": p.to_string(), "probability": to_f64(&p) }), s)
    } else {
        let p = cover_probability(m, &start, &targets, a.horizon, a.include_start)
            .map_err(budget_hint)?;
        (json!({ "mode": "exact", "probability": p }), format!("cover = {p}"))
    };
    Ok((run.finish(result), summary))
}

fn budget_hint(e: Error) -> Error {
    match e {
        Error::Budget(msg) => Error::Budget(format!("{msg}; use --mc REPS for a Monte Carlo estimate")),
        other => other,
    }
}

#[derive(Subcommand, Debug)]
pub enum PartitionCmd {
    /// Safe colouring of a tree.
    Tree(TreeArgs),
    /// Colouring of the recurrent states' conflict graph.
    Recurrent(RecurrentArgs),
    /// Random blocks on an expander.
    Expander(ExpanderArgs),
    /// Scale selection and random blocks on a general chain.
    Generic(GenericArgs),
    /// Check a partition file against the four partition conditions.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct TreeArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub root: usize,
    /// Also write the partition to this file.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct RecurrentArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub delta: f64,
    /// Return horizon `R`.
    #[arg(long)]
    pub horizon: usize,
    /// Classes of size at most `theta·n` go to V0.
    #[arg(long)]
    pub theta: f64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct ExpanderArgs {
    #[command(flatten)]
    pub source: ChainSource,
    /// Expansion parameter; defaults to just below the measured spectral gap.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: f64,
    /// Only states with at most this many successors are partitioned; defaults to the maximum.
    #[arg(long)]
    pub degree_cutoff: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct GenericArgs {
    #[command(flatten)]
    pub source: ChainSource,
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub delta: f64,
    /// Exponent `k` in the scale condition `δ^k`.
    #[arg(long, default_value_t = covertime_core::partition::generic::DEFAULT_K_EXP)]
    pub k_exp: u32,
    /// Only states with fewer successors than this are used; defaults to one above the maximum.
    #[arg(long)]
    pub degree_cutoff: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub partition: String,
    /// Graph to verify against; defaults to the input recorded in the partition.
    #[arg(long, conflicts_with = "chain")]
    pub graph: Option<String>,
    #[arg(long)]
    pub chain: Option<String>,
    #[arg(long = "C")]
    pub c: f64,
    #[arg(long)]
    pub theta: f64,
    /// Threshold for the transition condition: a number, or `asymptotic`.
    #[arg(long, default_value = "asymptotic")]
    pub delta_fun: String,
}

pub fn partition(cmd: &PartitionCmd) -> Outcome {
    match cmd {
        PartitionCmd::Tree(a) => {
            let mut run = Run::new("partition tree", params_of(a), 0);
            let g = Graph::parse(&run.read_input(&a.graph)?)?;
            let mut p = tree_safe_partition(&g, a.delta, a.root)?;
            record_input(&mut p, "graph", &a.graph);
            let t = covertime_core::partition::tree::level_period(a.delta) as f64;
            let bound = (t + 1.0) * t.powf(t + 1.0);
            let summary = format!("{} safe classes (bound {bound})", p.blocks.len());
            let result = json!({
                "classes": p.blocks.len(),
                "class_bound": bound,
                "within_bound": p.blocks.len() as f64 <= bound,
                "safe": true,
                "partition": save(&p, a.out.as_deref())?,
            });
            Ok((run.finish(result), summary))
        }
        PartitionCmd::Recurrent(a) => {
            let mut run = Run::new("partition recurrent", params_of(a), 0);
            let g = Graph::parse(&run.read_input(&a.graph)?)?;
            let (mut p, d) = recurrent_partition(&g, a.delta, a.horizon, a.theta)?;
            record_input(&mut p, "graph", &a.graph);
            let summary = format!(
                "{} recurrent states, {} colours, {} kept classes",
                d.recurrent.len(),
                d.colors,
                p.blocks.len()
            );
            let result = json!({ "diagnostics": d, "partition": save(&p, a.out.as_deref())? });
            Ok((run.finish(result), summary))
        }
        PartitionCmd::Expander(a) => {
            let mut run = Run::new("partition expander", params_of(a), a.seed);
            let loaded = a.source.load(&mut run)?;
            let m = loaded.chain();
            let eps = match a.eps {
                Some(e) => e,
                None => spectral_gap(m)?.spectral_eps() * (1.0 - 1e-6),
            };
            let cutoff = a.degree_cutoff.unwrap_or_else(|| max_out_degree(m));
            let (mut p, d) = expander_partition(m, eps, a.delta, cutoff, a.seed)?;
            record_source(&mut p, &a.source);
            let summary = format!("{} blocks kept of {} nonempty", p.blocks.len(), d.nonempty_blocks);
            let result = json!({
                "eps": eps,
                "degree_cutoff": cutoff,
                "diagnostics": d,
                "partition": save(&p, a.out.as_deref())?,
            });
            Ok((run.finish(result), summary))
        }
        PartitionCmd::Generic(a) => {
            let mut run = Run::new("partition generic", params_of(a), a.seed);
            let loaded = a.source.load(&mut run)?;
            let m = loaded.chain();
            let cutoff = a.degree_cutoff.unwrap_or_else(|| max_out_degree(m) + 1);
            let (mut p, d) = generic_partition(m, a.c, a.delta, a.k_exp, cutoff, a.seed)?;
            record_source(&mut p, &a.source);
            let summary = format!(
                "scale index {}, R = {}, |T| = {}, {} blocks kept",
                d.scale.index,
                d.scale.r,
                d.transient_set,
                p.blocks.len()
            );
            let result = json!({
                "degree_cutoff": cutoff,
                "diagnostics": d,
                "partition": save(&p, a.out.as_deref())?,
            });
            Ok((run.finish(result), summary))
        }
        PartitionCmd::Verify(a) => verify(a),
    }
}

fn verify(a: &VerifyArgs) -> Outcome {
    let mut run = Run::new("partition verify", params_of(a), 0);
    let p = Partition::from_json(&run.read_input(&a.partition)?)?;
    let recorded = |key: &str| {
        p.provenance.params["input"][key].as_str().map(str::to_owned)
    };
    let source = match (&a.graph, &a.chain) {
        (Some(g), _) => ChainSource { graph: Some(g.clone()), chain: None },
        (_, Some(c)) => ChainSource { graph: None, chain: Some(c.clone()) },
        _ => ChainSource {
            graph: recorded("graph"),
            chain: recorded("chain"),
        },
    };
    if source.graph.is_none() && source.chain.is_none() {
        return Err(bad("no --graph/--chain given and the partition records no input"));
    }
    let loaded = source.load(&mut run)?;
    let threshold = match a.delta_fun.trim() {
        "asymptotic" => DeltaThreshold::Asymptotic,
        t => DeltaThreshold::Constant(t.parse().map_err(|e| bad(format!("bad --delta-fun `{t}`: {e}")))?),
    };
    let v = verify_cor_p(loaded.chain(), &p, a.c, a.theta, threshold)?;
    let summary = format!(
        "blocks large {}, V0 small {}, designated large {}, transitions small {} => {}",
        v.blocks_large,
        v.v0_small,
        v.designated_large,
        v.transitions_small,
        if v.pass { "pass" } else { "fail" }
    );
    Ok((run.finish(serde_json::to_value(&v)?), summary))
}

fn max_out_degree(m: &MarkovChain) -> usize {
    (0..m.n()).map(|v| m.out_degree(v)).max().unwrap_or(0)
}

fn record_input(p: &mut Partition, key: &str, path: &str) {
    p.provenance.params["input"] = json!({ key: path });
}

fn record_source(p: &mut Partition, s: &ChainSource) {
    let key = if s.graph.is_some() { "graph" } else { "chain" };
    record_input(p, key, s.path());
}

fn save(p: &Partition, out: Option<&str>) -> Result<Value> {
    if let Some(path) = out {
        std::fs::write(path, p.to_json()?)?;
    }
    Ok(serde_json::to_value(p)?)
}

#[derive(Args, Debug, Serialize)]
pub struct MartingaleArgs {
    #[command(flatten)]
    pub source: ChainSource,
    /// Target states (comma list).
    #[arg(long = "W")]
    pub targets: String,
    #[arg(long = "K", default_value_t = 1.0)]
    pub k: f64,
    #[arg(long, default_value_t = 1000)]
    pub walks: u64,
    /// Steps per walk; defaults to 8n.
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Start state; defaults to the smallest non-target.
    #[arg(long)]
    pub start: Option<usize>,
    /// Ignore states with a single successor when computing λ.
    #[arg(long)]
    pub exclude_pendant: bool,
    /// Deviation levels ϑ for the tail comparison.
    #[arg(long, default_value = "0.5,1,2")]
    pub thetas: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Walks used for the per-step supermartingale check.
const SUPER_WALKS: u64 = 100;

pub fn martingale(a: &MartingaleArgs) -> Outcome {
    let mut run = Run::new("martingale", params_of(a), a.seed);
    let loaded = a.source.load(&mut run)?;
    let m = loaded.chain();
    let n = m.n();
    let targets = parse_states(&a.targets, n)?;
    let thetas = parse_list(&a.thetas)?;
    let lambda = lambda_of(m, &targets, a.exclude_pendant)?;
    let spec = XiSpec::with_lambda(m, &targets, lambda, a.k)?;
    let horizon = a.horizon.unwrap_or(8 * n);
    let x0 = match a.start {
        Some(v) => v,
        None => (0..n)
            .find(|v| !targets.contains(v))
            .ok_or_else(|| Error::Precondition("every state is a target".into()))?,
    };
    if a.walks == 0 {
        return Err(bad("--walks must be positive"));
    }
    let start = StartRule::Vertex(x0);
    let traces = (0..a.walks)
        .into_par_iter()
        .map(|r| simulate_replica(m, &start, horizon, a.seed, r))
        .collect::<Result<Vec<_>>>()?;

    // Exact one-step expectation at every step of every walk.
    let (checked, failed, worst) = traces
        .par_iter()
        .map(|t| {
            let mut state = XiState::start(m, &spec, t.states[0]);
            let (mut c, mut f, mut w) = (0u64, 0u64, 0.0f64);
            for &y in &t.states[1..] {
                let s = martingale_step(m, &spec, &state);
                c += 1;
                f += u64::from(!s.pass);
                w = w.max((s.expected_next - s.current).abs());
                state.advance(m, &spec, y);
            }
            (c, f, w)
        })
        .reduce(|| (0, 0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2.max(b.2)));

    let conc = concentration_report(m, &traces, &spec, &thetas)?;

    let subsets: Vec<Vec<usize>> = (1u32..(1 << targets.len().min(16)))
        .map(|mask| (0..targets.len()).filter(|i| mask >> i & 1 == 1).map(|i| targets[i]).collect())
        .filter(|s: &Vec<usize>| s.len() <= 3)
        .collect();
    let super_pass = traces
        .iter()
        .take(SUPER_WALKS as usize)
        .map(|t| {
            subsets
                .iter()
                .map(|s| super_martingale_s(m, t, s, &spec).map(|r| r.all_pass))
                .collect::<Result<Vec<bool>>>()
                .map(|v| v.into_iter().all(|x| x))
        })
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|x| x);

    let assoc_horizon = horizon.min(16);
    let assoc = if n <= 8 && targets.len() <= 3 {
        let reports = subsets
            .iter()
            .map(|s| assoc_bound(m, &start, &spec, s, assoc_horizon))
            .collect::<Result<Vec<_>>>()?;
        json!({ "horizon": assoc_horizon, "reports": reports })
    } else {
        json!({ "skipped": "exact association needs n <= 8 and |W| <= 3" })
    };

    let summary = format!(
        "{checked} step checks, {failed} failed; max increment {:.4} vs bound {:.4}; Mbound {}",
        conc.max_increment,
        conc.increment_bound,
        if conc.mbound_pass { "holds" } else { "violated" }
    );
    let result = json!({
        "lambda": spec.lambda,
        "k": spec.k,
        "big_l": spec.big_l(),
        "threshold": spec.threshold(),
        "start": x0,
        "horizon": horizon,
        "walks": a.walks,
        "step_checks": { "checked": checked, "failed": failed, "max_abs_gap": worst, "all_pass": failed == 0 },
        "supermartingale": { "walks": traces.len().min(SUPER_WALKS as usize), "subsets": subsets, "all_pass": super_pass },
        "concentration": conc,
        "association": assoc,
    });
    Ok((run.finish(result), summary))
}

#[derive(Args, Debug, Serialize)]
pub struct SpectralArgs {
    #[command(flatten)]
    pub source: ChainSource,
    /// Expander parameter to test; defaults to just below the measured gap.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Set `S` for the tail and hitting bound tables (comma list).
    #[arg(long)]
    pub set: Option<String>,
    /// Largest `t` in the bound tables.
    #[arg(long, default_value_t = 20)]
    pub t: usize,
}

pub fn spectral(a: &SpectralArgs) -> Outcome {
    let mut run = Run::new("spectral", params_of(a), 0);
    let loaded = a.source.load(&mut run)?;
    let m = loaded.chain();
    let report = spectral_gap(m)?;
    let measured = report.spectral_eps();
    let eps = a.eps.unwrap_or(measured * (1.0 - 1e-6));
    let expander = eps > 0.0 && report.is_eps_expander(eps);
    let bounds = match &a.set {
        Some(s) if expander => {
            let set = parse_states(s, m.n())?;
            Some(
                (0..=a.t)
                    .map(|t| expander_bounds(m, &set, t, eps))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        _ => None,
    };
    let summary = format!(
        "second modulus {:.6}; {}",
        report.second_modulus,
        if expander { format!("{eps}-expander") } else { format!("not a {eps}-expander") }
    );
    let result = json!({
        "eigenvalues": report.eigenvalues,
        "second_modulus": report.second_modulus,
        "measured_eps": measured,
        "eps": eps,
        "is_expander": expander,
        "bounds": bounds,
    });
    Ok((run.finish(result), summary))
}

#[derive(Args, Debug, Serialize)]
pub struct ParamsArgs {
    #[arg(long = "C")]
    pub c: f64,
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Target count for the net-family bookkeeping.
    #[arg(long)]
    pub m: Option<usize>,
}

pub fn params(a: &ParamsArgs) -> Outcome {
    let run = Run::new("params", params_of(a), 0);
    let p = asymptotic_params(a.c, a.beta, a.lambda)?;
    let family = a.m.map(|m| net_family_size(&p, m)).transpose()?;
    let summary = format!("K = {:.6e}, log p = {:.6e}, log δ = {:.6e}", p.k, p.log_p, p.log_delta);
    Ok((run.finish(json!({ "params": p, "net_family": family })), summary))
}

