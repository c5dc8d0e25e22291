//! Loading graphs, chains and start rules from the command line.

use clap::Args;
use covertime_core::{Error, Graph, MarkovChain, Result, StartRule};
use serde::Serialize;

use crate::output::Run;

#[derive(Args, Clone, Debug, Serialize)]
#[group(required = true, multiple = false)]
pub struct ChainSource {
    /// Edge-list file (`n m` header, then `u v` lines); the simple random walk is used.
    #[arg(long)]
    pub graph: Option<String>,
    /// Sparse chain file (`n` header, then `u v p` lines).
    #[arg(long)]
    pub chain: Option<String>,
}

pub enum Loaded {
    Graph(Graph, MarkovChain),
    Chain(MarkovChain),
}

impl Loaded {
    pub fn chain(&self) -> &MarkovChain {
        match self {
            Loaded::Graph(_, m) | Loaded::Chain(m) => m,
        }
    }

    pub fn graph(&self) -> Result<&Graph> {
        match self {
            Loaded::Graph(g, _) => Ok(g),
            Loaded::Chain(_) => Err(Error::Precondition(
                "this command needs --graph (degree data)".into(),
            )),
        }
    }
}

impl ChainSource {
    pub fn path(&self) -> &str {
        self.graph.as_deref().or(self.chain.as_deref()).unwrap_or_default()
    }

    pub fn load(&self, run: &mut Run) -> Result<Loaded> {
        if let Some(p) = &self.graph {
            let g = Graph::parse(&run.read_input(p)?)?;
            let m = MarkovChain::random_walk(&g)?;
            Ok(Loaded::Graph(g, m))
        } else if let Some(p) = &self.chain {
            Ok(Loaded::Chain(MarkovChain::parse(&run.read_input(p)?)?))
        } else {
            Err(Error::Precondition("one of --graph or --chain is required".into()))
        }
    }
}

/// `all` or a comma-separated list of states.
pub fn parse_states(text: &str, n: usize) -> Result<Vec<usize>> {
    if text.trim() == "all" {
        return Ok((0..n).collect());
    }
    let mut out = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: usize = tok
            .parse()
            .map_err(|e| crate::bad(format!("bad state `{tok}`: {e}")))?;
        if v >= n {
            return Err(Error::Precondition(format!("state {v} out of range for n = {n}")));
        }
        out.push(v);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|e| crate::bad(format!("bad number `{t}`: {e}"))))
        .collect()
}

/// A vertex index, `uniform`, or `stationary`.
pub fn parse_start(text: &str, m: &MarkovChain) -> Result<StartRule> {
    match text.trim() {
        "uniform" => Ok(StartRule::Distribution(vec![1.0 / m.n() as f64; m.n()])),
        "stationary" => Ok(StartRule::Distribution(m.stationary(covertime_core::chain::STATIONARY_TOL)?)),
        v => {
            let v: usize = v
                .parse()
                .map_err(|e| crate::bad(format!("bad start `{v}`: {e}")))?;
            let rule = StartRule::Vertex(v);
            rule.validate(m.n())?;
            Ok(rule)
        }
    }
}
