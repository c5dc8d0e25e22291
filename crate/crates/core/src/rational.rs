//! Exact rational arithmetic for small random-walk chains, used as a bit-exact oracle.

use std::ops::{Add, Mul};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Scalar types usable by the generic dynamic programs.
pub trait Prob: Clone + Zero + One + Add<Output = Self> + Mul<Output = Self> + Send + Sync {}

impl<T> Prob for T where T: Clone + Zero + One + Add<Output = T> + Mul<Output = T> + Send + Sync {}

/// Random walk on a small graph with exact rational transition probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactChain {
    rows: Vec<Vec<(usize, BigRational)>>,
}

impl ExactChain {
    pub const MAX_STATES: usize = 12;

    pub fn random_walk(g: &Graph) -> Result<Self> {
        if g.n() > Self::MAX_STATES {
            return Err(Error::Budget(format!(
                "exact-rational mode supports n <= {}, got {}",
                Self::MAX_STATES,
                g.n()
            )));
        }
        if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
            return Err(Error::DegenerateVertex(v));
        }
        let rows = (0..g.n())
            .map(|v| {
                let p = ratio(1, g.degree(v) as i64);
                g.neighbors(v).iter().map(|&w| (w, p.clone())).collect()
            })
            .collect();
        Ok(ExactChain { rows })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(usize, BigRational)>] {
        &self.rows
    }

    /// The closed-form law `d_v / 2|E|`.
    pub fn degree_law(g: &Graph) -> Vec<BigRational> {
        let two_m = 2 * g.num_edges() as i64;
        (0..g.n())
            .map(|v| ratio(g.degree(v) as i64, two_m))
            .collect()
    }

    /// Exact test of `πP = π`.
    pub fn is_stationary(&self, pi: &[BigRational]) -> bool {
        let mut out = vec![BigRational::zero(); self.n()];
        for (u, row) in self.rows.iter().enumerate() {
            for (v, p) in row {
                out[*v] += &pi[u] * p;
            }
        }
        out == pi
    }
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
