//! Log-space bookkeeping for the certificate constants.
//!
//! At the intended scale `K ≈ 10⁷`, so `L = e^K` and `p = e^{−K}` are not
//! representable; everything that involves them is carried as a logarithm.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::GAMMA;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartingaleParams {
    pub c: f64,
    pub beta: f64,
    pub lambda: f64,
    pub k: f64,
    /// Which term attained the max in `K = max{[20e(64+C)]², log(1/β)}`.
    pub k_branch: KBranch,
    pub log_l: f64,
    pub log_p: f64,
    /// `ε = (λ/5)·e^{−K}`, stored as the mantissa `λ/5` and exponent `−K`.
    pub eps_mantissa: f64,
    pub eps_exponent: f64,
    pub log_eps: f64,
    pub log_delta: f64,
    pub log_theta: f64,
    pub degree: DegreeConstants,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KBranch {
    Coverage,
    Density,
}

/// Constants for the high/low degree argument: `β = γ/2`, `C = D/β`, so `D = βC`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeConstants {
    pub gamma: f64,
    pub big_d: f64,
    /// `d = 1/δ`.
    pub log_d: f64,
    /// `ϱ = γKp/160`.
    pub log_rho: f64,
    /// `Δ = 16Dd²/(γϱ)`.
    pub log_big_delta: f64,
}

/// `[20e(64+C)]²`.
pub fn coverage_k(c: f64) -> f64 {
    (20.0 * std::f64::consts::E * (64.0 + c)).powi(2)
}

pub fn asymptotic_params(c: f64, beta: f64, lambda: f64) -> Result<MartingaleParams> {
    check_inputs(c, beta, lambda)?;
    let cover = coverage_k(c);
    let density = (1.0 / beta).ln();
    let (k, branch) = if cover >= density {
        (cover, KBranch::Coverage)
    } else {
        (density, KBranch::Density)
    };
    Ok(derive(c, beta, lambda, k, branch))
}

/// Same derived quantities at a caller-chosen `K`.
pub fn params_with_k(c: f64, beta: f64, lambda: f64, k: f64) -> Result<MartingaleParams> {
    check_inputs(c, beta, lambda)?;
    if !(k > 0.0) {
        return Err(Error::Precondition(format!("K = {k} must be positive")));
    }
    let branch = if k >= (1.0 / beta).ln() {
        KBranch::Coverage
    } else {
        KBranch::Density
    };
    Ok(derive(c, beta, lambda, k, branch))
}

fn check_inputs(c: f64, beta: f64, lambda: f64) -> Result<()> {
    if !(c >= 1.0) {
        return Err(Error::Precondition(format!("C = {c} must be at least 1")));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Precondition(format!("beta = {beta} outside (0, 1)")));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Precondition(format!(
            "lambda = {lambda} outside (0, 1]"
        )));
    }
    Ok(())
}

fn derive(c: f64, beta: f64, lambda: f64, k: f64, k_branch: KBranch) -> MartingaleParams {
    let eps_mantissa = lambda / 5.0;
    let log_eps = eps_mantissa.ln() - k;
    let log_delta = log_eps - k.ln();
    let log_p = -k;
    let big_d = beta * c;
    let log_d = -log_delta;
    let log_rho = (GAMMA * k / 160.0).ln() + log_p;
    let log_big_delta = 16f64.ln() + big_d.ln() + 2.0 * log_d - GAMMA.ln() - log_rho;
    MartingaleParams {
        c,
        beta,
        lambda,
        k,
        k_branch,
        log_l: k,
        log_p,
        eps_mantissa,
        eps_exponent: -k,
        log_eps,
        log_delta,
        log_theta: 2.0 * log_delta,
        degree: DegreeConstants {
            gamma: GAMMA,
            big_d,
            log_d,
            log_rho,
            log_big_delta,
        },
    }
}
