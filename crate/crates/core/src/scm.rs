//! Loss of the exponentially weighted sample covariance matrix and the
//! choice of its forgetting factor.
//!
//! The weighted SCM of `n` snapshots is `Rhat = R^{1/2} H^* Lambda H R^{1/2}`
//! with `Lambda = (1 - lambda) diag(lambda^{n-1}, ..., 1)`, so the whitened
//! loss `E || R^{1/2} Rhat^{-1} R^{1/2} - I ||_F^2` equals
//! `m (1 + mu(-2) - 2 mu(-1))` whatever `R` is.
//!
//! The rectangular window has `Lambda = I / n`, whose repeated eigenvalues
//! the closed form does not cover; use the asymptotic module there.

use crate::error::{Error, Result};
use crate::exact::{build_engine, EngineKind};
use crate::spectra::{Spectrum, DEFAULT_GAP_TOL};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScmConfig {
    pub m: usize,
    pub n: usize,
    pub lambda: f64,
}

impl ScmConfig {
    pub fn new(m: usize, n: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "forgetting factor must lie in (0, 1), got {lambda}"
            )));
        }
        if m == 0 || n <= m {
            return Err(Error::Dimension(format!(
                "need n > m >= 1, got n = {n}, m = {m}"
            )));
        }
        if m.min(n - m) < 2 {
            return Err(Error::Dimension(format!(
                "the loss needs min(m, n - m) >= 2, got m = {m}, n = {n}"
            )));
        }
        Ok(Self { m, n, lambda })
    }
}

/// `(1 - lambda) lambda^{n-k}` for `k = 1..n`, ascending.
///
/// Rejects factors whose smallest weights underflow or sit closer than
/// `1e-8` times the largest weight.
pub fn weight_spectrum(cfg: &ScmConfig) -> Result<Spectrum> {
    let ScmConfig { m, n, lambda } = *cfg;
    let thetas: Vec<f64> = (1..=n)
        .map(|k| (1.0 - lambda) * lambda.powi((n - k) as i32))
        .collect();
    if !(thetas[0] > f64::MIN_POSITIVE) {
        return Err(Error::IllConditioned {
            what: format!("weight lambda^(n-1) underflows for lambda = {lambda}, n = {n}; use a larger lambda or a shorter window"),
            estimate: thetas[0],
            limit: f64::MIN_POSITIVE,
        });
    }
    let max = thetas[n - 1];
    let gap = thetas
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if gap < DEFAULT_GAP_TOL * max {
        return Err(Error::IllConditioned {
            what: format!(
                "weights for lambda = {lambda}, n = {n} are too clustered; move lambda away from 0 and 1 or shorten the window"
            ),
            estimate: gap / max,
            limit: DEFAULT_GAP_TOL,
        });
    }
    Spectrum::new(thetas, m)
}

/// `m (1 + mu(-2) - 2 mu(-1))` on the weight spectrum.
pub fn scm_loss(cfg: &ScmConfig, kind: EngineKind) -> Result<f64> {
    let engine = build_engine(&weight_spectrum(cfg)?, kind)?;
    let mu1 = engine.inverse_moment(1)?;
    let mu2 = engine.inverse_moment(2)?;
    Ok(cfg.m as f64 * (1.0 + mu2 - 2.0 * mu1))
}

/// The default grid `0.05, 0.10, ..., 0.95`.
pub fn default_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone)]
pub struct LossCurve {
    /// Accepted `(lambda, loss)` pairs in grid order.
    pub grid: Vec<(f64, f64)>,
    /// Grid points that failed validation or conditioning.
    pub rejected: Vec<(f64, Error)>,
    pub lambda_star: f64,
    pub loss_star: f64,
}

/// Evaluates the loss on every grid point and returns the minimizer,
/// preferring the smaller factor on ties. Rejected points are skipped.
pub fn optimize_lambda(m: usize, n: usize, grid: &[f64], kind: EngineKind) -> Result<LossCurve> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let results: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&lambda| scm_loss(&ScmConfig::new(m, n, lambda)?, kind))
        .collect();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for (&lambda, r) in grid.iter().zip(results) {
        match r {
            Ok(loss) => accepted.push((lambda, loss)),
            Err(e) => rejected.push((lambda, e)),
        }
    }
    match argmin(&accepted) {
        Some((lambda_star, loss_star)) => Ok(LossCurve {
            grid: accepted,
            rejected,
            lambda_star,
            loss_star,
        }),
        None => Err(Error::AllRejected {
            first: Box::new(rejected.swap_remove(0).1),
        }),
    }
}

/// Point with the smallest loss; equal losses go to the smaller factor.
fn argmin(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    points.iter().copied().reduce(|best, cur| {
        if cur.1 < best.1 || (cur.1 == best.1 && cur.0 < best.0) {
            cur
        } else {
            best
        }
    })
}
