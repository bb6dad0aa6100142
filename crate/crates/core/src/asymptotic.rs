//! Deterministic-equivalent inverse moments.
//!
//! `m0` solves the fixed point `x = 1 / ((1/m) sum_k theta_k / (1 + theta_k x))`,
//! the Stieltjes transform of the limiting eigenvalue law at the origin.
//! Its derivatives `m^(p)` and the auxiliary `f_k^(p)` (derivatives of
//! `-1/(1 + theta_k m(z))`) follow from a linear recursion in `p`.

use crate::error::{Error, Result};
use crate::special::factorial;
use crate::spectra::Spectrum;

pub const DEFAULT_TOL: f64 = 1e-14;
pub const DEFAULT_MAX_ITER: usize = 100_000;
const DAMPING: f64 = 0.5;
const DEGENERATE_LIMIT: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct AsymptoticState {
    spectrum: Spectrum,
    m0: f64,
    residual: f64,
    iterations: usize,
    // m^(1) .. m^(P)
    m_derivs: Vec<f64>,
    // f_derivs[k][p] = f_k^(p), p = 0 ..= P
    f_derivs: Vec<Vec<f64>>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn fixed_point_map(thetas: &[f64], m: f64, x: f64) -> f64 {
    let s: f64 = thetas.iter().map(|t| t / (1.0 + t * x)).sum();
    m / s
}

/// Solves for `m0` by damped iteration `x <- x/2 + F(x)/2` from
/// `x = n / sum theta`, stopping once `|x - F(x)| <= tol * max(1, x)`.
pub fn solve_fixed_point(
    spectrum: &Spectrum,
    tol: f64,
    max_iter: usize,
) -> Result<AsymptoticState> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let th = spectrum.thetas();
    let m = spectrum.m() as f64;
    let n = spectrum.n() as f64;
    let mut x = m / (spectrum.trace() * m / n);
    let mut residual = f64::INFINITY;
    for it in 0..max_iter {
        let fx = fixed_point_map(th, m, x);
        residual = (x - fx).abs();
        if residual <= tol * x.max(1.0) {
            let f0 = th.iter().map(|t| vec![-1.0 / (1.0 + t * x)]).collect();
            return Ok(AsymptoticState {
                spectrum: spectrum.clone(),
                m0: x,
                residual,
                iterations: it,
                m_derivs: Vec::new(),
                f_derivs: f0,
            });
        }
        x = (1.0 - DAMPING) * x + DAMPING * fx;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

impl AsymptoticState {
    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    /// `|m0 - F(m0)|` at the accepted iterate.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `m^(1) .. m^(P)`.
    pub fn m_derivs(&self) -> &[f64] {
        &self.m_derivs
    }

    /// `m^(p)` with `m^(0) = m0`.
    pub fn m_deriv(&self, p: usize) -> Option<f64> {
        if p == 0 {
            Some(self.m0)
        } else {
            self.m_derivs.get(p - 1).copied()
        }
    }

    /// `f_k^(p)` for `k` indexing the spectrum (0-based).
    pub fn f_deriv(&self, k: usize, p: usize) -> Option<f64> {
        self.f_derivs.get(k).and_then(|row| row.get(p)).copied()
    }

    /// Highest derivative order available.
    pub fn order(&self) -> usize {
        self.m_derivs.len()
    }

    /// Extends the derivative stacks through order `max_order`, solving for
    /// `m^(p)` and then every `f_k^(p)` at each `p` in turn.
    pub fn compute_derivatives(mut self, max_order: usize) -> Result<Self> {
        let th = self.spectrum.thetas().to_vec();
        let m = self.spectrum.m() as f64;
        let den: Vec<f64> = th.iter().map(|t| 1.0 + t * self.m0).collect();
        let mut md = vec![self.m0];
        md.extend_from_slice(&self.m_derivs);
        for p in (self.order() + 1)..=max_order {
            let f = &self.f_derivs;
            let multiplier: f64 = (0..th.len()).map(|k| th[k] * f[k][0] / den[k]).sum::<f64>() / m;
            if multiplier.abs() < DEGENERATE_LIMIT {
                return Err(Error::DegenerateCoefficient {
                    order: p,
                    value: multiplier,
                });
            }
            let coupling = |k: usize| -> f64 {
                (1..p)
                    .map(|l| binomial(p, l) * th[k] * md[l] * f[k][p - l] / den[k])
                    .sum()
            };
            let couplings: Vec<f64> = (0..th.len()).map(coupling).collect();
            let mp = -(p as f64 * md[p - 1] + couplings.iter().sum::<f64>() / m) / multiplier;
            for k in 0..th.len() {
                let fp = -th[k] * mp * self.f_derivs[k][0] / den[k] - couplings[k];
                self.f_derivs[k].push(fp);
            }
            md.push(mp);
            self.m_derivs.push(mp);
        }
        Ok(self)
    }

    /// Deterministic approximation of `mu(-r)`: `m^(r-1) / ((r-1)! m^r)`.
    pub fn inverse_moment(&self, r: usize) -> Result<f64> {
        if r == 0 {
            return Err(Error::OrderOutOfRange {
                order: 0,
                min: 1,
                max: i64::MAX,
            });
        }
        let d = self.m_deriv(r - 1).ok_or(Error::MissingDerivatives {
            required: r - 1,
            available: self.order(),
        })?;
        let m = self.spectrum.m() as f64;
        Ok(d / (factorial(r - 1) * m.powi(r as i32)))
    }
}

/// Asymptotic `mu(-1) .. mu(-max_order)` with default solver settings.
pub fn asymptotic_inverse_moments(spectrum: &Spectrum, max_order: usize) -> Result<Vec<f64>> {
    let state = solve_fixed_point(spectrum, DEFAULT_TOL, DEFAULT_MAX_ITER)?
        .compute_derivatives(max_order.saturating_sub(1))?;
    (1..=max_order).map(|r| state.inverse_moment(r)).collect()
}
