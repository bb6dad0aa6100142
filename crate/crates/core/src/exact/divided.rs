use super::{check_inverse_order, check_mellin_argument, pole_residue_coefficient, MomentEngine};
use crate::error::{Error, Result};
use crate::special::{complete_homogeneous, factorial, gamma, ln_gamma, sin_pi, GAMMA_OVERFLOW};
use crate::spectra::Spectrum;
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::f64::consts::PI;

// Integrand decay (in e-folds) at both truncation points.
const TAIL_EFOLDS: f64 = 50.0;
const INITIAL_STEP: f64 = 0.125;
const MAX_REFINEMENTS: usize = 10;
const QUADRATURE_RTOL: f64 = 1e-14;

fn log_add_exp(a: f64, b: f64) -> f64 {
    let hi = a.max(b);
    hi + (-(a - b).abs()).exp().ln_1p()
}

/// `integral_0^inf w^alpha / prod_l (z_l + w) dw` for positive nodes `z`
/// and `-1 < alpha < len(z) - 1`.
///
/// Evaluated in `u = ln w` with the sinh substitution `u = c + a sinh v`
/// and a trapezoidal rule in `v`, halving the step until two successive
/// sums agree to near machine precision.
pub fn stieltjes_power_integral(alpha: f64, z: &[f64]) -> Result<f64> {
    let q = z.len() as f64 - 1.0;
    if z.is_empty() || !(alpha > -1.0 && alpha < q) {
        return Err(Error::Domain(format!(
            "power integral needs -1 < alpha < {q}, got {alpha}"
        )));
    }
    if z.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Domain("power integral needs positive nodes".into()));
    }
    let lz: Vec<f64> = z.iter().map(|x| x.ln()).collect();
    let lo = lz.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = lz.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let centre = 0.5 * (lo + hi);
    let width = (0.5 * (hi - lo)).max(1.0);
    let v_lo = ((lo - TAIL_EFOLDS / (alpha + 1.0) - centre) / width).asinh();
    let v_hi = ((hi + TAIL_EFOLDS / (q - alpha) - centre) / width).asinh();

    // peak of the log integrand, for scaling
    let log_integrand = |v: f64| {
        let u = centre + width * v.sinh();
        let mut lg = (alpha + 1.0) * u;
        for &l in &lz {
            lg -= log_add_exp(l, u);
        }
        lg + (width * v.cosh()).ln()
    };
    let shift = {
        let mut best = f64::NEG_INFINITY;
        let steps = 64;
        for k in 0..=steps {
            let v = v_lo + (v_hi - v_lo) * k as f64 / steps as f64;
            best = best.max(log_integrand(v));
        }
        best
    };
    let f = |v: f64| (log_integrand(v) - shift).exp();

    let span = v_hi - v_lo;
    let mut intervals = ((span / INITIAL_STEP).ceil() as usize).max(8);
    let mut h = span / intervals as f64;
    let mut sum =
        0.5 * (f(v_lo) + f(v_hi)) + (1..intervals).map(|k| f(v_lo + k as f64 * h)).sum::<f64>();
    let mut estimate = h * sum;
    for _ in 0..MAX_REFINEMENTS {
        let fresh: f64 = (0..intervals).map(|k| f(v_lo + (k as f64 + 0.5) * h)).sum();
        sum += fresh;
        intervals *= 2;
        h *= 0.5;
        let refined = h * sum;
        let change = (refined - estimate).abs();
        estimate = refined;
        if change <= QUADRATURE_RTOL * refined.abs() {
            return Ok(estimate * shift.exp());
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_REFINEMENTS,
        residual: f64::NAN,
    })
}

/// Divided difference of `t^alpha` over the nodes `z` (sorted ascending,
/// positive, repeats allowed).
pub fn power_divided_difference(alpha: f64, z: &[f64]) -> Result<f64> {
    let mut memo = HashMap::new();
    power_dd(alpha, 0, z, 0, &mut memo)
}

fn power_dd(
    alpha: f64,
    shift: usize,
    z: &[f64],
    start: usize,
    memo: &mut HashMap<(usize, usize), f64>,
) -> Result<f64> {
    if let Some(&v) = memo.get(&(shift, start)) {
        return Ok(v);
    }
    let nodes = &z[start..];
    let q = nodes.len() - 1;
    let a = alpha - shift as f64;
    let value = if q == 0 {
        nodes[0].powf(a)
    } else if a == a.round() && a >= 0.0 {
        let k = a as usize;
        if k >= q {
            complete_homogeneous(nodes, k - q)[k - q]
        } else {
            0.0
        }
    } else if a < q as f64 {
        let sign = if q % 2 == 1 { 1.0 } else { -1.0 };
        sign * sin_pi(a) / PI * stieltjes_power_integral(a, nodes)?
    } else {
        // Leibniz rule on t * t^(a-1)
        nodes[0] * power_dd(alpha, shift + 1, z, start, memo)?
            + power_dd(alpha, shift + 1, z, start + 1, memo)?
    };
    memo.insert((shift, start), value);
    Ok(value)
}

/// Divided difference of `t^e ln t` over `z` for integer `0 <= e < len(z) - 1`.
fn log_power_divided_difference(e: usize, z: &[f64]) -> Result<f64> {
    let q = z.len() - 1;
    let sign = if (q + 1 + e) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * stieltjes_power_integral(e as f64, z)?)
}

/// Stable evaluation of the closed form.
///
/// Every Vandermonde projection in the closed form is the divided
/// difference of a power (or power times logarithm) over the smallest
/// `n - m` eigenvalues plus a prefix of the largest `m`. Those divided
/// differences are computed from positive integrals or positive
/// recursions, and the cofactor algebra reduces to an upper-triangular
/// `m x m` solve. The spectrum is normalized by its largest eigenvalue.
#[derive(Debug, Clone)]
pub struct DividedDifferenceEngine {
    spectrum: Spectrum,
    scale: f64,
    // node sets Z_k = smallest n - m normalized eigenvalues plus the first k of the rest
    node_sets: Vec<Vec<f64>>,
    w: DMatrix<f64>,
}

impl DividedDifferenceEngine {
    pub fn build(spectrum: &Spectrum) -> Result<Self> {
        spectrum.require_distinct()?;
        let scale = spectrum.max();
        let z: Vec<f64> = spectrum.thetas().iter().map(|t| t / scale).collect();
        let m = spectrum.m();
        let big_n = spectrum.n() - m;
        let node_sets: Vec<Vec<f64>> = (1..=m).map(|k| z[..big_n + k].to_vec()).collect();
        let mut w = DMatrix::zeros(m, m);
        for k in 1..=m {
            let h = complete_homogeneous(&node_sets[k - 1], m - k);
            for j in k..=m {
                w[(k - 1, j - 1)] = factorial(j - 1) * h[j - k];
            }
        }
        Ok(Self {
            spectrum: spectrum.clone(),
            scale,
            node_sets,
            w,
        })
    }

    /// Largest eigenvalue; the engine works with the spectrum divided by it.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Diagonal of `W^{-1} F` for the column builder `entry(k, j)`.
    fn solved_diagonal<G>(&self, columns: usize, entry: G) -> Result<Vec<f64>>
    where
        G: Fn(usize, usize) -> Result<f64>,
    {
        let m = self.spectrum.m();
        let mut f = DMatrix::zeros(m, columns);
        for k in 1..=m {
            for j in 1..=columns {
                f[(k - 1, j - 1)] = entry(k, j)?;
            }
        }
        let q = self
            .w
            .solve_upper_triangular(&f)
            .ok_or_else(|| Error::IllConditioned {
                what: "triangular divided-difference system".into(),
                estimate: f64::INFINITY,
                limit: f64::MAX,
            })?;
        Ok((0..columns).map(|j| q[(j, j)]).collect())
    }
}

impl MomentEngine for DividedDifferenceEngine {
    fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    fn mellin_terms(&self, s: f64) -> Result<Vec<f64>> {
        check_mellin_argument(&self.spectrum, s)?;
        let m = self.spectrum.m();
        let big_n = (self.spectrum.n() - m) as f64;
        let diag = self.solved_diagonal(m, |k, j| {
            power_divided_difference(big_n + s + j as f64 - 2.0, &self.node_sets[k - 1])
        })?;
        let ln_scale = (s - 1.0) * self.scale.ln();
        Ok(diag
            .iter()
            .enumerate()
            .map(|(idx, &d)| {
                let g = s + idx as f64;
                let value = d / m as f64;
                if g < GAMMA_OVERFLOW {
                    gamma(g) * value * ln_scale.exp()
                } else {
                    let (lg, sg) = ln_gamma(g);
                    sg * value.signum() * (lg + value.abs().ln() + ln_scale).exp()
                }
            })
            .collect())
    }

    fn inverse_moment(&self, r: usize) -> Result<f64> {
        check_inverse_order(&self.spectrum, r)?;
        let m = self.spectrum.m();
        let big_n = self.spectrum.n() - m;
        let diag = self.solved_diagonal(r, |k, j| {
            log_power_divided_difference(big_n + j - 1 - r, &self.node_sets[k - 1])
        })?;
        let sum: f64 = diag
            .iter()
            .enumerate()
            .map(|(idx, d)| pole_residue_coefficient(r, idx + 1) * d)
            .sum();
        Ok(sum / m as f64 / self.scale.powi(r as i32))
    }
}
