//! Closed-form estimation-error predictions for `y = H x + z`.
//!
//! With noise covariance `Sigma_z` the relevant Gram matrix is
//! `H^* Lambda H` for `Lambda = Sigma_z^{-1}`. The BLUE error is
//! `m mu(-1)`; the LMMSE error with prior `sigma_x2 I` expands in inverse
//! moments at high SNR and in positive moments at low SNR.

use crate::error::{Error, Result};
use crate::exact::{build_engine, EngineKind, MomentEngine};
use crate::spectra::Spectrum;

/// Noise covariance eigenvalues and the engine built on their reciprocals.
pub struct NoiseModel {
    sigma_z: Vec<f64>,
    engine: Box<dyn MomentEngine>,
}

impl NoiseModel {
    /// `sigma_z` are the eigenvalues of the noise covariance (any order).
    pub fn new(sigma_z: &[f64], m: usize, kind: EngineKind) -> Result<Self> {
        let lambda = Spectrum::from_unsorted(sigma_z.iter().map(|v| 1.0 / v).collect(), m)?;
        if let Some(bad) = sigma_z.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: *bad,
            });
        }
        let mut sorted = sigma_z.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self {
            sigma_z: sorted,
            engine: build_engine(&lambda, kind)?,
        })
    }

    /// Noise covariance eigenvalues, ascending.
    pub fn sigma_z(&self) -> &[f64] {
        &self.sigma_z
    }

    /// `Lambda = Sigma_z^{-1}` as a spectrum.
    pub fn lambda(&self) -> &Spectrum {
        self.engine.spectrum()
    }

    pub fn engine(&self) -> &dyn MomentEngine {
        self.engine.as_ref()
    }

    fn m(&self) -> f64 {
        self.lambda().m() as f64
    }
}

/// A truncated series with the magnitude of its last term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub last_term: f64,
}

/// `E Tr (H^* Sigma_z^{-1} H)^{-1} = m mu(-1)`.
pub fn blue_mse(nm: &NoiseModel) -> Result<f64> {
    Ok(nm.m() * nm.engine().inverse_moment(1)?)
}

fn check_sigma(sigma_x2: f64) -> Result<()> {
    if sigma_x2 > 0.0 && sigma_x2.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "sigma_x2 must be positive, got {sigma_x2}"
        )))
    }
}

/// `m sum_{k=0}^{l} (-1)^k sigma_x2^{-k} mu(-k-1)` for `l <= p - 1`.
pub fn lmmse_mse_high_snr(nm: &NoiseModel, sigma_x2: f64, l: usize) -> Result<SeriesValue> {
    check_sigma(sigma_x2)?;
    let p = nm.lambda().p();
    if l + 1 > p {
        return Err(Error::OrderOutOfRange {
            order: l as i64,
            min: 0,
            max: p as i64 - 1,
        });
    }
    let mut value = 0.0;
    let mut last = 0.0;
    for k in 0..=l {
        let term = nm.m() * nm.engine().inverse_moment(k + 1)? / sigma_x2.powi(k as i32);
        value += if k % 2 == 0 { term } else { -term };
        last = term.abs();
    }
    Ok(SeriesValue {
        value,
        last_term: last,
    })
}

/// `m sum_{k=0}^{K} (-1)^k sigma_x2^{k+1} mu(k)`.
///
/// Fails with [`Error::ConvergenceWarning`] when the last term is not
/// smaller than the one before it.
pub fn lmmse_mse_low_snr(nm: &NoiseModel, sigma_x2: f64, order: usize) -> Result<SeriesValue> {
    check_sigma(sigma_x2)?;
    let mut value = 0.0;
    let mut magnitudes = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let term = nm.m() * sigma_x2.powi(k as i32 + 1) * nm.engine().positive_moment(k)?;
        value += if k % 2 == 0 { term } else { -term };
        magnitudes.push(term.abs());
    }
    if order >= 1 && magnitudes[order] >= magnitudes[order - 1] {
        return Err(Error::ConvergenceWarning {
            order,
            previous: magnitudes[order - 1],
            last: magnitudes[order],
        });
    }
    Ok(SeriesValue {
        value,
        last_term: magnitudes[order],
    })
}
