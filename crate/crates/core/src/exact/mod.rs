//! Closed-form moments of `S = H^* Lambda H` in fixed dimension.
//!
//! Two engines evaluate the same Mellin transform of the unordered
//! eigenvalue density and the same inverse-moment closed form:
//!
//! * [`ExactEngine`] follows the Vandermonde/cofactor expression literally:
//!   it inverts the `(n-m) x (n-m)` Vandermonde matrix of the smallest
//!   eigenvalues and refuses spectra for which that inverse cannot be
//!   trusted in double precision.
//! * [`DividedDifferenceEngine`] rewrites every Vandermonde projection as a
//!   divided difference and evaluates those through positive integrals, so
//!   clustered or widely spread spectra keep full accuracy.
//!
//! Both implement [`MomentEngine`]; moments of either are checked against
//! each other and against the Monte Carlo oracle.

mod divided;
mod vandermonde;

pub use divided::{power_divided_difference, stieltjes_power_integral, DividedDifferenceEngine};
pub use vandermonde::{ExactEngine, PSI_CONDITION_LIMIT};

use crate::error::{Error, Result};
use crate::special::sin_pi;
use crate::spectra::Spectrum;

/// Common surface of the fixed-dimension moment engines.
pub trait MomentEngine: Send + Sync {
    fn spectrum(&self) -> &Spectrum;

    /// Contribution of each column index `j = 1..=m` to the Mellin transform
    /// at `s`, Gamma factor included. Defined wherever no Gamma argument
    /// `s + j - 1` is a pole and every power exponent `n - m + s + j - 2`
    /// exceeds -1; this covers the shifted arguments `s - r + 1` used to
    /// approach the inverse moments.
    fn mellin_terms(&self, s: f64) -> Result<Vec<f64>>;

    /// `mu(-r) = (1/m) Tr E S^{-r}` for `1 <= r <= p`.
    fn inverse_moment(&self, r: usize) -> Result<f64>;

    /// Mellin transform `integral xi^{s-1} f(xi) d xi` for `s > 0`.
    fn mellin(&self, s: f64) -> Result<f64> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!(
                "Mellin transform needs s > 0, got {s}"
            )));
        }
        Ok(self.mellin_terms(s)?.iter().sum())
    }

    /// `mu(r) = M(r + 1)` for `r >= 0`.
    fn positive_moment(&self, r: usize) -> Result<f64> {
        if r == 0 {
            return Ok(1.0);
        }
        self.mellin(r as f64 + 1.0)
    }

    /// Signed-order dispatch: `r > 0` positive moments, `r < 0` inverse.
    fn moment(&self, r: i64) -> Result<f64> {
        if r >= 0 {
            self.positive_moment(r as usize)
        } else {
            self.inverse_moment(r.unsigned_abs() as usize)
        }
    }
}

pub(crate) fn check_inverse_order(spectrum: &Spectrum, r: usize) -> Result<()> {
    let p = spectrum.p();
    if r == 0 || r > p {
        return Err(Error::OrderOutOfRange {
            order: r as i64,
            min: 1,
            max: p as i64,
        });
    }
    Ok(())
}

pub(crate) fn check_mellin_argument(spectrum: &Spectrum, s: f64) -> Result<()> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("non-finite Mellin argument {s}")));
    }
    let big_n = (spectrum.n() - spectrum.m()) as f64;
    for j in 1..=spectrum.m() {
        let g = s + j as f64 - 1.0;
        if g <= 0.0 && sin_pi(g) == 0.0 {
            return Err(Error::Domain(format!(
                "Gamma pole at argument {g} (s = {s}, j = {j})"
            )));
        }
    }
    if big_n + s - 1.0 <= -1.0 {
        return Err(Error::Domain(format!(
            "power exponent {} below the integrable range",
            big_n + s - 1.0
        )));
    }
    Ok(())
}

/// Mellin transform at `s - r + 1` for each `s` in `s_list`.
///
/// As `s` decreases the values converge to `mu(-r)`: the Gamma poles
/// reached at `s = 0` are cancelled by the vanishing bracket they multiply.
pub fn mellin_continuation_check(
    engine: &dyn MomentEngine,
    r: usize,
    s_list: &[f64],
) -> Result<Vec<f64>> {
    check_inverse_order(engine.spectrum(), r)?;
    s_list
        .iter()
        .map(|&s| {
            if !(s > 0.0 && s <= 0.05) {
                return Err(Error::Domain(format!(
                    "continuation offsets must lie in (0, 0.05], got {s}"
                )));
            }
            Ok(engine.mellin_terms(s - r as f64 + 1.0)?.iter().sum())
        })
        .collect()
}

/// The two parts of the shifted Mellin transform at `s - r + 1`: columns
/// `j <= r` (Gamma near its poles) and columns `j > r` (regular Gamma),
/// returned as `(head, tail)`. The tail tends to zero with `s`.
pub fn continuation_split(engine: &dyn MomentEngine, r: usize, s: f64) -> Result<(f64, f64)> {
    check_inverse_order(engine.spectrum(), r)?;
    let terms = engine.mellin_terms(s - r as f64 + 1.0)?;
    let head = terms[..r].iter().sum();
    let tail = terms[r..].iter().sum();
    Ok((head, tail))
}

/// Which fixed-dimension engine to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineKind {
    Vandermonde,
    DividedDifference,
}

pub fn build_engine(spectrum: &Spectrum, kind: EngineKind) -> Result<Box<dyn MomentEngine>> {
    Ok(match kind {
        EngineKind::Vandermonde => Box::new(ExactEngine::build(spectrum)?),
        EngineKind::DividedDifference => Box::new(DividedDifferenceEngine::build(spectrum)?),
    })
}

/// Signed coefficient `(-1)^(r-j) / (r-j)!` of column `j` in the inverse
/// moment of order `r`.
pub(crate) fn pole_residue_coefficient(r: usize, j: usize) -> f64 {
    let d = r - j;
    let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
    sign / crate::special::factorial(d)
}
