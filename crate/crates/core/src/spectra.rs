//! Eigenvalue spectra of the correlation matrix and the two built-in
//! correlation models.

use crate::error::{Error, Result};
use crate::rng::{derive_key, GaussianStream, DOMAIN_MODEL};
use crate::special::bessel_j0;
use nalgebra::{Complex, DMatrix, SymmetricEigen};
use std::f64::consts::PI;

/// Relative gap below which two eigenvalues count as repeated.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;

/// Relative tolerance for the Hermitian check on correlation matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Ascending eigenvalues `theta_1 <= ... <= theta_n` of the correlation
/// matrix together with the Gram dimension `m`.
///
/// Built through [`Spectrum::new`] the eigenvalues are strictly ascending;
/// [`Spectrum::with_repeats`] relaxes that to non-decreasing for consumers
/// that tolerate repeated eigenvalues (the deterministic equivalent).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    thetas: Vec<f64>,
    m: usize,
    min_gap: f64,
    condition: f64,
    distinct: bool,
}

impl Spectrum {
    /// Validates `n > m >= 1`, positivity and strict ordering.
    pub fn new(thetas: Vec<f64>, m: usize) -> Result<Self> {
        let s = Self::with_repeats(thetas, m)?;
        s.require_distinct()?;
        Ok(s)
    }

    /// Like [`Spectrum::new`] but also rejects adjacent gaps below
    /// `gap_tol * theta_n`.
    pub fn with_gap_tolerance(thetas: Vec<f64>, m: usize, gap_tol: f64) -> Result<Self> {
        let s = Self::new(thetas, m)?;
        s.check_gaps(gap_tol)?;
        Ok(s)
    }

    /// Non-decreasing positive eigenvalues; repeated values allowed.
    pub fn with_repeats(thetas: Vec<f64>, m: usize) -> Result<Self> {
        let n = thetas.len();
        if m == 0 || n <= m {
            return Err(Error::Dimension(format!(
                "need n > m >= 1, got n = {n}, m = {m}"
            )));
        }
        if let Some(bad) = thetas.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: *bad,
            });
        }
        if thetas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "eigenvalues must be sorted ascending".into(),
            ));
        }
        let min_gap = thetas
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        let distinct = min_gap > 0.0;
        let condition = thetas[n - 1] / thetas[0];
        Ok(Self {
            thetas,
            m,
            min_gap,
            condition,
            distinct,
        })
    }

    /// Sorts the eigenvalues before validating with [`Spectrum::new`].
    pub fn from_unsorted(mut thetas: Vec<f64>, m: usize) -> Result<Self> {
        thetas.sort_by(f64::total_cmp);
        Self::new(thetas, m)
    }

    pub fn check_gaps(&self, gap_tol: f64) -> Result<()> {
        let limit = gap_tol * self.max();
        for (index, w) in self.thetas.windows(2).enumerate() {
            let gap = w[1] - w[0];
            if gap < limit {
                return Err(Error::RepeatedEigenvalues {
                    index,
                    gap: gap / self.max(),
                    tolerance: gap_tol,
                });
            }
        }
        Ok(())
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn n(&self) -> usize {
        self.thetas.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `min(m, n - m)`: the largest admissible inverse-moment order.
    pub fn p(&self) -> usize {
        self.m.min(self.n() - self.m)
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// `theta_n / theta_1`.
    pub fn condition_ratio(&self) -> f64 {
        self.condition
    }

    pub fn is_distinct(&self) -> bool {
        self.distinct
    }

    pub fn max(&self) -> f64 {
        self.thetas[self.n() - 1]
    }

    pub fn trace(&self) -> f64 {
        self.thetas.iter().sum()
    }

    /// Same eigenvalues paired with a different Gram dimension.
    pub fn with_m(&self, m: usize) -> Result<Self> {
        if self.distinct {
            Self::new(self.thetas.clone(), m)
        } else {
            Self::with_repeats(self.thetas.clone(), m)
        }
    }

    pub fn require_distinct(&self) -> Result<()> {
        match self.thetas.windows(2).position(|w| w[1] <= w[0]) {
            None => Ok(()),
            Some(index) => Err(Error::RepeatedEigenvalues {
                index,
                gap: 0.0,
                tolerance: 0.0,
            }),
        }
    }
}

/// Multiplies every eigenvalue by `c > 0`.
pub fn scale_spectrum(s: &Spectrum, c: f64) -> Result<Spectrum> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "scale factor must be positive, got {c}"
        )));
    }
    let thetas = s.thetas.iter().map(|t| t * c).collect();
    if s.distinct {
        Spectrum::new(thetas, s.m)
    } else {
        Spectrum::with_repeats(thetas, s.m)
    }
}

/// Origin of a correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelTag {
    Bessel,
    ShiftedWishart,
    User,
}

/// Dense Hermitian correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<Complex<f64>>,
    tag: ModelTag,
}

impl CorrelationMatrix {
    /// Checks squareness and Hermitian symmetry to `HERMITIAN_TOL` relative
    /// to the largest entry. Positive definiteness is checked by
    /// [`spectrum_from_matrix`].
    pub fn new(entries: DMatrix<Complex<f64>>, tag: ModelTag) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::Dimension(format!(
                "correlation matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.nrows() == 0 {
            return Err(Error::Dimension("empty correlation matrix".into()));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !scale.is_finite() {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        let asymmetry = (&entries - entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let asymmetry = if scale > 0.0 { asymmetry / scale } else { 0.0 };
        if asymmetry > HERMITIAN_TOL {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(Self { entries, tag })
    }

    pub fn entries(&self) -> &DMatrix<Complex<f64>> {
        &self.entries
    }

    pub fn tag(&self) -> ModelTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        // symmetrize exactly so the solver sees a Hermitian input
        let herm = (&self.entries + self.entries.adjoint()) * Complex::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Eigenvalues of a Hermitian positive definite matrix as a [`Spectrum`].
///
/// Unitary invariance of the complex Gaussian makes the moments depend on
/// the correlation matrix only through its eigenvalues.
pub fn spectrum_from_matrix(mat: &CorrelationMatrix, m: usize, gap_tol: f64) -> Result<Spectrum> {
    let n = mat.dim();
    if m == 0 || m >= n {
        return Err(Error::Dimension(format!(
            "need n > m >= 1, got n = {n}, m = {m}"
        )));
    }
    let ev = mat.eigenvalues();
    if ev[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: ev[0],
        });
    }
    Spectrum::with_gap_tolerance(ev, m, gap_tol)
}

/// `[Lambda]_{ij} = J0(pi |i - j|^2)`, the dense-scattering antenna
/// correlation model.
pub fn bessel_scattering_matrix(n: usize) -> Result<CorrelationMatrix> {
    if n < 2 {
        return Err(Error::Dimension(format!("need n >= 2, got {n}")));
    }
    let by_distance: Vec<f64> = (0..n).map(|d| bessel_j0(PI * (d * d) as f64)).collect();
    let entries = DMatrix::from_fn(n, n, |i, j| Complex::new(by_distance[i.abs_diff(j)], 0.0));
    CorrelationMatrix::new(entries, ModelTag::Bessel)
}

/// `I_n + W^* W` with `W` an `n x n` matrix of unit-variance complex
/// Gaussians drawn from `seed`.
pub fn shifted_wishart_matrix(n: usize, seed: u64) -> Result<CorrelationMatrix> {
    if n < 2 {
        return Err(Error::Dimension(format!("need n >= 2, got {n}")));
    }
    let mut g = GaussianStream::new(derive_key(seed, DOMAIN_MODEL), n as u64);
    let w = g.complex_matrix(n, n);
    let mut lambda = w.adjoint() * &w;
    for i in 0..n {
        lambda[(i, i)] += Complex::new(1.0, 0.0);
    }
    // exact Hermitian symmetry
    for i in 0..n {
        lambda[(i, i)].im = 0.0;
        for j in 0..i {
            lambda[(i, j)] = lambda[(j, i)].conj();
        }
    }
    CorrelationMatrix::new(lambda, ModelTag::ShiftedWishart)
}

/// Spectrum of one of the two correlation models; `seed` only affects the
/// shifted-Wishart model.
pub fn model_spectrum(tag: ModelTag, n: usize, m: usize, seed: u64) -> Result<Spectrum> {
    let mat = match tag {
        ModelTag::Bessel => bessel_scattering_matrix(n)?,
        ModelTag::ShiftedWishart => shifted_wishart_matrix(n, seed)?,
        ModelTag::User => {
            return Err(Error::InvalidParameter(
                "user matrices have no generator; load them from a file".into(),
            ))
        }
    };
    spectrum_from_matrix(&mat, m, DEFAULT_GAP_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real_diag(values: &[f64]) -> CorrelationMatrix {
        let n = values.len();
        let m = DMatrix::from_fn(n, n, |i, j| {
            Complex::new(if i == j { values[i] } else { 0.0 }, 0.0)
        });
        CorrelationMatrix::new(m, ModelTag::User).unwrap()
    }

    #[test]
    fn diagonal_matrix_gives_sorted_spectrum() {
        let s = spectrum_from_matrix(&real_diag(&[3.0, 1.0, 2.0]), 1, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(s.n(), 3);
        assert_eq!(s.m(), 1);
        for (got, want) in s.thetas().iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
        assert_eq!(s.p(), 1);
    }

    #[test]
    fn identity_is_rejected_as_repeated() {
        let err = spectrum_from_matrix(&real_diag(&[1.0; 4]), 2, DEFAULT_GAP_TOL).unwrap_err();
        assert!(matches!(err, Error::RepeatedEigenvalues { .. }));
    }

    #[test]
    fn dimension_and_definiteness_errors() {
        let d = real_diag(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            spectrum_from_matrix(&d, 3, DEFAULT_GAP_TOL),
            Err(Error::Dimension(_))
        ));
        let neg = real_diag(&[-1.0, 2.0, 3.0]);
        assert!(matches!(
            spectrum_from_matrix(&neg, 1, DEFAULT_GAP_TOL),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            Spectrum::new(vec![1.0, 2.0], 0),
            Err(Error::Dimension(_))
        ));
        assert!(Spectrum::new(vec![2.0, 1.0, 3.0], 1).is_err());
        assert!(matches!(
            Spectrum::new(vec![1.0, 1.0, 3.0], 1),
            Err(Error::RepeatedEigenvalues { .. })
        ));
        assert!(Spectrum::with_repeats(vec![1.0, 1.0, 3.0], 1).is_ok());
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DMatrix::from_element(2, 2, Complex::new(1.0, 0.0));
        m[(0, 1)] = Complex::new(0.5, 0.1);
        m[(1, 0)] = Complex::new(0.5, 0.1);
        assert!(matches!(
            CorrelationMatrix::new(m, ModelTag::User),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn spectrum_metadata() {
        let s = Spectrum::new(vec![1.0, 2.0, 4.0, 8.0], 2).unwrap();
        assert_eq!(s.p(), 2);
        assert_eq!(s.min_gap(), 1.0);
        assert_eq!(s.condition_ratio(), 8.0);
        assert_eq!(s.trace(), 15.0);
    }

    #[test]
    fn bessel_entries() {
        let b = bessel_scattering_matrix(4).unwrap();
        for i in 0..4 {
            assert_eq!(b.entries()[(i, i)].re, 1.0);
        }
        let b2 = bessel_scattering_matrix(2).unwrap();
        assert!((b2.entries()[(0, 1)].re + 0.304_242_177_644_093_86).abs() < 1e-14);
        assert_eq!(b.entries()[(0, 2)].re, bessel_j0(4.0 * PI));
        // Toeplitz: depends on |i - j| only
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(b.entries()[(i, j)], b.entries()[(j, i)]);
                if i + 1 < 4 && j + 1 < 4 {
                    assert_eq!(b.entries()[(i, j)], b.entries()[(i + 1, j + 1)]);
                }
            }
        }
        assert!(bessel_scattering_matrix(1).is_err());
    }

    #[test]
    fn bessel_model_positive_definite_for_small_n() {
        for n in 2..=10 {
            let s = spectrum_from_matrix(&bessel_scattering_matrix(n).unwrap(), 1, DEFAULT_GAP_TOL)
                .unwrap();
            assert!(s.thetas()[0] > 0.5);
        }
    }

    #[test]
    fn shifted_wishart_is_seeded_and_at_least_identity() {
        let a = shifted_wishart_matrix(3, 1).unwrap();
        let b = shifted_wishart_matrix(3, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, shifted_wishart_matrix(3, 2).unwrap());
        let w = shifted_wishart_matrix(5, 7).unwrap();
        let asym = (w.entries() - w.entries().adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert_eq!(asym, 0.0);
        let s = spectrum_from_matrix(&w, 2, DEFAULT_GAP_TOL).unwrap();
        assert_eq!(s.n(), 5);
        assert!(s.thetas()[0] >= 1.0 - 1e-9);
        assert!(s.min_gap() > 0.0);
    }

    #[test]
    fn scaling() {
        let s = Spectrum::new(vec![1.0, 2.0, 3.0], 1).unwrap();
        assert_eq!(scale_spectrum(&s, 2.0).unwrap().thetas(), &[2.0, 4.0, 6.0]);
        assert_eq!(scale_spectrum(&s, 1.0).unwrap(), s);
        assert_eq!(scale_spectrum(&s, 0.5).unwrap().thetas(), &[0.5, 1.0, 1.5]);
        assert!(scale_spectrum(&s, 0.0).is_err());
    }
}
