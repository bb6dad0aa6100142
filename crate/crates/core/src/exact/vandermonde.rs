use super::{check_inverse_order, check_mellin_argument, pole_residue_coefficient, MomentEngine};
use crate::error::{Error, Result};
use crate::special::{factorial, gamma, ln_factorial, ln_gamma, GAMMA_OVERFLOW};
use crate::spectra::Spectrum;
use nalgebra::DMatrix;

/// Largest 1-norm condition number of the Vandermonde matrix for which the
/// engine certifies its result.
pub const PSI_CONDITION_LIMIT: f64 = 1e12;

/// Above this condition number the cofactors come from explicit minors.
const C_CONDITION_LIMIT: f64 = 1e10;

/// Largest `m` for which explicit minor expansion is attempted.
const MINOR_EXPANSION_MAX_M: usize = 4;

/// A nonzero real stored as `sign * exp(ln_abs)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: f64,
    pub ln_abs: f64,
}

impl SignedLog {
    pub fn value(&self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

/// Literal evaluation of the Vandermonde/cofactor closed form.
///
/// Holds the `(n-m) x (n-m)` Vandermonde matrix `psi` of the smallest
/// `n - m` eigenvalues and its inverse, the `m x m` matrix `C`, the
/// cofactor matrix of `C` and the normalizing constant `L`.
#[derive(Debug, Clone)]
pub struct ExactEngine {
    spectrum: Spectrum,
    psi: DMatrix<f64>,
    psi_inv: DMatrix<f64>,
    psi_condition: f64,
    cmat: DMatrix<f64>,
    cof: DMatrix<f64>,
    det_c: SignedLog,
    scaled_c: DMatrix<f64>,
    scaled_cof: DMatrix<f64>,
    scaled_det: SignedLog,
    log_l: SignedLog,
    // L * cofactor, the weights every evaluation uses
    weights: DMatrix<f64>,
}

fn norm1(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn signed_log_det(a: &DMatrix<f64>) -> Option<SignedLog> {
    if a.nrows() == 0 {
        return Some(SignedLog {
            sign: 1.0,
            ln_abs: 0.0,
        });
    }
    let lu = a.clone().lu();
    let mut sign = lu.p().determinant::<f64>();
    let mut ln_abs = 0.0;
    let u = lu.u();
    for i in 0..a.nrows() {
        let d = u[(i, i)];
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        sign *= d.signum();
        ln_abs += d.abs().ln();
    }
    Some(SignedLog { sign, ln_abs })
}

/// Powers of two `(r, c)` that bring every row, then every column, of `a`
/// to a largest magnitude in `[1, 2)`.
fn equilibrate(a: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let pow2 = |v: f64| {
        if v > 0.0 && v.is_finite() {
            2f64.powi(-(v.log2().floor() as i32))
        } else {
            1.0
        }
    };
    let rows: Vec<f64> = a.row_iter().map(|r| pow2(r.amax())).collect();
    let cols: Vec<f64> = (0..a.ncols())
        .map(|j| {
            pow2(
                (0..a.nrows())
                    .map(|i| (a[(i, j)] * rows[i]).abs())
                    .fold(0.0, f64::max),
            )
        })
        .collect();
    (rows, cols)
}

fn minor_cofactors(c: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let m = c.nrows();
    if m == 1 {
        return Some(DMatrix::from_element(1, 1, 1.0));
    }
    let mut cof = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let minor = c.clone().remove_row(i).remove_column(j);
            let d = signed_log_det(&minor).map(|d| d.value()).unwrap_or(0.0);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            cof[(i, j)] = sign * d;
        }
    }
    cof.iter().all(|x| x.is_finite()).then_some(cof)
}

fn ill(what: &str, estimate: f64, limit: f64) -> Error {
    Error::IllConditioned {
        what: what.to_string(),
        estimate,
        limit,
    }
}

impl ExactEngine {
    pub fn build(spectrum: &Spectrum) -> Result<Self> {
        spectrum.require_distinct()?;
        let th = spectrum.thetas();
        let m = spectrum.m();
        let big_n = spectrum.n() - m;

        let psi = DMatrix::from_fn(big_n, big_n, |i, j| th[i].powi(j as i32));
        let psi_inv = psi.clone().lu().try_inverse().ok_or_else(|| {
            ill(
                "singular Vandermonde matrix",
                f64::INFINITY,
                PSI_CONDITION_LIMIT,
            )
        })?;
        let psi_condition = norm1(&psi) * norm1(&psi_inv);
        if !(psi_condition <= PSI_CONDITION_LIMIT) {
            return Err(ill(
                "Vandermonde matrix of the smallest eigenvalues",
                psi_condition,
                PSI_CONDITION_LIMIT,
            ));
        }

        let x = &th[big_n..];
        let cmat = DMatrix::from_fn(m, m, |l, k| {
            let e = (big_n + k) as i32;
            let projected: f64 = (0..big_n)
                .map(|p| {
                    let xp = x[l].powi(p as i32);
                    (0..big_n)
                        .map(|q| psi_inv[(p, q)] * xp * th[q].powi(e))
                        .sum::<f64>()
                })
                .sum();
            factorial(k) * (x[l].powi(e) - projected)
        });

        // power-of-two row and column scaling is exact and leaves the
        // cofactor identity intact up to known factors
        let (row_scale, col_scale) = equilibrate(&cmat);
        let scaled_c = DMatrix::from_fn(m, m, |i, j| cmat[(i, j)] * row_scale[i] * col_scale[j]);
        let ln_scale: f64 = row_scale.iter().chain(&col_scale).map(|v| v.ln()).sum();

        let scaled_det = signed_log_det(&scaled_c)
            .ok_or_else(|| ill("singular C matrix", f64::INFINITY, C_CONDITION_LIMIT))?;
        let det_c = SignedLog {
            sign: scaled_det.sign,
            ln_abs: scaled_det.ln_abs - ln_scale,
        };
        let c_inv = scaled_c.clone().lu().try_inverse();
        let c_condition = c_inv
            .as_ref()
            .map(|inv| norm1(&scaled_c) * norm1(inv))
            .unwrap_or(f64::INFINITY);
        let scaled_cof = if c_condition <= C_CONDITION_LIMIT {
            c_inv.unwrap().transpose() * scaled_det.value()
        } else if m <= MINOR_EXPANSION_MAX_M {
            minor_cofactors(&scaled_c)
                .ok_or_else(|| ill("cofactors of C", c_condition, C_CONDITION_LIMIT))?
        } else {
            return Err(ill("C matrix", c_condition, C_CONDITION_LIMIT));
        };
        // cof(C)_ij = cof(scaled)_ij r_i c_j / (prod r prod c)
        let unscale = |ln_extra: f64| {
            DMatrix::from_fn(m, m, |i, j| {
                scaled_cof[(i, j)] * row_scale[i] * col_scale[j] * (ln_extra - ln_scale).exp()
            })
        };
        let cof = unscale(0.0);

        // L = det(psi) / (m prod_{k<l} (theta_l - theta_k) prod_{l<m} l!);
        // det(psi) cancels the pairs with both indices among the first n - m.
        let mut ln_l = -(m as f64).ln();
        for l in big_n..th.len() {
            for k in 0..l {
                ln_l -= (th[l] - th[k]).ln();
            }
        }
        for l in 1..m {
            ln_l -= ln_factorial(l);
        }
        let log_l = SignedLog {
            sign: 1.0,
            ln_abs: ln_l,
        };

        let weights = unscale(log_l.ln_abs);
        if !(weights.iter().all(|w| w.is_finite()) && log_l.value() > 0.0) {
            return Err(ill("normalizing constant L", log_l.ln_abs.abs(), 700.0));
        }

        Ok(Self {
            spectrum: spectrum.clone(),
            psi,
            psi_inv,
            psi_condition,
            cmat,
            cof,
            det_c,
            scaled_c,
            scaled_cof,
            scaled_det,
            log_l,
            weights,
        })
    }

    pub fn psi(&self) -> &DMatrix<f64> {
        &self.psi
    }

    pub fn psi_inv(&self) -> &DMatrix<f64> {
        &self.psi_inv
    }

    /// 1-norm condition number of `psi`.
    pub fn psi_condition(&self) -> f64 {
        self.psi_condition
    }

    pub fn cmat(&self) -> &DMatrix<f64> {
        &self.cmat
    }

    /// Cofactor matrix of `C`: entry `(i, j)` is the `(i, j)` cofactor.
    pub fn cofactors(&self) -> &DMatrix<f64> {
        &self.cof
    }

    pub fn det_c(&self) -> SignedLog {
        self.det_c
    }

    pub fn log_l(&self) -> SignedLog {
        self.log_l
    }

    /// `max |cof^T C - det(C) I| / |det(C)|`, evaluated on the
    /// power-of-two equilibrated `C` where cancellation in the product does
    /// not swamp the determinant.
    pub fn cofactor_residual(&self) -> f64 {
        let det = self.scaled_det.value();
        let m = self.scaled_c.nrows();
        let prod = self.scaled_cof.transpose() * &self.scaled_c;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                let target = if i == j { det } else { 0.0 };
                worst = worst.max((prod[(i, j)] - target).abs());
            }
        }
        worst / det.abs()
    }

    /// `x_i^e - b_i^T psi^{-1} [theta_q^e]_q` for the i-th largest-block
    /// eigenvalue.
    fn interpolation_residual(&self, i: usize, e: f64) -> f64 {
        let th = self.spectrum.thetas();
        let big_n = self.psi.nrows();
        let x = th[big_n + i];
        let a: Vec<f64> = th[..big_n].iter().map(|t| t.powf(e)).collect();
        let mut projected = 0.0;
        let mut xk = 1.0;
        for k in 0..big_n {
            let row: f64 = (0..big_n).map(|l| self.psi_inv[(k, l)] * a[l]).sum();
            projected += row * xk;
            xk *= x;
        }
        x.powf(e) - projected
    }
}

impl MomentEngine for ExactEngine {
    fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    fn mellin_terms(&self, s: f64) -> Result<Vec<f64>> {
        check_mellin_argument(&self.spectrum, s)?;
        let m = self.spectrum.m();
        let big_n = self.psi.nrows() as f64;
        let residuals: Vec<Vec<f64>> = (1..=m)
            .map(|j| {
                let e = big_n + s + j as f64 - 2.0;
                (0..m).map(|i| self.interpolation_residual(i, e)).collect()
            })
            .collect();
        Ok((1..=m)
            .map(|j| {
                let weighted: f64 = (0..m)
                    .map(|i| self.weights[(i, j - 1)] * residuals[j - 1][i])
                    .sum();
                let g = s + j as f64 - 1.0;
                if g < GAMMA_OVERFLOW {
                    gamma(g) * weighted
                } else {
                    let (lg, sg) = ln_gamma(g);
                    sg * weighted.signum() * (lg + weighted.abs().ln()).exp()
                }
            })
            .collect())
    }

    fn inverse_moment(&self, r: usize) -> Result<f64> {
        check_inverse_order(&self.spectrum, r)?;
        let th = self.spectrum.thetas();
        let m = self.spectrum.m();
        let big_n = self.psi.nrows();
        let mut total = 0.0;
        for j in 1..=r {
            let e = (big_n + j - 1 - r) as i32;
            let coeff = pole_residue_coefficient(r, j);
            for i in 0..m {
                let x = th[big_n + i];
                // b_i^T psi^{-1} D_i a_j
                let da: Vec<f64> = (0..big_n)
                    .map(|q| (x / th[q]).ln() * th[q].powi(e))
                    .collect();
                let mut value = 0.0;
                let mut xk = 1.0;
                for k in 0..big_n {
                    let row: f64 = (0..big_n).map(|q| self.psi_inv[(k, q)] * da[q]).sum();
                    value += xk * row;
                    xk *= x;
                }
                total += self.weights[(i, j - 1)] * coeff * value;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine(th: &[f64], m: usize) -> ExactEngine {
        ExactEngine::build(&Spectrum::new(th.to_vec(), m).unwrap()).unwrap()
    }

    #[test]
    fn vandermonde_shapes() {
        let e = engine(&[1.0, 2.0], 1);
        assert_eq!(e.psi().shape(), (1, 1));
        assert_eq!(e.psi()[(0, 0)], 1.0);
        assert_eq!(e.psi_inv()[(0, 0)], 1.0);

        let e = engine(&[1.0, 2.0, 3.0, 4.0, 5.0], 2);
        assert_eq!(e.psi().shape(), (3, 3));
        for (i, t) in [1.0f64, 2.0, 3.0].iter().enumerate() {
            assert_eq!(e.psi()[(i, 0)], 1.0);
            assert_eq!(e.psi()[(i, 1)], *t);
            assert_eq!(e.psi()[(i, 2)], t * t);
        }
    }

    #[test]
    fn near_repeated_eigenvalues_are_ill_conditioned() {
        let s = Spectrum::new(vec![1.0, 1.0 + 1e-12, 3.0], 1).unwrap();
        assert!(matches!(
            ExactEngine::build(&s),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn psi_inverse_residual() {
        let e = engine(&[0.3, 0.7, 1.1, 1.9, 2.5, 4.0], 2);
        let prod = e.psi() * e.psi_inv();
        let n = prod.nrows();
        let resid = (prod - DMatrix::<f64>::identity(n, n)).amax();
        assert!(resid < 1e-8 * e.psi_condition());
    }

    #[test]
    fn normalizing_constant_matches_det_c() {
        // M(1) = L m det(C) = 1
        for (th, m) in [
            (vec![1.0, 2.0, 3.0, 4.0, 5.0], 2usize),
            (vec![0.3, 0.7, 1.1, 1.9, 2.5, 4.0], 3),
        ] {
            let e = engine(&th, m);
            let prod = e.log_l().value() * m as f64 * e.det_c().value();
            assert!((prod - 1.0).abs() < 1e-9, "{prod}");
        }
    }

    #[test]
    fn cofactors_from_minors_agree() {
        let e = engine(&[0.2, 0.45, 0.9, 1.3, 2.2, 2.9, 3.3, 5.1], 4);
        let minors = minor_cofactors(e.cmat()).unwrap();
        let scale = minors.amax();
        assert!((e.cofactors() - minors).amax() / scale < 1e-9);
        assert!(e.cofactor_residual() < 1e-6);
    }

    #[test]
    fn two_point_closed_form() {
        // n = 2, m = 1: S = th1 |h1|^2 + th2 |h2|^2, E[1/S] = ln(th2/th1)/(th2-th1)
        let e = engine(&[1.0, 3.0], 1);
        let expected = 3f64.ln() / 2.0;
        assert!((e.inverse_moment(1).unwrap() - expected).abs() < 1e-15);
        assert!((e.mellin(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((e.positive_moment(1).unwrap() - 4.0).abs() < 1e-14);
    }
}
