//! Monte Carlo ground truth for moments and application metrics.
//!
//! Trial `t` always draws its Gaussian matrix from stream `t` of a key
//! derived from the seed. Trials are grouped into fixed blocks whose
//! running statistics are merged in block order, so a run gives the same
//! bits for any number of worker threads.

use crate::error::{Error, Result};
use crate::rng::{derive_key, GaussianStream, DOMAIN_TRIALS};
use crate::spectra::Spectrum;
use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rayon::prelude::*;

/// Samples whose condition number exceeds this fail the run.
pub const SAMPLE_CONDITION_LIMIT: f64 = 1e14;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "GRAM_MOMENTS_THREADS";

const BLOCK: u64 = 1024;

type CMatrix = DMatrix<Complex<f64>>;

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
    /// Moment order, or `None` for application metrics.
    pub order: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `None` reads [`THREADS_ENV`] and otherwise uses
    /// every available core.
    pub workers: Option<usize>,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            workers: None,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }
}

/// Worker count from [`THREADS_ENV`], if set to a positive integer.
pub fn env_workers() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&w| w > 0)
}

#[derive(Debug, Clone, Copy, Default)]
struct Running {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Running {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Running) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 +=
            other.m2 + delta * delta * (self.count as f64 * other.count as f64 / total as f64);
        self.count = total;
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var / self.count as f64).sqrt()
    }
}

struct BlockResult {
    stats: Vec<Running>,
    singular: u64,
}

/// Runs `cfg.trials` trials of `statistic` on `spectrum` and returns one
/// `(mean, std_error)` pair per output of `statistic`.
///
/// `statistic` receives the sampled `S` and returns `stats` values, or
/// `None` when the sample is too ill-conditioned to evaluate; any such
/// sample fails the whole run with [`Error::SingularSample`].
pub fn mc_statistics<F>(
    spectrum: &Spectrum,
    cfg: &McConfig,
    stats: usize,
    statistic: F,
) -> Result<Vec<(f64, f64)>>
where
    F: Fn(&CMatrix) -> Option<Vec<f64>> + Sync,
{
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    let key = derive_key(cfg.seed, DOMAIN_TRIALS);
    let thetas = spectrum.thetas();
    let m = spectrum.m();
    let blocks = cfg.trials.div_ceil(BLOCK);
    let run_block = |b: u64| -> BlockResult {
        let mut out = BlockResult {
            stats: vec![Running::default(); stats],
            singular: 0,
        };
        let end = ((b + 1) * BLOCK).min(cfg.trials);
        for t in b * BLOCK..end {
            let mut g = GaussianStream::new(key, t);
            let s = sample_gram(thetas, m, &mut g);
            match statistic(&s) {
                Some(values) => {
                    for (acc, v) in out.stats.iter_mut().zip(values) {
                        acc.push(v);
                    }
                }
                None => out.singular += 1,
            }
        }
        out
    };
    let workers = cfg.workers.or_else(env_workers);
    let results: Vec<BlockResult> = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| (0..blocks).into_par_iter().map(run_block).collect()),
        None => (0..blocks).into_par_iter().map(run_block).collect(),
    };
    let singular: u64 = results.iter().map(|r| r.singular).sum();
    if singular > 0 {
        return Err(Error::SingularSample {
            count: singular,
            trials: cfg.trials,
            limit: SAMPLE_CONDITION_LIMIT,
        });
    }
    let mut total = vec![Running::default(); stats];
    for r in &results {
        for (acc, block) in total.iter_mut().zip(&r.stats) {
            acc.merge(block);
        }
    }
    Ok(total.iter().map(|r| (r.mean, r.std_error())).collect())
}

/// Draws `H` (`n x m`, i.i.d. unit-variance complex Gaussian) and returns
/// `H^* diag(thetas) H`, Hermitian by construction.
pub fn sample_gram(thetas: &[f64], m: usize, stream: &mut GaussianStream) -> CMatrix {
    let n = thetas.len();
    let h = stream.complex_matrix(n, m);
    let mut s = CMatrix::zeros(m, m);
    for j in 0..m {
        for i in 0..=j {
            let mut acc = Complex::new(0.0, 0.0);
            for k in 0..n {
                acc += h[(k, i)].conj() * h[(k, j)] * thetas[k];
            }
            s[(i, j)] = acc;
        }
        s[(j, j)].im = 0.0;
        for i in 0..j {
            s[(j, i)] = s[(i, j)].conj();
        }
    }
    s
}

fn trace_re(a: &CMatrix) -> f64 {
    a.diagonal().iter().map(|z| z.re).sum()
}

/// `S^{-1}` by Cholesky solves against the identity columns, or `None` if
/// `S` is not numerically positive definite or its condition number
/// exceeds [`SAMPLE_CONDITION_LIMIT`].
pub fn checked_inverse(s: &CMatrix) -> Option<CMatrix> {
    let m = s.nrows();
    let chol = s.clone().cholesky()?;
    let inv = chol.solve(&CMatrix::identity(m, m));
    // lambda_max <= Tr S and 1/lambda_min <= Tr S^{-1}
    let bound = trace_re(s) * trace_re(&inv);
    if !bound.is_finite() {
        return None;
    }
    if bound > SAMPLE_CONDITION_LIMIT {
        let ev = SymmetricEigen::new(s.clone()).eigenvalues;
        let lo = ev.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(lo > 0.0 && hi / lo <= SAMPLE_CONDITION_LIMIT) {
            return None;
        }
    }
    Some(inv)
}

fn trace_power(a: &CMatrix, power: usize) -> f64 {
    if power == 0 {
        return a.nrows() as f64;
    }
    let mut acc = a.clone();
    for _ in 1..power {
        acc = &acc * a;
    }
    trace_re(&acc)
}

/// `(1/m) Tr S^r` for each order, or `None` for a singular sample.
fn normalized_trace_powers(s: &CMatrix, orders: &[i64]) -> Option<Vec<f64>> {
    let m = s.nrows() as f64;
    let inv = if orders.iter().any(|&r| r < 0) {
        Some(checked_inverse(s)?)
    } else {
        None
    };
    Some(
        orders
            .iter()
            .map(|&r| {
                if r >= 0 {
                    trace_power(s, r as usize) / m
                } else {
                    trace_power(inv.as_ref().unwrap(), r.unsigned_abs() as usize) / m
                }
            })
            .collect(),
    )
}

/// Empirical `mu(r) = (1/m) Tr E S^r` for several orders from one run.
pub fn mc_empirical_moments(
    spectrum: &Spectrum,
    orders: &[i64],
    cfg: &McConfig,
) -> Result<Vec<MomentEstimate>> {
    let p = spectrum.p() as i64;
    if let Some(&bad) = orders.iter().find(|&&r| r < -p) {
        return Err(Error::OrderOutOfRange {
            order: bad,
            min: -p,
            max: i64::MAX,
        });
    }
    let stats = mc_statistics(spectrum, cfg, orders.len(), |s| {
        normalized_trace_powers(s, orders)
    })?;
    Ok(orders
        .iter()
        .zip(stats)
        .map(|(&r, (mean, std_error))| MomentEstimate {
            mean,
            std_error,
            trials: cfg.trials,
            seed: cfg.seed,
            order: Some(r),
        })
        .collect())
}

pub fn mc_empirical_moment(spectrum: &Spectrum, r: i64, cfg: &McConfig) -> Result<MomentEstimate> {
    Ok(mc_empirical_moments(spectrum, &[r], cfg)?[0])
}

/// Estimation-error functionals evaluated by [`mc_application_metric`].
#[derive(Debug, Clone)]
pub enum AppMetric {
    /// `Tr (H^* Lambda H)^{-1}` with `Lambda` the inverse noise covariance.
    Blue,
    /// `Tr (I / sigma_x2 + H^* Lambda H)^{-1}`.
    Lmmse { sigma_x2: f64 },
    /// `|| R^{1/2} Rhat^{-1} R^{1/2} - I ||_F^2` where `Rhat` is the weighted
    /// sample covariance of `u(k) = R^{1/2} h(k)`; `Lambda` carries the
    /// weights and `R = I` when `r` is `None`.
    Scm { r: Option<CMatrix> },
}

/// Principal square root of a Hermitian positive definite matrix.
fn hermitian_sqrt(a: &CMatrix) -> Result<CMatrix> {
    let eig = SymmetricEigen::new(a.clone());
    if let Some(bad) = eig.eigenvalues.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: *bad,
        });
    }
    let roots = eig.eigenvalues.map(|v| Complex::new(v.sqrt(), 0.0));
    let q = &eig.eigenvectors;
    Ok(q * CMatrix::from_diagonal(&roots) * q.adjoint())
}

pub fn mc_application_metric(
    spectrum: &Spectrum,
    metric: &AppMetric,
    cfg: &McConfig,
) -> Result<MomentEstimate> {
    let m = spectrum.m();
    let stats = match metric {
        AppMetric::Blue => mc_statistics(spectrum, cfg, 1, |s| {
            Some(vec![trace_re(&checked_inverse(s)?)])
        })?,
        AppMetric::Lmmse { sigma_x2 } => {
            if !(*sigma_x2 > 0.0 && sigma_x2.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "sigma_x2 must be positive, got {sigma_x2}"
                )));
            }
            let prior = 1.0 / sigma_x2;
            mc_statistics(spectrum, cfg, 1, |s| {
                let mut a = s.clone();
                for i in 0..m {
                    a[(i, i)].re += prior;
                }
                Some(vec![trace_re(&checked_inverse(&a)?)])
            })?
        }
        AppMetric::Scm { r } => {
            let root = match r {
                Some(r) => {
                    if r.nrows() != m || r.ncols() != m {
                        return Err(Error::Dimension(format!(
                            "R must be {m}x{m}, got {}x{}",
                            r.nrows(),
                            r.ncols()
                        )));
                    }
                    hermitian_sqrt(r)?
                }
                None => CMatrix::identity(m, m),
            };
            let eye = CMatrix::identity(m, m);
            mc_statistics(spectrum, cfg, 1, |s| {
                let rhat = &root * s * &root;
                let rhat = (&rhat + rhat.adjoint()) * Complex::new(0.5, 0.0);
                let inv = checked_inverse(&rhat)?;
                let whitened = &root * inv * &root - &eye;
                Some(vec![whitened.iter().map(|z| z.norm_sqr()).sum()])
            })?
        }
    };
    Ok(MomentEstimate {
        mean: stats[0].0,
        std_error: stats[0].1,
        trials: cfg.trials,
        seed: cfg.seed,
        order: None,
    })
}
