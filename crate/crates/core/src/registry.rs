//! Named moment-computation methods behind one trait.
//!
//! The CLI selects a method by name; every method answers the same question
//! (`mu(r)` for a list of orders on one spectrum) and reports a standard
//! error and trial count when it is statistical.

use crate::asymptotic::{solve_fixed_point, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::exact::{build_engine, EngineKind};
use crate::oracle::{mc_empirical_moments, McConfig};
use crate::spectra::Spectrum;

/// One moment value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub order: i64,
    pub value: f64,
    pub std_error: Option<f64>,
    pub trials: Option<u64>,
}

impl Estimate {
    fn closed_form(order: i64, value: f64) -> Self {
        Self {
            order,
            value,
            std_error: None,
            trials: None,
        }
    }
}

/// Settings shared by all methods; closed-form methods ignore them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodContext {
    pub trials: u64,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl Default for MethodContext {
    fn default() -> Self {
        Self {
            trials: 100_000,
            seed: 42,
            workers: None,
        }
    }
}

pub trait MomentMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn is_statistical(&self) -> bool {
        false
    }
    fn moments(
        &self,
        spectrum: &Spectrum,
        orders: &[i64],
        ctx: &MethodContext,
    ) -> Result<Vec<Estimate>>;
}

/// Closed form on either exact engine.
pub struct ExactMethod {
    name: &'static str,
    description: &'static str,
    kind: EngineKind,
}

impl MomentMethod for ExactMethod {
    fn name(&self) -> &'static str {
        self.name
    }

    fn description(&self) -> &'static str {
        self.description
    }

    fn moments(
        &self,
        spectrum: &Spectrum,
        orders: &[i64],
        _ctx: &MethodContext,
    ) -> Result<Vec<Estimate>> {
        let engine = build_engine(spectrum, self.kind)?;
        orders
            .iter()
            .map(|&r| Ok(Estimate::closed_form(r, engine.moment(r)?)))
            .collect()
    }
}

/// Deterministic equivalent; negative orders only.
pub struct AsymptoticMethod;

impl MomentMethod for AsymptoticMethod {
    fn name(&self) -> &'static str {
        "asymptotic"
    }

    fn description(&self) -> &'static str {
        "large-dimension deterministic equivalent of the inverse moments"
    }

    fn moments(
        &self,
        spectrum: &Spectrum,
        orders: &[i64],
        _ctx: &MethodContext,
    ) -> Result<Vec<Estimate>> {
        if let Some(&bad) = orders.iter().find(|&&r| r >= 0) {
            return Err(Error::OrderOutOfRange {
                order: bad,
                min: i64::MIN,
                max: -1,
            });
        }
        let deepest = orders
            .iter()
            .map(|r| r.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let state = solve_fixed_point(spectrum, DEFAULT_TOL, DEFAULT_MAX_ITER)?
            .compute_derivatives(deepest.saturating_sub(1))?;
        orders
            .iter()
            .map(|&r| {
                Ok(Estimate::closed_form(
                    r,
                    state.inverse_moment(r.unsigned_abs() as usize)?,
                ))
            })
            .collect()
    }
}

/// Monte Carlo sample average.
pub struct MonteCarloMethod;

impl MomentMethod for MonteCarloMethod {
    fn name(&self) -> &'static str {
        "monte-carlo"
    }

    fn description(&self) -> &'static str {
        "sample average of (1/m) Tr S^r over independent draws"
    }

    fn is_statistical(&self) -> bool {
        true
    }

    fn moments(
        &self,
        spectrum: &Spectrum,
        orders: &[i64],
        ctx: &MethodContext,
    ) -> Result<Vec<Estimate>> {
        let cfg = McConfig {
            trials: ctx.trials,
            seed: ctx.seed,
            workers: ctx.workers,
        };
        Ok(mc_empirical_moments(spectrum, orders, &cfg)?
            .into_iter()
            .zip(orders)
            .map(|(e, &r)| Estimate {
                order: r,
                value: e.mean,
                std_error: Some(e.std_error),
                trials: Some(e.trials),
            })
            .collect())
    }
}

pub struct MethodRegistry {
    methods: Vec<Box<dyn MomentMethod>>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        Self {
            methods: Vec::new(),
        }
    }

    /// `exact`, `vandermonde`, `asymptotic` and `monte-carlo`.
    pub fn with_defaults() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(ExactMethod {
            name: "exact",
            description: "closed form through stable divided differences",
            kind: EngineKind::DividedDifference,
        }));
        reg.register(Box::new(ExactMethod {
            name: "vandermonde",
            description: "closed form through the explicit Vandermonde inverse and cofactors",
            kind: EngineKind::Vandermonde,
        }));
        reg.register(Box::new(AsymptoticMethod));
        reg.register(Box::new(MonteCarloMethod));
        reg
    }

    /// Adds a method, replacing any earlier one of the same name.
    pub fn register(&mut self, method: Box<dyn MomentMethod>) {
        self.methods.retain(|m| m.name() != method.name());
        self.methods.push(method);
    }

    pub fn get(&self, name: &str) -> Result<&dyn MomentMethod> {
        self.methods
            .iter()
            .find(|m| m.name() == name)
            .map(|m| m.as_ref())
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown method '{name}', expected one of: {}",
                    self.names().join(", ")
                ))
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.iter().map(|m| m.name()).collect()
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}
