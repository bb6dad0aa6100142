//! Exact, asymptotic and Monte Carlo moments `mu(r) = (1/m) Tr E S^r` of
//! one-sided correlated Gram matrices `S = H^* Lambda H`, with their use in
//! BLUE/LMMSE error prediction and sample-covariance forgetting-factor tuning.

pub mod apps;
pub mod asymptotic;
pub mod error;
pub mod exact;
pub mod oracle;
pub mod registry;
pub mod rng;
pub mod scm;
pub mod special;
pub mod spectra;

pub use error::{Error, ErrorClass, Result};
pub use exact::{build_engine, DividedDifferenceEngine, EngineKind, ExactEngine, MomentEngine};
pub use oracle::{McConfig, MomentEstimate};
pub use registry::{Estimate, MethodContext, MethodRegistry, MomentMethod};
pub use spectra::{CorrelationMatrix, ModelTag, Spectrum};
