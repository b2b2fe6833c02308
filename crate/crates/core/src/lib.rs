//! Multiple importance sampling with MCMC-driven proposal adaptation.
//!
//! The crate provides the building blocks (targets, proposal histories,
//! denominator schemes, recursive estimators, mean-adaptation kernels), the
//! complete samplers built on them, and a small benchmark harness.

pub mod adaptation;
pub mod bench;
pub mod error;
pub mod estimation;
pub mod numeric;
pub mod rng;
pub mod sample;
pub mod samplers;
pub mod targets;
pub mod weighting;

pub use error::{Error, Result};
pub use estimation::{Estimate, RunningEstimator};
pub use rng::RngStream;
pub use sample::WeightedSample;
pub use targets::{LogDensity, TargetModel};
pub use weighting::{Covariance, DenominatorScheme, ProposalComponent, ProposalHistory};
pub use samplers::{run, Algorithm, RunResult, SamplerConfig};
