//! False discovery proportion toolkit: mixture models for p-values, FDP and
//! FNP processes, estimators of the mixture components, thresholding rules,
//! confidence envelopes for the FDP process, and a Monte Carlo harness.

pub mod envelopes;
pub mod error;
pub mod estimation;
pub mod examples;
pub mod kernels;
pub mod model;
pub mod normal;
pub mod numeric;
pub mod rng;
pub mod sample;
pub mod simulation;
pub mod step;
pub mod thresholds;

pub use error::{FdpError, Result};
pub use model::{AlternativeDistribution, AlternativeFamily, MixtureModel};
pub use sample::{classify, fdp_process, fnp_process, CountsTable, LabeledSample};
pub use step::StepFunction;
