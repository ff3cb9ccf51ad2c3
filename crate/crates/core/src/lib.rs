//! Bayesian optimization over combinatorial and mixed spaces. The acquisition
//! function is maximized by an inhomogeneous MCMC chain that only needs draws
//! from the surrogate's posterior predictive.

pub mod acquisition;
pub mod baselines;
pub mod benchmarks;
pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod par;
pub mod sampler;
pub mod space;
pub mod surrogate;

/// Generator used throughout; seeded explicitly everywhere.
pub type Prng = rand_chacha::ChaCha8Rng;

pub use acquisition::{UtilityKind, UtilitySpec};
pub use data::{Dataset, Sense};
pub use error::{Error, Result};
pub use par::Execution;
pub use sampler::{run_sbbo, CoolingSchedule, SbboConfig, Variant};
pub use space::{Domain, Point, Proposal, SpaceSpec};
pub use surrogate::{PredictiveSampler, Surrogate};
