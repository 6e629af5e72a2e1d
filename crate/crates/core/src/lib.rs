//! Latent-factor embedding of networks that carry both pairwise links and
//! higher-order hyperlinks.

pub mod augment;
pub mod error;
pub mod eval;
pub mod io;
pub mod model;
pub mod optim;
pub mod simgen;
pub mod study;

pub use error::{Error, Result};
pub use model::{Concordance, HyperObservations, LatentFactors, ModelConfig, OptimizerConfig, PairObservations};
pub use optim::{FitReport, Method};
