//! Training: the distribution-aware prior, the penalized likelihood
//! objective with analytic gradient, and L-BFGS ascent.

mod lbfgs;
mod objective;
mod prior;
mod train;

pub use lbfgs::{maximize, IterRecord, LbfgsOptions};
pub use objective::{compile_training, objective_and_gradient, CompiledExample};
pub use prior::{compute_prior_weights, PriorWeights};
pub use train::{train, TrainConfig, TrainOutcome};
