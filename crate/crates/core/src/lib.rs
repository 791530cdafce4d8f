//! Randomized neural network classifiers trained in closed form.
//!
//! Three single-hidden-layer networks with fixed random hidden weights are
//! provided: the extreme learning machine ([`rnn::Variant::Elm`]), the random
//! vector functional link network ([`rnn::Variant::Rvfl`]) and the Schmidt
//! network ([`rnn::Variant::Snn`]). Their output weights are the minimum-norm
//! least-squares solution from [`linalg::solve_min_norm`]. [`ensemble`] combines
//! one of each by majority vote, and [`cv`] evaluates any of these heads with
//! stratified k-fold cross-validation.
//!
//! The `parallel` feature (on by default) runs matrix rows, ensemble members
//! and folds on the rayon pool. Results are identical with the feature off.

pub mod cv;
pub mod data_io;
pub mod ensemble;
pub mod error;
mod exec;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod rnn;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
pub use exec::is_parallel;
