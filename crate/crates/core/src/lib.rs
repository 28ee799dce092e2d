//! Latent-class rating model with Bayesian active learning for rating elicitation.
//!
//! The crate trains an aspect model (a mixture of per-class Gaussian rating
//! densities weighted by a per-user class simplex) on a collection of
//! (user, item, rating) triples, approximates the posterior over a new user's
//! class membership with a Dirichlet distribution, and selects rating queries
//! by minimizing a Bayesian expected loss computed in closed form from
//! Dirichlet moment identities. Random, model-entropy, and prediction-entropy
//! selection policies are included for comparison, together with a simulated
//! elicitation session runner.
//!
//! The crate is `no_std` + `alloc`; file formats, configuration, and the CLI
//! live in the companion `elicit-cli` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod active;
pub mod dataset;
pub mod error;
pub mod math;
pub mod model;
pub mod session;
pub mod strategies;
pub mod verify;

pub use active::{dirichlet_posterior, fast_update, fold_in, ActiveUserState, DirichletParams, FoldConfig};
pub use dataset::{
    generate_synthetic, normalize, split_protocol, Dataset, ExperimentSplit, NormalizedRatings,
    RatingTriple, SynthConfig, Synthetic, TestUserSplit, UserNormStats,
};
pub use math::digamma;
pub use model::{
    log_likelihood, predict_rating, rating_distribution, rating_likelihood, train_em, AspectModel,
    RatingWeights, TrainConfig, TrainOutcome,
};
pub use session::{
    mae, run_session, session_seed, ResultsRow, ResultsTable, RoundRecord, SessionConfig,
    SessionLog,
};
pub use strategies::{
    entropy, loss_bayesian, loss_model_entropy, loss_prediction_entropy, mc_expected_loss,
    select_item, LossReport, StrategyKind,
};

/// Internal ids are dense `0..num_users` / `0..num_items` integers.
pub type UserId = u32;
pub type ItemId = u32;
