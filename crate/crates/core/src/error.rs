//! Error types, one enum per module.

use core::fmt;

use crate::{ItemId, UserId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DatasetError {
    /// No ratings at all.
    Empty,
    /// Rating scale must be at least 2.
    InvalidScale(u32),
    /// A rating fell outside `[1, R]`.
    RatingOutOfScale { user: UserId, item: ItemId, rating: u32, scale: u32 },
    /// The same (user, item) pair was rated twice.
    DuplicatePair { user: UserId, item: ItemId },
    /// A triple referenced an id outside the declared dense range.
    IdOutOfRange { user: UserId, item: ItemId },
    /// A declared user has no ratings.
    UserWithoutRatings(UserId),
    /// Synthetic generator configuration is unusable.
    InvalidSynthConfig(&'static str),
    /// Fewer users available than the split requested for training.
    NotEnoughUsers { available: usize, requested: usize },
    /// Every test user was excluded by the seed/holdout requirement.
    NoEligibleTestUsers,
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError::Empty => write!(f, "no ratings"),
            DatasetError::InvalidScale(r) => write!(f, "rating scale must be >= 2, got {r}"),
            DatasetError::RatingOutOfScale { user, item, rating, scale } => write!(
                f,
                "rating out of scale: user {user} item {item} rating {rating} not in [1, {scale}]"
            ),
            DatasetError::DuplicatePair { user, item } => {
                write!(f, "duplicate (user, item) pair: ({user}, {item})")
            }
            DatasetError::IdOutOfRange { user, item } => {
                write!(f, "triple ({user}, {item}) references an id outside the dense range")
            }
            DatasetError::UserWithoutRatings(u) => write!(f, "user {u} has no ratings"),
            DatasetError::InvalidSynthConfig(msg) => write!(f, "invalid synthetic config: {msg}"),
            DatasetError::NotEnoughUsers { available, requested } => {
                write!(f, "requested {requested} training users but only {available} exist")
            }
            DatasetError::NoEligibleTestUsers => write!(f, "no eligible test users"),
        }
    }
}

impl core::error::Error for DatasetError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    /// K must be at least 1.
    InvalidClassCount(usize),
    EmptyDataset,
    UnknownItem(ItemId),
    UnknownUser(UserId),
    UnknownClass(usize),
    /// Serialized or hand-built parameters violate a model invariant.
    InvalidParameters(&'static str),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::InvalidClassCount(k) => write!(f, "class count must be >= 1, got {k}"),
            ModelError::EmptyDataset => write!(f, "empty dataset"),
            ModelError::UnknownItem(x) => write!(f, "unknown item id {x}"),
            ModelError::UnknownUser(y) => write!(f, "unknown user id {y}"),
            ModelError::UnknownClass(z) => write!(f, "unknown class index {z}"),
            ModelError::InvalidParameters(msg) => write!(f, "invalid model parameters: {msg}"),
        }
    }
}

impl core::error::Error for ModelError {}

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyError {
    /// Entropy is undefined for negative weights.
    NegativeWeight(f64),
    EmptyPool,
    UnknownItem(ItemId),
    /// Dirichlet hyperparameters must all be >= 1.
    InvalidAlpha(f64),
    /// Unrecognized strategy name.
    UnknownStrategy(alloc::string::String),
}

impl fmt::Display for StrategyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyError::NegativeWeight(w) => write!(f, "negative weight {w}"),
            StrategyError::EmptyPool => write!(f, "empty candidate pool"),
            StrategyError::UnknownItem(x) => write!(f, "unknown item id {x}"),
            StrategyError::InvalidAlpha(a) => write!(f, "invalid Dirichlet hyperparameter {a}"),
            StrategyError::UnknownStrategy(s) => write!(
                f,
                "unknown strategy '{s}' (expected random, model_entropy, prediction_entropy, or bayesian)"
            ),
        }
    }
}

impl core::error::Error for StrategyError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SessionError {
    /// MAE over zero pairs is undefined.
    EmptyInput,
    LengthMismatch { predictions: usize, truths: usize },
    EmptyCandidatePool(UserId),
}

impl fmt::Display for SessionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionError::EmptyInput => write!(f, "empty prediction/truth lists"),
            SessionError::LengthMismatch { predictions, truths } => {
                write!(f, "length mismatch: {predictions} predictions vs {truths} truths")
            }
            SessionError::EmptyCandidatePool(u) => {
                write!(f, "user {u} has an empty candidate pool")
            }
        }
    }
}

impl core::error::Error for SessionError {}
