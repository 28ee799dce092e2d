//! IO companion to `elicit-core`: the rating-file loader, the flat-text
//! model format, experiment configuration, and the experiment runner used
//! by the `elicit` binary.

pub mod config;
pub mod experiment;
pub mod loader;
pub mod model_io;

pub use config::{DataSource, ExperimentConfig, FileFormat};
pub use experiment::{run_experiment, write_outputs, ExperimentOutput};
pub use loader::load_dataset;
pub use model_io::{load_model, save_model};
