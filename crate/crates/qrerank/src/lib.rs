//! Corpus IO, file formats, configuration and experiment orchestration
//! on top of [`qrerank_core`].

pub mod config;
pub mod data;
pub mod error;
pub mod experiment;
pub mod formats;

pub use config::RunConfig;
pub use data::{load_corpus, Corpus};
pub use error::{Error, Result};
pub use experiment::{run_experiment, Report};
