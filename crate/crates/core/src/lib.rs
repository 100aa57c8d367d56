//! Station-level demand forecasting with graph convolutional networks.
//!
//! The crate covers the whole pipeline: trip ingestion, station graph
//! construction, a small reverse-mode autodiff engine, feedforward and
//! recurrent GCNN models with a learnable graph filter, training and grid
//! search, and analysis of the learned filter as a weighted graph.

pub mod analysis;
pub mod autodiff;
pub mod config;
pub mod container;
pub mod graph;
pub mod ingest;
pub mod models;
pub mod pipeline;
pub mod synthetic;
pub mod training;

mod error;

pub use error::{Error, Result};
