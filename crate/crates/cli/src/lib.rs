//! Command-line front end: problem configs, sample ingestion, and run
//! artifacts. The binary in `main.rs` is a thin argument layer over these
//! modules, which integration tests drive directly.

pub mod artifacts;
pub mod config;
pub mod ingest;
