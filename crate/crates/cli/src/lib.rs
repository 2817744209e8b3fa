//! Pipeline driver: each subcommand runs one wsdkit stage from a shared
//! TOML configuration.

pub mod commands;
pub mod config;
pub mod error;
