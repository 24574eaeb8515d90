//! Command implementations behind the `curv4` binary and the acceptance suite.

pub mod commands;
pub mod manifest;
pub mod suite;

pub use commands::run;

#[cfg(test)]
mod tests;
