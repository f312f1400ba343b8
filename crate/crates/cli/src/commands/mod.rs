//! Subcommand implementations. Each takes a resolved configuration, writes
//! its artifacts and returns the computed data.

pub mod estimate;
pub mod factorize;
pub mod fit;
pub mod simulate;
