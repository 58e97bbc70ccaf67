//! Library surface of the command-line harness, exposed so integration
//! tests and the self-check battery can drive the same code paths as the
//! binary.

pub mod commands;
pub mod config;
pub mod suite;
