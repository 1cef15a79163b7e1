//! Library surface of the CLI: config schemas, report writers and command
//! runners, shared by the binary and the test suites.

pub mod commands;
pub mod config;
pub mod report;
