//! Scenario front end: config parsing, assembly and report emission.

pub mod config;
pub mod report;
pub mod scenario;
