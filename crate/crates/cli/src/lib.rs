//! Configuration loading, experiment scenarios, sensitivity optimisation and
//! report generation for the `smpd` command-line tool.

pub mod config;
pub mod optimize;
pub mod report;
pub mod scenario;
