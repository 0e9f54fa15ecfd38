//! Library surface of the `cplab` binary: config parsing, pipeline
//! execution, and manifest verification, kept importable for the
//! integration and acceptance suites.

pub mod config;
pub mod manifest;
pub mod pipelines;
