//! File formats: key-value text, binary signal files and CSV tables.

pub mod artifacts;
pub mod config;
pub mod kv;
pub mod manifest;
pub mod report;
pub mod signal_file;
pub mod table;
