//! Experiment registry, reference-chain cache and artifact writers behind the
//! `jdld` command-line tool.

pub mod cache;
pub mod config;
pub mod experiments;
pub mod output;
pub mod targets;

use std::path::PathBuf;

/// Environment variable naming the root directory for all artifacts.
pub const OUTPUT_ROOT_VAR: &str = "JDLD_OUTPUT_ROOT";

pub fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map_or_else(|| PathBuf::from("jdld-output"), PathBuf::from)
}
