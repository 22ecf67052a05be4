//! Canonical files, run manifests and the command pipelines behind the CLI.

pub mod commands;
pub mod format;
pub mod manifest;

pub use commands::{
    cmd_ainfty, cmd_build, cmd_dims, cmd_invariant, cmd_modulus, cmd_render, cmd_verify, verify_run, verify_step,
    write_report, AinftyOutput, Check, CheckRow, DimsOutput, Run,
};
pub use format::{read_drawing, read_graph, read_ledger, write_drawing, write_graph, write_ledger};
pub use manifest::{RunManifest, Timings};
