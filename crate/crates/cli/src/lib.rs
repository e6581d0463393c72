//! IO, file formats, configuration, the external-provider client and the
//! subcommand implementations behind the `xbridge` binary.

pub mod commands;
pub mod config;
pub mod formats;
pub mod llm;
