//! Library surface of the `tlou` command-line tool: configuration, file
//! formats and the subcommand implementations. The binary in `main.rs` is a
//! thin argument-parsing layer over this.

pub mod commands;
pub mod config;
pub mod io;
