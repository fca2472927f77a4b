//! Command-line front end for `qwires-core`: JSON file formats, run
//! configuration and one handler per subcommand.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
