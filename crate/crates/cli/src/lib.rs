//! Command-line front end: the expression mini-language and the subcommands.

pub mod app;
pub mod build;
pub mod spec;
