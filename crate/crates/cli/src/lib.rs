//! Configuration and drivers behind the `qmirror` command.

pub mod config;
pub mod run;
