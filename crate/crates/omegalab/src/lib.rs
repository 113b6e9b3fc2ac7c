//! File formats, threading and the command-line front end for
//! [`omegalab_core`].

pub mod cli;
pub mod ledger_file;
pub mod parallel;
pub mod report;

pub use omegalab_core as core;
