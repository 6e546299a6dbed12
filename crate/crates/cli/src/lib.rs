//! Parsing, rendering, and error plumbing for the command-line front end.
//! The binary in `main.rs` is a thin dispatcher over these modules.

pub mod aut;
pub mod dot;
pub mod error;
pub mod systemfile;
