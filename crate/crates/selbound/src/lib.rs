//! Command-line tool, file formats and parallel drivers for `selbound-core`.
//!
//! The library half exists so the CLI can be driven from tests; the binary
//! just forwards `std::env::args_os()` to [`cli::run`].

pub mod cli;
pub mod error;
pub mod fmt;
pub mod input;
pub mod par;
pub mod report;

pub use cli::run;
pub use error::CliError;
