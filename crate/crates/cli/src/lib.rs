//! Command-line front end: the document format, the subcommands and the
//! lemma-verification harness.

pub mod app;
pub mod doc;
pub mod error;
pub mod spec;
pub mod verify;

pub use app::{run, Output};
pub use error::CliError;
pub use spec::SpecDocument;
