//! File formats, reports and the `misaw` command line on top of
//! [`misaw_core`].

pub mod app;
pub mod discrete;
pub mod error;
pub mod interval;
pub mod kinematic;
pub mod merge;
pub mod report;
pub mod results;
pub mod tsv;

pub use error::{CliError, Issue, IssueKind, ParseErrors};
