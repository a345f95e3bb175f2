//! Static analysis for Jupyter notebooks and the Python scripts next to them.

pub mod cli;
pub mod dataflow;
pub mod deprecation;
pub mod diagnostic;
pub mod frontend;
pub mod notebook;
pub mod pipeline;
pub mod report;
pub mod style;

pub use diagnostic::{Category, Diagnostic, Location, Severity};
