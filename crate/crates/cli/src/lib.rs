//! File formats and serialization for the `mkabe` command-line tool.

pub mod formats;
