//! File formats, report rendering and the `wba` command line on top of
//! [`wba_core`].

pub mod cli;
pub mod io;
pub mod report;
