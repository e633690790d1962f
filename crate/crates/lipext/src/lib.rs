//! Harness around `lipext-core`: deterministic space and test-function
//! generators, file formats, the verification suite with its calibration
//! protocol, and the command-line front end.

pub mod calibration;
pub mod cli;
pub mod io;
pub mod spacegen;
pub mod suite;
pub mod testfn;
