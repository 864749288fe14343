//! Library side of the `bridgekit` command: file formats, solver dispatch,
//! re-verification and text reports.

pub mod bundle;
pub mod error;
pub mod run;
pub mod summary;
pub mod verify;
