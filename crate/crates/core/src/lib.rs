pub mod apps;
pub mod compare;
pub mod costmodel;
pub mod emulator;
pub mod error;
pub mod exec;
pub mod io;
pub mod modmath;
pub mod negaring;
pub mod report;
pub mod sweep;
pub mod workloads;

pub use error::{Error, Result};
