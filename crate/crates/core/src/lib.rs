//! Joint communication and computing design for IRS-assisted wideband mobile
//! edge computing, with a practical frequency-dependent IRS reflection model.

pub mod bcd;
pub mod comm;
pub mod compute;
pub mod error;
pub mod experiment;
pub mod reflection;
pub mod scenario;
pub mod trace;

pub use error::{Error, Result};
