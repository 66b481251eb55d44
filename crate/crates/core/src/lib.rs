//! Reading, checking and optimizing Firm program graphs exchanged as GXL.
//!
//! The processing pipeline is
//!
//! ```text
//! bytes --gxl::parse_gxl--> GxlDocument --bridge::decode--> FirmGraph
//!       --verify::check--> diagnostics
//!       --opt::optimize--> FirmGraph --bridge::encode--> GxlDocument --gxl::serialize_gxl--> bytes
//! ```
//!
//! [`interp`] is a small reference evaluator used to check that the
//! optimizer preserves the meaning of loop-free programs, and [`dot`]
//! renders graphs for inspection.

pub mod bridge;
pub mod cli;
pub mod diag;
pub mod dot;
pub mod firm;
pub mod gxl;
pub mod interp;
pub mod opt;
pub mod verify;

pub use diag::{Diagnostic, Severity, SourceLocation};
