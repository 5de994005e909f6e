pub mod config;
pub mod design;
pub mod emulator;
pub mod error;
pub mod experiment;
pub mod kernels;
pub mod linalg;
pub mod mcmc;
pub mod metrics;
pub mod pde;
pub mod posterior;
pub mod report;
pub mod svg;

pub use error::{Error, Result};
