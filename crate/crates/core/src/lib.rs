pub mod cq;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod relmodel;
pub mod varset;

pub use error::{Error, Result};
pub mod decomp;
pub mod consistency;
pub mod splitting;
pub mod enumerate;
pub mod pipeline;
pub mod oracle;
pub mod cli;
