pub mod cli;
pub mod codec;
pub mod conditions;
pub mod corpus;
pub mod distinguishability;
pub mod entanglement;
pub mod error;
pub mod protocols;
pub mod qstate;
pub mod verdict;

pub use error::{Error, Result};
