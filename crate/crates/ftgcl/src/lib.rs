//! Self-supervised graph representation learning with feature- and
//! topology-proximity views and a channel-level contrastive objective.

pub mod error;
pub mod graph;

pub use error::{Error, Result};
