pub mod bench;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod graph;
pub mod instance;
pub mod lp;
pub mod milp;
pub mod schedule;

pub use error::{Error, Result};
