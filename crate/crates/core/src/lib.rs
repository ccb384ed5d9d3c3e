//! Makespan minimization for unit packet routing over time-expanded networks,
//! solved by dynamic discretization discovery.

pub mod bench;
pub mod ddd;
pub mod error;
pub mod expand;
pub mod gen;
pub mod instance;
pub mod models;
pub mod schedule;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{Instance, InstanceBuilder, NodeId, Time};
pub use schedule::{Move, Schedule, Trajectory};
