use thiserror::Error;

use crate::instance::Time;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid node id {0}")]
    InvalidNode(usize),
    #[error("instance has no arcs")]
    EmptyArcSet,
    #[error("time {time} out of range for node {node} (horizon {horizon})")]
    TimeOutOfRange { node: usize, time: Time, horizon: Time },
    #[error("timed node ({node},{time}) is not in the partial network")]
    MissingTimedNode { node: usize, time: Time },
    #[error("time set violates required copies: {0}")]
    BadTimeSet(String),
    #[error("partial network property violated: {0}")]
    Property(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("fixed path set for commodity {0} has no usable origin-destination path")]
    NoUsablePath(usize),
    #[error("mps: {0}")]
    Mps(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("instance is infeasible within horizon {0}")]
    Infeasible(Time),
    #[error("augmentation found no new timed node")]
    NothingToAdd,
    #[error("limits exceeded: {0}")]
    LimitsExceeded(String),
    #[error("generator: {0}")]
    Generator(String),
    #[error("malformed schedule: {0}")]
    MalformedSchedule(String),
    #[error("config: {0}")]
    Config(String),
}
