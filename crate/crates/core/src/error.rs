use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("object {object} has no reachable source from node {node}")]
    UnreachableSource { object: usize, node: usize },

    #[error("infeasible operating point: {0}")]
    Infeasible(String),

    #[error("simulation stalled at t={time}: {outstanding} requests outstanding and no pending events")]
    Stalled { time: f64, outstanding: usize },

    #[error("livelock guard tripped at t={time} after {events} events with {outstanding} requests outstanding")]
    Livelock {
        time: f64,
        events: u64,
        outstanding: usize,
    },

    #[error("incomplete metrics log: {generated} generated, {fulfilled} fulfilled")]
    IncompleteLog { generated: usize, fulfilled: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
