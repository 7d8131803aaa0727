use thiserror::Error;

use crate::netmap::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulation order {0} is not a power of two >= 2")]
    InvalidOrder(usize),
    #[error("message {symbol} out of range for order {order}")]
    SymbolOutOfRange { symbol: usize, order: usize },
    #[error("{re}{im:+}i is not a constellation point")]
    NotAConstellationPoint { re: f64, im: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("network map violates the exclusive law: {0}")]
    ExclusiveLaw(Violation),
    #[error("map file: {0}")]
    MapParse(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("diversity fit needs at least two qualifying points, found {0}")]
    InsufficientPoints(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
