use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("chaotic map stuck on a degenerate orbit after {retries} reseeds (seed {seed})")]
    DegenerateSequence { seed: u64, retries: u32 },

    #[error("cannot normalize a zero-energy sequence")]
    ZeroEnergy,

    #[error("non-physical KKT update: {0}")]
    NonPhysicalUpdate(&'static str),

    #[error("ratio appears unbounded: no q with F(q) < 0 after {0} doublings")]
    UnboundedRatio(u32),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
