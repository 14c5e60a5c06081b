use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The frequency-domain channel product has significant off-diagonal
    /// energy. Happens when the channel memory exceeds the cyclic prefix.
    #[error("frequency-domain channel is not diagonal (off-diagonal {off_diagonal:e} vs diagonal {diagonal:e})")]
    NotDiagonal { off_diagonal: f64, diagonal: f64 },

    #[error("channel taps are numerically zero")]
    DegenerateChannel,

    #[error("null space has dimension {found}, expected {expected}")]
    RankDeficient { expected: usize, found: usize },

    #[error("positive power budget {budget} but every gain is zero")]
    AllZeroGains { budget: f64 },

    #[error("power budget must be finite and non-negative, got {0}")]
    InvalidBudget(f64),

    /// Bob is no stronger than Eve on any subchannel, so the secrecy
    /// allocation has nothing to assign.
    #[error("no subchannel has a positive Bob-over-Eve gain gap")]
    NoPositiveGap,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("sweep value {value} is invalid: {reason}")]
    InvalidSweep { value: f64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
