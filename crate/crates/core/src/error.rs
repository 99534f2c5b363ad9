use thiserror::Error;

/// Errors raised by the environment model, the analytics and the policies.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid curve parameters: {0}")]
    InvalidCurve(String),
    #[error("invalid reward law: {0}")]
    InvalidLaw(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("optimal arm is not unique: arms {0} and {1} tie on the horizon average")]
    NonUniqueOptimum(usize, usize),
    #[error("arm index {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },
    #[error("round {round} outside [{lo}, {hi}]")]
    RoundOutOfRange { round: usize, lo: usize, hi: usize },
    #[error("arm {0} is the optimal arm; gaps are only defined for suboptimal arms")]
    OptimalArm(usize),
    #[error("sigma {sigma} below the complexity index {sigma_mu}")]
    SigmaBelowComplexity { sigma: usize, sigma_mu: usize },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("policy error: {0}")]
    Policy(String),
}

pub type Result<T> = std::result::Result<T, Error>;
