use cstar_estimation::Error;

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("invalid input: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
    #[error("failed invariants: {}", .0.join(", "))]
    CheckFailed(Vec<String>),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Schema(_) | Failure::Output(_) => 2,
            Failure::CheckFailed(_) => 1,
            Failure::Core(e) => match e {
                Error::OutOfDomain(_) => 3,
                Error::NonStationary { .. } => 5,
                Error::NotInvertible(_)
                | Error::VanishingNormalization(_)
                | Error::UnsolvableSld { .. }
                | Error::RankDeficient { .. }
                | Error::NotRegular { .. }
                | Error::Singular { .. }
                | Error::TooLarge(_) => 4,
                _ => 2,
            },
        }
    }
}
