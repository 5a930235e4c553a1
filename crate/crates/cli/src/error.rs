use creature_core::atoms::AtomError;
use creature_core::compound::CompoundError;
use creature_core::counting::CountingError;
use creature_core::exactnum::NumError;
use creature_core::frame::{FrameError, SlalomError};
use creature_core::sacks::SacksError;
use creature_core::subatoms::SubatomError;
use thiserror::Error;

use crate::doc::DocError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] DocError),
    #[error("{0}")]
    Usage(String),
    #[error("comparison undecided at {0} bits; rerun with --precision {next}", next = .0.saturating_mul(2))]
    Precision(u32),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Failed(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 2 for bad input, 3 for precision or budget, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Precision(_) | CliError::Budget(_) => 3,
            CliError::Failed(_) => 1,
        }
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

impl From<NumError> for CliError {
    fn from(e: NumError) -> Self {
        match e {
            NumError::Undecided(bits) => CliError::Precision(bits),
            NumError::BudgetExceeded => CliError::Budget(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SubatomError> for CliError {
    fn from(e: SubatomError) -> Self {
        match e {
            SubatomError::Num(n) => n.into(),
            SubatomError::TooLarge(s) => CliError::Budget(s),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SacksError> for CliError {
    fn from(e: SacksError) -> Self {
        match e {
            SacksError::Budget(s) => CliError::Budget(s),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<AtomError> for CliError {
    fn from(e: AtomError) -> Self {
        match e {
            AtomError::Num(n) => n.into(),
            AtomError::Subatom(s) => s.into(),
            AtomError::LemmaViolation(s) => CliError::Failed(s),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CountingError> for CliError {
    fn from(e: CountingError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SlalomError> for CliError {
    fn from(e: SlalomError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<FrameError> for CliError {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::Num(n) => n.into(),
            FrameError::Subatom(s) => s.into(),
            FrameError::Sacks(s) => s.into(),
            FrameError::Budget(s) => CliError::Budget(s),
            FrameError::LemmaViolation(s) => CliError::Failed(s),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CompoundError> for CliError {
    fn from(e: CompoundError) -> Self {
        match e {
            CompoundError::Num(n) => n.into(),
            CompoundError::Frame(f) => f.into(),
            CompoundError::Atom(a) => a.into(),
            CompoundError::Sacks(s) => s.into(),
            CompoundError::Subatom(s) => s.into(),
            CompoundError::LemmaViolation(s) => CliError::Failed(s),
            e => CliError::Usage(e.to_string()),
        }
    }
}
