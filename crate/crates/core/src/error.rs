use thiserror::Error;

/// Errors raised by the library. Variants map onto the CLI's "domain error"
/// exit status.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("invalid permutation: {0}")]
    Permutation(String),

    #[error("group closure exceeds the bound of {bound} elements")]
    GroupTooLarge { bound: usize },

    #[error("subgroup enumeration refused: |G| = {order} exceeds the bound {bound}")]
    SubgroupBound { order: usize, bound: usize },

    #[error("element is not in the group: {0}")]
    NotInGroup(String),

    #[error("not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("field descriptor: {0}")]
    Field(String),

    #[error("twist datum: {0}")]
    Twist(String),

    #[error("raising function: {0}")]
    Raising(String),

    #[error("unsupported stack: {0}")]
    Unsupported(String),

    #[error("raised line bundle is not big: {0}")]
    NotBig(String),

    #[error("stack has no twisted sector")]
    NoTwistedSector,

    #[error("inadequate raising function: {0}")]
    Inadequate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("fit: {0}")]
    Fit(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
