use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("generator set is empty")]
    EmptyGenerators,
    #[error("set must contain 0")]
    MissingZero,
    #[error("duplicate element {0}")]
    DuplicateElement(u64),
    #[error("set is not 3-free: {x}, {y}, {z} is an arithmetic progression")]
    NotThreeFree { x: u64, y: u64, z: u64 },
    #[error("count limit {limit} is smaller than the {generators} generators")]
    CountLimitTooSmall { limit: usize, generators: usize },
    #[error("value limit {limit} is below the largest generator {max}")]
    ValueLimitTooSmall { limit: u64, max: u64 },
    #[error("cover status of {value} is not final (horizon {horizon})")]
    BeyondHorizon { value: u64, horizon: u64 },
    #[error("sample index {index} is outside 2..{len}")]
    SampleOutOfRange { index: usize, len: usize },
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("element {element} is outside 0..{modulus}")]
    ElementOutOfRange { element: u64, modulus: u64 },
    #[error("modulus {modulus} exceeds the enumeration budget {max}")]
    BudgetExceeded { modulus: u64, max: u64 },
    #[error("prefix has {have} terms, {needed} required")]
    PrefixTooShort { needed: usize, have: usize },
    #[error("tensor product violated an invariant: {0}")]
    TensorInvariant(String),
    #[error("even character {0} is not handled by the symbolic prover")]
    EvenCharacter(u32),
    #[error("character must be positive")]
    ZeroCharacter,
    #[error("i/o error: {0}")]
    Io(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
