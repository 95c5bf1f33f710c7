//! Crate-wide error type.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("p = {0} is not prime")]
    NonPrimeP(u64),

    #[error("modulus is not irreducible over Z_{p}")]
    ReducibleModulus { p: u64 },

    #[error("field size {size} exceeds the desk-scale cap {cap}")]
    SizeTooLarge { size: usize, cap: usize },

    #[error("operands belong to different fields")]
    MixedFields,

    #[error("function must be defined on all {expected} phase-space points, got {got}")]
    IncompleteDomain { expected: usize, got: usize },

    #[error("zero has no multiplicative inverse")]
    InverseOfZero,

    #[error("partition bin repeats a row or column of the array")]
    NotOneOverlapWithCartesian,

    #[error("partitions {0} and {1} have a bin pair meeting in {2} cells, not 1")]
    OneOverlapViolation(usize, usize, usize),

    #[error("latin squares {0} and {1} are not orthogonal")]
    NonOrthogonalSquares(usize, usize),

    #[error("need {expected} partitions, got {got}")]
    IncompleteFamily { expected: usize, got: usize },

    #[error("dimension mismatch: {a} vs {b}")]
    DimMismatch { a: usize, b: usize },

    #[error("matrix is not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),

    #[error("family fails the SIC trace identities (worst deviation {0:.3e})")]
    NotASic(f64),

    #[error("operators do not commute (commutator norm {0:.3e} exceeds {1:.3e})")]
    NotCommuting(f64, f64),

    #[error("not a d-partition: {0}")]
    BadPartition(String),

    #[error("matrix is not doubly stochastic: {0}")]
    NotDoublyStochastic(String),

    #[error("smearing rows violate the sphere/overlap conditions: {0}")]
    RowsNotOnSphere(String),

    #[error("need {expected} POVMs of {expected_outcomes} outcomes, got {got}")]
    WrongFamilySize {
        expected: usize,
        expected_outcomes: usize,
        got: usize,
    },

    #[error("input POVMs violate the required overlap identities: {0}")]
    IdentityViolation(String),

    #[error("construction requires field characteristic p != 2")]
    CharacteristicTwo,

    #[error("generator is not a state: {0}")]
    NotAState(String),

    #[error("schema violation: {0}")]
    SchemaViolation(String),

    #[error("i/o error on {path}: {source}")]
    FileIo {
        path: String,
        source: std::io::Error,
    },
}
