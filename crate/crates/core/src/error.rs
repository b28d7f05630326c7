use thiserror::Error;

/// Errors produced by the arithmetic, field and verdict routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {0} exceeds the supported range (deterministic primality is exact below 2^64)")]
    UnsupportedRange(String),

    #[error("cannot certify the square-free part of {n}: unfactored cofactor {cofactor} exceeds the trial-division bound {bound}")]
    FactorBound { n: i64, cofactor: u64, bound: u64 },

    #[error("zero is not a valid input to {0}")]
    Zero(&'static str),

    #[error("moduli {first} and {second} (positions {i} and {j}) are not coprime")]
    InvalidModuli {
        i: usize,
        j: usize,
        first: String,
        second: String,
    },

    #[error("invalid radicand {0}: must be nonzero and not a perfect square")]
    InvalidRadicand(i64),

    #[error("prime {p} ramifies in Q(sqrt({d}))")]
    Ramified { p: u64, d: i64 },

    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("operation requires a {expected} quadratic field, got radicand {d}")]
    Signature { expected: &'static str, d: i64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("analytic class number for discriminant {discriminant} not within {tolerance} of an integer at {bits} bits (value {value})")]
    Precision {
        discriminant: i64,
        bits: usize,
        value: String,
        tolerance: f64,
    },

    #[error("no admissible moduli: window [{lo}, {hi}] holds fewer than {count} pairwise-coprime integers coprime to the shifts")]
    InfeasibleWindow { lo: u64, hi: u64, count: usize },

    #[error("no prime up to {limit} in the progression {residue} mod {modulus} ({steps} terms scanned)")]
    Exhausted {
        limit: u64,
        residue: String,
        modulus: String,
        steps: u64,
    },

    #[error("radicands are multiplicatively dependent: {0}")]
    Degenerate(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("fixture schema mismatch: {0}")]
    Schema(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
