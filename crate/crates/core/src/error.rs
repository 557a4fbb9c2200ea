use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid cyclotomic setup: {0}")]
    InvalidSetup(String),
    #[error("field of size {size} exceeds cap {cap}")]
    FieldTooLarge { size: u128, cap: u64 },
    #[error("could not completely factor {0}")]
    FactorizationFailure(u64),
    #[error("{a} is not coprime to {m}")]
    NotCoprime { a: u64, m: u64 },
    #[error("element is not in the subgroup of order p")]
    NotInSubgroup,
    #[error("eta_{index} - eta_0 is not a rational integer")]
    NonIntegralPeriod { index: u64 },
    #[error("eta_{index} - eta_0 is not divisible by q^v")]
    DivisibilityFailure { index: u64 },
    #[error("eigenspace index r={r} must be even with 2 <= r <= {max}")]
    BadEigenspaceIndex { r: u64, max: u64 },
    #[error("missing index i_{{p-ln}} for l={l}")]
    MissingIndex { l: u64 },
    #[error("bad prime {0}: expected p > 3 with p = 3 mod 4")]
    BadPrime(u64),
    #[error("bad discriminant {0}")]
    BadDiscriminant(i64),
    #[error("exhaustive search over {iterations} values exceeds guard {guard}")]
    SearchTooLarge { iterations: u128, guard: u64 },
    #[error("exponent must be odd")]
    EvenExponent,
    #[error("no witness prime found up to {0}")]
    NoWitnessFound(u64),
    #[error("({x}, {y}) is not a representation of {n} by x^2 + {d}y^2")]
    NotARepresentation { d: u64, n: String, x: String, y: String },
    #[error("bound {0} is too small")]
    BoundTooSmall(u64),
    #[error("only {found} of {wanted} primes found up to {bound}")]
    BoundExhausted { found: usize, wanted: usize, bound: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

impl Error {
    /// True for failures that indicate a bug or a violated theorem rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::InternalInvariant(_)
                | Error::NonIntegralPeriod { .. }
                | Error::DivisibilityFailure { .. }
                | Error::NotInSubgroup
        )
    }

    /// Resource exhaustion: the mathematics guarantees an answer, the bounds did not reach it.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::NoWitnessFound(_) | Error::BoundExhausted { .. })
    }
}
