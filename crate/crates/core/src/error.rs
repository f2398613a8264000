use thiserror::Error;

/// Library-wide error type. Arithmetic never silently loses precision:
/// any operation that would need digits beyond the working precision
/// reports `PrecisionExhausted` instead of returning a wrong value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ring spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("element is not a unit (valuation {val} > 0)")]
    NotAUnit { val: usize },
    #[error("element is zero at working precision")]
    ZeroElement,
    #[error("subdegree {sub} does not divide extension degree {deg}")]
    DegreeMismatch { sub: usize, deg: usize },
    #[error("working precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("unknown group tag `{0}`")]
    UnknownGroup(String),
    #[error("invalid standard Levi: {0}")]
    InvalidLevi(String),
    #[error("word does not lie in the Iwahori subgroup: {0}")]
    NotInIwahori(String),
    #[error("element is outside the big cell (singular pivot)")]
    NotInCell,
    #[error("element is outside the type subgroup: {0}")]
    NotInType(String),
    #[error("conductor threshold set is not a closed subsystem: {0}")]
    NonClosedSubsystem(String),
    #[error("character applied outside its domain: {0}")]
    NotInDomain(String),
    #[error("extended character does not restrict to this block: {0}")]
    WrongBlock(String),
    #[error("Laurent polynomial is not invariant under the required group: {0}")]
    NotInvariant(String),
    #[error("enumeration window too small: {0}")]
    WindowTooSmall(String),
    #[error("element is not a semisimple norm: {0}")]
    NotSemisimpleNorm(String),
    #[error("stable class outside the supported torus-translate family: {0}")]
    UnsupportedClass(String),
    #[error("bad configuration: {0}")]
    ConfigError(String),
}

pub type Result<T> = std::result::Result<T, Error>;
