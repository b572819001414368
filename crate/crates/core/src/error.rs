use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("division by zero")]
    DivisionByZero,

    #[error("not a refinement: target radius exponent {target} must be below {radius}")]
    NotARefinement { radius: i64, target: i64 },

    #[error("cannot parse `{0}` as a rational number")]
    ParseRational(String),

    #[error("term budget exceeded: {needed} terms needed, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: usize },

    #[error("invalid wavelet index: {0}")]
    InvalidIndex(String),

    #[error("invalid family specification: {0}")]
    InvalidFamily(String),

    #[error("function is not in the Lizorkin space (integral {re:e}{im:+e}i)")]
    NotLizorkin { re: f64, im: f64 },

    #[error("symbol is undefined at {0}")]
    SymbolUndefined(String),

    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("index {index} is not an eigenfunction: criterion fails at eta = {witness}")]
    NotEigenfunction { index: String, witness: String },

    #[error("invalid evolution problem: {0}")]
    InvalidProblem(String),

    #[error("supports of {first} and {second} are not disjoint")]
    NotDisjoint { first: String, second: String },

    #[error("coefficient is not finite")]
    NonFinite,

    #[error("malformed input: {0}")]
    Format(String),
}
