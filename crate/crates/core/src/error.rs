use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not polynomial: {0}")]
    NotPolynomial(String),
    #[error("missing value for atom {0}")]
    Unassigned(String),
    #[error("singular matrix: determinant is identically zero")]
    SingularMatrix,
    #[error("matrix of size {0} not supported (at most 4)")]
    MatrixTooLarge(usize),
    #[error(
        "expression references order {found} but the mapping was lifted only to order {lifted}"
    )]
    OrderExceeded { found: u32, lifted: u32 },
    #[error("equation cannot be solved for its leading derivative {0}")]
    NotSolvable(String),
    #[error("principal derivatives overlap: {0} and {1}")]
    OverlappingPrincipals(String, String),
    #[error("series constant term is not a unit")]
    NonUnitConstantTerm,
    #[error("series coefficient contains the series parameter {0}")]
    ParameterInCoefficient(String),
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
