use thiserror::Error;

use crate::chain::DivergenceTrace;
use crate::label::Label;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no constraint-satisfying bijection found")]
    NotFound,

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("unknown monad `{0}`")]
    UnknownMonad(String),

    #[error("invalid specifier: {0}")]
    BadSpecifier(String),

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("monad `{0}` is inconsistent (its unit is not injective)")]
    InconsistentMonad(String),

    #[error("map is not injective (witness {0} collides)")]
    NotInjective(Label),

    #[error("map is not bijective")]
    NotBijective,

    #[error("element {element} has no unique least support: {first} and {second} both work")]
    AmbiguousSupport {
        element: Label,
        first: String,
        second: String,
    },

    #[error("subfunctor violation: {0}")]
    SubfunctorViolation(String),

    #[error("initial chain did not converge within budget")]
    NoConvergence(Box<DivergenceTrace>),

    #[error("carrier of `{0}` is infinite and cannot be materialized")]
    InfiniteCarrier(String),

    #[error("{0} is not an element of the expected carrier")]
    NotAnElement(Label),

    #[error("closure invariant violated: {0}")]
    ClosureInvariant(String),

    #[error("chain structure maps are not label identities: {0}")]
    NonCanonicalLabels(String),
}
