//! Coproducts of monads on finite sets.
//!
//! Monads are computed element by element on [`Label`] trees. The
//! coproduct `S ⊕ T` at a finite set `A` is built from the unit
//! complements `S̄`, `T̄` by running the initial chain of
//! `X = S̄(Y + A), Y = T̄(X + A)` until it stops growing; layered terms give
//! the same elements symbolically. The [`advisor`] decides existence from
//! declared fixpoint profiles when no finite computation can.

pub mod advisor;
pub mod bialgebra;
pub mod chain;
pub mod complement;
pub mod coproduct;
pub mod error;
pub mod finset;
pub mod free;
pub mod label;
pub mod layered;
pub mod monad;
pub mod trnkova;

pub use advisor::{FixpointProfile, Verdict};
pub use coproduct::{build, CoproductMonad, Mode};
pub use error::{Error, Result};
pub use finset::{FinMap, FinSet};
pub use free::Signature;
pub use label::{Label, Node};
pub use layered::{Layered, LayeredTerm};
pub use monad::{Functor, Monad, MonadRef};
