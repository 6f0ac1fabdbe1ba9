//! Computable monads on finite sets.
//!
//! A monad is given element-wise: the functor action, unit and
//! multiplication act on single [`Label`]s, and carriers are materialized on
//! demand. Element-wise operations keep working on carriers far too large to
//! enumerate, which is what lets law checks sample `S(S(S X))`.

mod builtins;
mod gamma;
mod laws;

use std::sync::Arc;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::finset::{FinMap, FinSet};
use crate::label::Label;

pub use builtins::{
    builtin, parse_functor, parse_monad, ConstantFunctor, Exception, Powerset, PowersetA, Reader, State, Terminal,
};
pub use gamma::{check_em_algebra, gamma, gamma_inverse, Gamma};
#[allow(unused_imports)]
pub(crate) use laws::sample_level;
pub use laws::{
    check_functor_laws, check_laws, check_laws_seeded, classify_consistency, default_probes, preserves_injections,
    ConsistencyClass, InjectionCheck, Law, LawOutcome, LawReport, EXHAUSTIVE_LIMIT,
};

/// Samples a leaf for element-wise sampling; `None` when the underlying set
/// is empty.
pub type LeafSampler<'a> = dyn FnMut(&mut dyn RngCore) -> Option<Label> + 'a;

/// A set functor, computable on finite sets.
pub trait Functor: Send + Sync {
    fn name(&self) -> String;

    /// `F X`, materialized. Fails with `BudgetExceeded` beyond
    /// [`crate::finset::MATERIALIZE_LIMIT`] and `InfiniteCarrier` when the
    /// value is infinite.
    fn carrier(&self, x: &FinSet) -> Result<FinSet>;

    /// `F f` applied to one element.
    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label;

    /// `|F n|` for an `n`-element set, when known in closed form.
    fn cardinality(&self, _n: u128) -> Option<u128> {
        None
    }

    /// A finite part of `F X`; the bound limits term height for functors
    /// with infinite values and is ignored otherwise.
    fn bounded_carrier(&self, x: &FinSet, _bound: usize) -> Result<FinSet> {
        self.carrier(x)
    }

    fn finite_valued(&self) -> bool {
        true
    }
}

/// Constants of an exception monad `X ↦ X + E` (or its empty-set-preserving
/// variant).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionShape {
    pub constants: FinSet,
    pub preserves_empty: bool,
}

pub trait Monad: Functor {
    fn unit(&self, x: &Label) -> Label;

    fn mult(&self, ss: &Label) -> Label;

    /// The `x` with `unit(x) == s`, if `s` is in the range of the unit.
    /// Only meaningful for consistent monads.
    fn unit_preimage(&self, s: &Label) -> Option<Label>;

    /// Draws an element of `S X` where `leaf` draws elements of `X`.
    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label>;

    /// The element of `S ∅` that `s` comes from, if any.
    fn from_empty(&self, s: &Label) -> Result<Option<Label>> {
        let empty = self.carrier(&FinSet::empty())?;
        let absurd = |l: &Label| -> Label { unreachable!("no elements in the empty set: {l}") };
        Ok(empty.iter().find(|t| self.fmap(&absurd, t) == *s).cloned())
    }

    fn exception_shape(&self) -> Option<ExceptionShape> {
        None
    }

    /// Height of `s` when used as one layer of a term. Monads that are not
    /// term monads count every layer as height one.
    fn op_height(&self, _s: &Label) -> usize {
        1
    }

    /// How deep `leaf` sits inside `s`, in the same units as
    /// [`Monad::op_height`].
    fn leaf_depth(&self, _s: &Label, _leaf: &Label) -> usize {
        1
    }
}

pub type MonadRef = Arc<dyn Monad>;
pub type FunctorRef = Arc<dyn Functor>;

/// `F f` as a map `F X -> F Y`.
pub fn action(s: &dyn Functor, f: &FinMap) -> Result<FinMap> {
    let dom = s.carrier(f.dom())?;
    let cod = s.carrier(f.cod())?;
    let apply = |l: &Label| f.apply(l).cloned().expect("map is total on its domain");
    FinMap::from_fn(dom, cod, |e| s.fmap(&apply, e))
}

/// `x* = μ ∘ S x` for `x : X -> S Y`; the codomain of `x` is taken as `S Y`.
pub fn kleisli_ext(s: &dyn Monad, x: &FinMap) -> Result<FinMap> {
    let dom = s.carrier(x.dom())?;
    let apply = |l: &Label| x.apply(l).cloned().expect("map is total on its domain");
    let table = dom.iter().map(|e| s.mult(&s.fmap(&apply, e))).collect();
    FinMap::new(dom, x.cod().clone(), table)
}

/// The unit at `X` as a map `X -> S X`.
pub fn unit_map(s: &dyn Monad, x: &FinSet) -> Result<FinMap> {
    FinMap::from_fn(x.clone(), s.carrier(x)?, |e| s.unit(e))
}

/// Picks an element uniformly.
pub(crate) fn pick(rng: &mut dyn RngCore, set: &FinSet) -> Option<Label> {
    if set.is_empty() {
        None
    } else {
        let i = (rng.next_u64() % set.len() as u64) as usize;
        Some(set.elements()[i].clone())
    }
}

pub(crate) fn too_big(name: &str, size: Option<u128>) -> Error {
    match size {
        Some(n) => Error::BudgetExceeded(format!("{name} would have {n} elements")),
        None => Error::BudgetExceeded(format!("{name} is too large to materialize")),
    }
}
