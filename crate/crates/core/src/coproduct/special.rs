//! Coproducts decided without running a chain.

use std::sync::Arc;

use serde::Serialize;

use super::oracle::ExceptionOracle;
use crate::bialgebra::enumerate_em_algebras;
use crate::error::Result;
use crate::finset::FinSet;
use crate::monad::{classify_consistency, default_probes, ConsistencyClass, MonadRef, Terminal};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SpecialCase {
    /// A summand is the terminal monad, which absorbs everything.
    TerminalAbsorbs,
    /// A summand is `X ↦ 1` away from `∅`, and `∅` carries algebras for
    /// every summand, so the coproduct is empty at `∅`.
    TerminalZeroEmptyAtEmpty,
    /// As above but some summand has no algebra on `∅`.
    TerminalZeroSingletonAtEmpty,
    /// A summand is an exception monad with this many constants; the
    /// coproduct is the other summand applied to `X + E`.
    Exception { constants: usize, preserves_empty: bool },
}

/// Resolves families with an inconsistent member.
pub(crate) fn for_inconsistent(summands: &[MonadRef]) -> Result<Option<(SpecialCase, MonadRef)>> {
    let classes: Vec<ConsistencyClass> = summands
        .iter()
        .map(|s| classify_consistency(s.as_ref(), &default_probes()))
        .collect();
    if classes.contains(&ConsistencyClass::IsoTerminal) {
        return Ok(Some((SpecialCase::TerminalAbsorbs, Arc::new(Terminal::new()))));
    }
    if classes.contains(&ConsistencyClass::IsoTerminalZero) {
        // the initial multialgebra is ∅ exactly when ∅ is a multialgebra
        let mut empty_is_algebra = true;
        for s in summands {
            if enumerate_em_algebras(s.clone(), &FinSet::empty())?.is_empty() {
                empty_is_algebra = false;
            }
        }
        return Ok(Some(if empty_is_algebra {
            (
                SpecialCase::TerminalZeroEmptyAtEmpty,
                Arc::new(Terminal::preserving_empty()),
            )
        } else {
            (SpecialCase::TerminalZeroSingletonAtEmpty, Arc::new(Terminal::new()))
        }));
    }
    Ok(None)
}

/// The special-case rule for `s ⊕ t`, if one applies: inconsistent
/// summands first, then an exception summand.
pub fn special_case(s: &MonadRef, t: &MonadRef) -> Result<Option<(SpecialCase, MonadRef)>> {
    if let Some(found) = for_inconsistent(&[s.clone(), t.clone()])? {
        return Ok(Some(found));
    }
    let (base, exc, index) = match (s.exception_shape(), t.exception_shape()) {
        (_, Some(shape)) => (s, shape, 1),
        (Some(shape), None) => (t, shape, 0),
        (None, None) => return Ok(None),
    };
    let case = SpecialCase::Exception {
        constants: exc.constants.len(),
        preserves_empty: exc.preserves_empty,
    };
    let oracle = ExceptionOracle::new(base.clone(), exc.constants, index, exc.preserves_empty);
    Ok(Some((case, Arc::new(oracle))))
}
