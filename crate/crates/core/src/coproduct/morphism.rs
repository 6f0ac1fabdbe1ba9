//! Monad morphisms between summands and the induced map of coproducts.

use std::sync::Arc;

use super::CoproductMonad;
use crate::error::{Error, Result};
use crate::finset::{all_maps, FinMap, FinSet};
use crate::label::{Label, Node};
use crate::monad::{default_probes, Functor, Monad, MonadRef};

/// A natural transformation `S -> S'` given on elements; naturality makes
/// one function serve every component.
pub trait MonadMorphism: Send + Sync {
    fn source(&self) -> &MonadRef;
    fn target(&self) -> &MonadRef;
    fn apply(&self, s: &Label) -> Label;
}

type ElementFn = Arc<dyn Fn(&Label) -> Label + Send + Sync>;

#[derive(Clone)]
pub struct LabelMorphism {
    source: MonadRef,
    target: MonadRef,
    f: ElementFn,
}

impl LabelMorphism {
    pub fn new(source: MonadRef, target: MonadRef, f: ElementFn) -> Self {
        LabelMorphism { source, target, f }
    }

    pub fn identity(m: MonadRef) -> Self {
        LabelMorphism::new(m.clone(), m, Arc::new(|l: &Label| l.clone()))
    }

    /// Between exception monads, renaming constants along `rename`.
    pub fn between_exceptions(source: MonadRef, target: MonadRef, rename: FinMap) -> Result<Self> {
        let (Some(from), Some(to)) = (source.exception_shape(), target.exception_shape()) else {
            return Err(Error::Contract("both monads must be exception monads".into()));
        };
        if rename.dom() != &from.constants || rename.cod() != &to.constants {
            return Err(Error::Contract("renaming must map constants to constants".into()));
        }
        let f = move |l: &Label| match l.node() {
            Node::Right(c) => Label::right(rename.apply(c).cloned().expect("constant")),
            _ => l.clone(),
        };
        Ok(LabelMorphism::new(source, target, Arc::new(f)))
    }

    /// Checks that every component on the probes lands in the target, is
    /// injective, and commutes with units and multiplications.
    pub fn check(&self, probes: &[FinSet]) -> Result<()> {
        let (s, t) = (self.source.as_ref(), self.target.as_ref());
        for x in probes {
            let sx = s.carrier(x)?;
            let tx = t.carrier(x)?;
            let comp = FinMap::from_fn(sx.clone(), tx, |e| self.apply(e))
                .map_err(|_| Error::Contract(format!("component at a {}-element set leaves the target", x.len())))?;
            if let Some(w) = comp.collision() {
                return Err(Error::NotInjective(w));
            }
            for a in x {
                if self.apply(&s.unit(a)) != t.unit(a) {
                    return Err(Error::Contract(format!("unit square fails at {a}")));
                }
            }
            let m = |e: &Label| self.apply(e);
            for ss in s.carrier(&sx)?.iter() {
                let lhs = self.apply(&s.mult(ss));
                let rhs = t.mult(&self.apply(&s.fmap(&m, ss)));
                if lhs != rhs {
                    return Err(Error::Contract(format!("multiplication square fails at {ss}")));
                }
            }
            // naturality on maps into the largest probe
            if let Some(y) = probes.last() {
                if let Ok(maps) = all_maps(x, y, 256) {
                    for f in maps {
                        let fa = |l: &Label| f.apply(l).cloned().expect("domain element");
                        for e in &sx {
                            if self.apply(&s.fmap(&fa, e)) != t.fmap(&fa, &self.apply(e)) {
                                return Err(Error::Contract(format!("naturality fails at {e}")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl MonadMorphism for LabelMorphism {
    fn source(&self) -> &MonadRef {
        &self.source
    }

    fn target(&self) -> &MonadRef {
        &self.target
    }

    fn apply(&self, s: &Label) -> Label {
        (self.f)(s)
    }
}

/// The map `(⊕ S_p) A -> (⊕ S'_p) A` induced by injective morphisms
/// `S_p -> S'_p`; fails with `NotInjective` should the result not be
/// injective.
pub fn injective_morphism_transfer(
    morphisms: &[LabelMorphism],
    from: &CoproductMonad,
    to: &CoproductMonad,
    a: &FinSet,
) -> Result<FinMap> {
    if morphisms.len() != from.summands().len() || morphisms.len() != to.summands().len() {
        return Err(Error::Contract("one morphism per summand".into()));
    }
    for m in morphisms {
        m.check(&default_probes())?;
    }
    let h = |x: &Label| to.unit(x);
    let alg = |p: usize, w: &Label| to.structure(p, &morphisms[p].apply(w));
    let map = FinMap::from_fn(from.carrier(a)?, to.carrier(a)?, |z| from.fold(z, &h, &alg))?;
    match map.collision() {
        Some(w) => Err(Error::NotInjective(w)),
        None => Ok(map),
    }
}
