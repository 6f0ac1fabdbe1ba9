//! Eilenberg-Moore algebras, their transport and enumeration, and
//! multialgebras (one carrier with an algebra for each of several monads).

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{all_maps, FinMap, FinSet};
use crate::label::Label;
use crate::monad::{check_em_algebra, Exception, MonadRef};

/// Default bound on candidate tables for exhaustive enumeration.
pub const ENUMERATION_BUDGET: usize = 1_000_000;

#[derive(Clone)]
pub struct EMAlgebra {
    monad: MonadRef,
    carrier: FinSet,
    structure: FinMap,
}

impl fmt::Debug for EMAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EMAlgebra")
            .field("monad", &self.monad.name())
            .field("structure", &self.structure)
            .finish()
    }
}

impl EMAlgebra {
    /// Checks both algebra axioms.
    pub fn new(monad: MonadRef, carrier: FinSet, structure: FinMap) -> Result<Self> {
        check_em_algebra(monad.as_ref(), &carrier, &structure)?;
        Ok(EMAlgebra {
            monad,
            carrier,
            structure,
        })
    }

    pub fn monad(&self) -> &MonadRef {
        &self.monad
    }

    pub fn carrier(&self) -> &FinSet {
        &self.carrier
    }

    pub fn structure(&self) -> &FinMap {
        &self.structure
    }

    pub fn apply(&self, s: &Label) -> Label {
        self.structure
            .apply(s)
            .cloned()
            .unwrap_or_else(|| panic!("{s} is not in the algebra's domain"))
    }

    /// Whether `f : carrier -> other.carrier` commutes with the structures.
    pub fn is_homomorphism(&self, other: &EMAlgebra, f: &FinMap) -> bool {
        let fa = |l: &Label| f.apply(l).cloned().expect("carrier element");
        self.structure
            .pairs()
            .all(|(s, x)| f.apply(x) == Some(&other.apply(&self.monad.fmap(&fa, s))))
    }
}

/// Moves an algebra along a bijection `i : carrier -> Y`.
pub fn transport(alg: &EMAlgebra, i: &FinMap) -> Result<EMAlgebra> {
    if !i.is_bijective() {
        return Err(Error::NotBijective);
    }
    let inv = i.inverse()?;
    let back = |l: &Label| inv.apply(l).cloned().expect("codomain element");
    let s = alg.monad.as_ref();
    let sy = s.carrier(i.cod())?;
    let structure = FinMap::from_fn(sy, i.cod().clone(), |t| {
        i.apply(&alg.apply(&s.fmap(&back, t)))
            .cloned()
            .expect("carrier element")
    })?;
    EMAlgebra::new(alg.monad.clone(), i.cod().clone(), structure)
}

/// `(S A, μ_A)` with its universal arrow `η_A`.
#[derive(Clone, Debug)]
pub struct FreeAlgebra {
    pub algebra: EMAlgebra,
    pub unit: FinMap,
}

pub fn free_algebra(s: MonadRef, a: &FinSet) -> Result<FreeAlgebra> {
    let sa = s.carrier(a)?;
    let mu = FinMap::from_fn(s.carrier(&sa)?, sa.clone(), |t| s.mult(t))?;
    let unit = FinMap::from_fn(a.clone(), sa.clone(), |x| s.unit(x))?;
    Ok(FreeAlgebra {
        algebra: EMAlgebra::new(s, sa, mu)?,
        unit,
    })
}

impl FreeAlgebra {
    /// The homomorphism `σ ∘ S h` extending `h : A -> target`.
    pub fn extend(&self, target: &EMAlgebra, h: &FinMap) -> Result<FinMap> {
        let s = self.algebra.monad.as_ref();
        let ha = |l: &Label| h.apply(l).cloned().expect("generator");
        FinMap::from_fn(self.algebra.carrier.clone(), target.carrier.clone(), |t| {
            target.apply(&s.fmap(&ha, t))
        })
    }
}

/// All algebra structures on `carrier`, in odometer order of their values
/// on the non-unit elements.
pub fn enumerate_em_algebras(s: MonadRef, carrier: &FinSet) -> Result<Vec<EMAlgebra>> {
    enumerate_em_algebras_within(s, carrier, ENUMERATION_BUDGET)
}

pub fn enumerate_em_algebras_within(s: MonadRef, carrier: &FinSet, budget: usize) -> Result<Vec<EMAlgebra>> {
    let m = s.as_ref();
    let sx = m.carrier(carrier)?;
    // the unit axiom fixes the structure on the unit's range
    let fixed: Vec<Option<Label>> = sx
        .iter()
        .map(|t| carrier.iter().find(|x| m.unit(x) == *t).cloned())
        .collect();
    let free: FinSet = sx
        .iter()
        .zip(&fixed)
        .filter(|(_, f)| f.is_none())
        .map(|(t, _)| t.clone())
        .collect();
    let choices = all_maps(&free, carrier, budget)?;
    let ssx = m.carrier(&sx)?;
    let mults: Vec<usize> = ssx
        .iter()
        .map(|tt| sx.index_of(&m.mult(tt)).expect("closed multiplication"))
        .collect();

    let mut out = Vec::new();
    for choice in choices {
        let table: Vec<Label> = sx
            .iter()
            .zip(&fixed)
            .map(|(t, f)| match f {
                Some(x) => x.clone(),
                None => choice.apply(t).cloned().expect("free element"),
            })
            .collect();
        let sigma = |l: &Label| table[sx.index_of(l).expect("element of S X")].clone();
        let ok = ssx
            .iter()
            .zip(&mults)
            .all(|(tt, &mi)| table[mi] == sigma(&m.fmap(&sigma, tt)));
        if ok {
            let structure = FinMap::new(sx.clone(), carrier.clone(), table)?;
            out.push(EMAlgebra {
                monad: s.clone(),
                carrier: carrier.clone(),
                structure,
            });
        }
    }
    Ok(out)
}

/// One carrier with an algebra for each of several monads.
#[derive(Clone, Debug)]
pub struct Bialgebra {
    carrier: FinSet,
    components: Vec<EMAlgebra>,
}

impl Bialgebra {
    pub fn new(components: Vec<EMAlgebra>) -> Result<Self> {
        let carrier = components
            .first()
            .map(|c| c.carrier.clone())
            .ok_or_else(|| Error::Contract("a multialgebra needs at least one component".into()))?;
        if components.iter().any(|c| c.carrier != carrier) {
            return Err(Error::Contract("components must share the carrier".into()));
        }
        Ok(Bialgebra { carrier, components })
    }

    pub fn carrier(&self) -> &FinSet {
        &self.carrier
    }

    pub fn components(&self) -> &[EMAlgebra] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &EMAlgebra {
        &self.components[i]
    }

    /// A homomorphism for every component.
    pub fn is_morphism(&self, other: &Bialgebra, f: &FinMap) -> bool {
        self.components
            .iter()
            .zip(&other.components)
            .all(|(a, b)| a.is_homomorphism(b, f))
    }
}

/// Every multialgebra on `carrier` for the given monads.
pub fn enumerate_multialgebras(monads: &[MonadRef], carrier: &FinSet) -> Result<Vec<Bialgebra>> {
    let per: Vec<Vec<EMAlgebra>> = monads
        .iter()
        .map(|m| enumerate_em_algebras(m.clone(), carrier))
        .collect::<Result<_>>()?;
    let mut out: Vec<Vec<EMAlgebra>> = vec![Vec::new()];
    for algs in per {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                algs.iter().map(move |a| {
                    let mut v = prefix.clone();
                    v.push(a.clone());
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(Bialgebra::new).collect()
}

/// The algebra for `X ↦ X + A` given by a point `A -> carrier`.
pub fn point_algebra(a: &FinSet, carrier: &FinSet, point: &FinMap) -> Result<EMAlgebra> {
    let m: MonadRef = std::sync::Arc::new(Exception::new(a.clone()));
    let dom = m.carrier(carrier)?;
    let structure = FinMap::from_fn(dom, carrier.clone(), |t| match t.as_left() {
        Some(x) => x.clone(),
        None => point
            .apply(t.as_right().expect("tagged constant"))
            .cloned()
            .expect("point"),
    })?;
    EMAlgebra::new(m, carrier.clone(), structure)
}

/// The point `A -> carrier` of an algebra for `X ↦ X + A`.
pub fn point_of(alg: &EMAlgebra, a: &FinSet) -> Result<FinMap> {
    FinMap::from_fn(a.clone(), alg.carrier.clone(), |x| alg.apply(&Label::right(x.clone())))
}

#[derive(Clone, Debug, Serialize)]
pub struct UniversalityReport {
    /// Target multialgebras examined.
    pub targets: usize,
    /// Generator assignments examined.
    pub assignments: usize,
    /// Descriptions of failures: assignments with zero or several
    /// extensions, or where the expected extension is not the unique one.
    pub failures: Vec<String>,
}

impl UniversalityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that `candidate` with generators `unit : A -> carrier` is free: for
/// every multialgebra on at most `bound` elements and every `h : A -> B`,
/// exactly one morphism `f` has `f ∘ unit = h`, and it is `expected(B, h)`.
pub fn verify_free_multialgebra(
    candidate: &Bialgebra,
    unit: &FinMap,
    bound: usize,
    expected: &dyn Fn(&Bialgebra, &FinMap) -> Result<FinMap>,
) -> Result<UniversalityReport> {
    let monads: Vec<MonadRef> = candidate.components.iter().map(|c| c.monad.clone()).collect();
    let mut report = UniversalityReport {
        targets: 0,
        assignments: 0,
        failures: Vec::new(),
    };
    for n in 0..=bound {
        let b = FinSet::atoms(n);
        for target in enumerate_multialgebras(&monads, &b)? {
            report.targets += 1;
            let morphisms: Vec<FinMap> = all_maps(candidate.carrier(), &b, ENUMERATION_BUDGET)?
                .filter(|f| candidate.is_morphism(&target, f))
                .collect();
            for h in all_maps(unit.dom(), &b, ENUMERATION_BUDGET)? {
                report.assignments += 1;
                let ext: Vec<&FinMap> = morphisms
                    .iter()
                    .filter(|f| unit.then(f).map(|g| g == h).unwrap_or(false))
                    .collect();
                if ext.len() != 1 {
                    report
                        .failures
                        .push(format!("{} extensions of {h:?} into a {n}-element target", ext.len()));
                    continue;
                }
                let want = expected(&target, &h)?;
                if *ext[0] != want {
                    report
                        .failures
                        .push(format!("extension of {h:?} differs from the expected map"));
                }
            }
        }
    }
    Ok(report)
}

/// Initiality is freeness on the empty set.
pub fn verify_initial_bialgebra(
    candidate: &Bialgebra,
    bound: usize,
    expected: &dyn Fn(&Bialgebra, &FinMap) -> Result<FinMap>,
) -> Result<UniversalityReport> {
    let unit = FinMap::from_empty(candidate.carrier());
    verify_free_multialgebra(candidate, &unit, bound, expected)
}
