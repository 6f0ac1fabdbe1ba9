//! Repairing a functor at the empty set.
//!
//! The closure `Ĥ` agrees with `H` on nonempty sets and takes at `∅` the
//! equalizer `E` of `H t, H f : H 1 -> H 2` for the two maps `t, f : 1 -> 2`.
//! Elements of `E` are the elements of `H 1` that mention no point of `1`;
//! for element-wise functors their labels are unchanged by every `H g`, so
//! the same labels serve at `∅`.

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{all_maps, equalizer, FinMap, FinSet};
use crate::label::Label;
use crate::monad::{action, pick, ExceptionShape, Functor, LeafSampler, Monad, MonadRef, EXHAUSTIVE_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// The reflection at `∅` is a bijection.
    AlreadyClosed,
    /// `H ∅ = ∅`: the functor is the zero part of its closure.
    ZeroOfClosure,
    /// Neither; impossible for a monad.
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureResult {
    /// `E ⊆ H 1`.
    pub value_at_empty: FinSet,
    /// `H ∅ -> E`, induced by `∅ -> 1`.
    pub reflection_at_empty: FinMap,
    pub classification: Classification,
}

fn point_maps() -> Result<(FinMap, FinMap)> {
    let one = FinSet::naturals(1);
    let two = FinSet::naturals(2);
    Ok((
        FinMap::new(one.clone(), two.clone(), vec![Label::nat(0)])?,
        FinMap::new(one, two, vec![Label::nat(1)])?,
    ))
}

/// The closure of `h` at `∅` and the reflection into it.
pub fn closure_at_empty(h: &dyn Functor) -> Result<ClosureResult> {
    let (t, f) = point_maps()?;
    let (e, _) = equalizer(&action(h, &t)?, &action(h, &f)?)?;
    let bang = action(h, &FinMap::from_empty(&FinSet::naturals(1)))?;
    let reflection = FinMap::new(bang.dom().clone(), e.clone(), bang.table().to_vec())
        .map_err(|_| Error::ClosureInvariant(format!("{}: the image of H∅ leaves the equalizer", h.name())))?;
    let classification = if reflection.dom().is_empty() {
        Classification::ZeroOfClosure
    } else if reflection.is_bijective() {
        Classification::AlreadyClosed
    } else {
        Classification::Neither
    };
    Ok(ClosureResult {
        value_at_empty: e,
        reflection_at_empty: reflection,
        classification,
    })
}

/// Whether `s` is its own closure or the zero part of it. A lawful monad
/// is always one of the two; anything else is reported as a
/// `ClosureInvariant` violation.
pub fn classify(s: &dyn Monad) -> Result<Classification> {
    let c = closure_at_empty(s)?;
    if c.classification != Classification::Neither {
        Ok(c.classification)
    } else {
        Err(Error::ClosureInvariant(format!(
            "{}: {} elements at ∅ but {} in the closure",
            s.name(),
            c.reflection_at_empty.dom().len(),
            c.value_at_empty.len()
        )))
    }
}

/// `Ŝ` with the monad structure of `S`.
pub struct MonadClosure {
    base: MonadRef,
    at_empty: FinSet,
}

pub fn monad_closure(s: MonadRef) -> Result<MonadClosure> {
    let at_empty = closure_at_empty(s.as_ref())?.value_at_empty;
    Ok(MonadClosure { base: s, at_empty })
}

impl Functor for MonadClosure {
    fn name(&self) -> String {
        format!("closure({})", self.base.name())
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        if x.is_empty() {
            Ok(self.at_empty.clone())
        } else {
            self.base.carrier(x)
        }
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        self.base.fmap(f, s)
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        if n == 0 {
            Some(self.at_empty.len() as u128)
        } else {
            self.base.cardinality(n)
        }
    }

    fn finite_valued(&self) -> bool {
        self.base.finite_valued()
    }
}

impl Monad for MonadClosure {
    fn unit(&self, x: &Label) -> Label {
        self.base.unit(x)
    }

    fn mult(&self, ss: &Label) -> Label {
        self.base.mult(ss)
    }

    fn unit_preimage(&self, s: &Label) -> Option<Label> {
        self.base.unit_preimage(s)
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        self.base.sample(rng, leaf).or_else(|| pick(rng, &self.at_empty))
    }

    fn from_empty(&self, s: &Label) -> Result<Option<Label>> {
        Ok(self.at_empty.contains(s).then(|| s.clone()))
    }

    fn exception_shape(&self) -> Option<ExceptionShape> {
        self.base.exception_shape().map(|shape| ExceptionShape {
            preserves_empty: shape.preserves_empty && self.at_empty.is_empty(),
            ..shape
        })
    }
}

/// `S⁰`: empty at `∅`, `S` elsewhere.
pub struct ZeroSubmonad {
    base: MonadRef,
}

pub fn zero_submonad(s: MonadRef) -> ZeroSubmonad {
    ZeroSubmonad { base: s }
}

impl Functor for ZeroSubmonad {
    fn name(&self) -> String {
        format!("{}⁰", self.base.name())
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        if x.is_empty() {
            Ok(FinSet::empty())
        } else {
            self.base.carrier(x)
        }
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        self.base.fmap(f, s)
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        if n == 0 {
            Some(0)
        } else {
            self.base.cardinality(n)
        }
    }

    fn finite_valued(&self) -> bool {
        self.base.finite_valued()
    }
}

impl Monad for ZeroSubmonad {
    fn unit(&self, x: &Label) -> Label {
        self.base.unit(x)
    }

    fn mult(&self, ss: &Label) -> Label {
        self.base.mult(ss)
    }

    fn unit_preimage(&self, s: &Label) -> Option<Label> {
        self.base.unit_preimage(s)
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        // nothing to draw over the empty set
        leaf(rng)?;
        self.base.sample(rng, leaf)
    }

    fn from_empty(&self, _s: &Label) -> Result<Option<Label>> {
        Ok(None)
    }

    fn exception_shape(&self) -> Option<ExceptionShape> {
        self.base.exception_shape().map(|shape| ExceptionShape {
            preserves_empty: true,
            ..shape
        })
    }
}

/// Where two monads first differ on the probes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Difference {
    Carrier { size: usize },
    Unit { element: Label },
    Mult { element: Label },
    Action { element: Label },
}

const MAP_BUDGET: usize = 256;

/// Compares carriers, units, multiplications and the action along all
/// maps between probes. Multiplications are compared on the whole two-fold
/// value when it has at most [`EXHAUSTIVE_LIMIT`] elements.
pub fn compare_on_probes(a: &dyn Monad, b: &dyn Monad, probes: &[FinSet]) -> Result<Option<Difference>> {
    for x in probes {
        let ax = a.carrier(x)?;
        if ax != b.carrier(x)? {
            return Ok(Some(Difference::Carrier { size: x.len() }));
        }
        if let Some(e) = x.iter().find(|e| a.unit(e) != b.unit(e)) {
            return Ok(Some(Difference::Unit { element: e.clone() }));
        }
        let small = a
            .cardinality(ax.len() as u128)
            .is_some_and(|n| n <= EXHAUSTIVE_LIMIT as u128);
        if small {
            let aax = a.carrier(&ax)?;
            if aax != b.carrier(&ax)? {
                return Ok(Some(Difference::Carrier { size: ax.len() }));
            }
            if let Some(ss) = aax.iter().find(|ss| a.mult(ss) != b.mult(ss)) {
                return Ok(Some(Difference::Mult { element: ss.clone() }));
            }
        }
        for y in probes {
            let Ok(maps) = all_maps(x, y, MAP_BUDGET) else { continue };
            for m in maps {
                let f = |l: &Label| m.apply(l).cloned().expect("domain element");
                if let Some(s) = ax.iter().find(|s| a.fmap(&f, s) != b.fmap(&f, s)) {
                    return Ok(Some(Difference::Action { element: s.clone() }));
                }
            }
        }
    }
    Ok(None)
}

/// The closure is `X ↦ X + E` on the probes: returns `E = Ŝ 1 ∖ η[1]` when
/// `x ↦ η(x)`, `e ↦ e` is a natural bijection `X + E -> Ŝ X` there.
///
/// This is evidence on the probes only, not a proof for all sets.
pub fn substantially_exceptional(s: MonadRef, probes: &[FinSet]) -> Result<Option<FinSet>> {
    let c = monad_closure(s)?;
    let one = FinSet::naturals(1);
    let e = c
        .carrier(&one)?
        .difference(&FinSet::from_labels([c.unit(&Label::nat(0))]));
    if !e.is_subset(&c.at_empty) {
        return Ok(None);
    }
    let phi = |x: &FinSet| -> Result<Option<FinMap>> {
        let cx = c.carrier(x)?;
        let image: Vec<Label> = x.iter().map(|a| c.unit(a)).chain(e.iter().cloned()).collect();
        let n = image.len();
        let image = FinSet::from_labels(image);
        Ok((image.len() == n && image == cx).then(|| FinMap::identity(&cx)))
    };
    for x in probes {
        if phi(x)?.is_none() {
            return Ok(None);
        }
        for y in probes {
            let Ok(maps) = all_maps(x, y, MAP_BUDGET) else { continue };
            for m in maps {
                let f = |l: &Label| m.apply(l).cloned().expect("domain element");
                let natural =
                    x.iter().all(|a| c.fmap(&f, &c.unit(a)) == c.unit(&f(a))) && e.iter().all(|k| c.fmap(&f, k) == *k);
                if !natural {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(e))
}

/// The functor is constant on nonempty probes: every map between two
/// nonempty probes acts by one and the same bijection. Returns the
/// constant size.
pub fn substantially_constant(h: &dyn Functor, probes: &[FinSet]) -> Result<Option<usize>> {
    let nonempty: Vec<&FinSet> = probes.iter().filter(|x| !x.is_empty()).collect();
    let Some(first) = nonempty.first() else { return Ok(None) };
    let m = h.carrier(first)?.len();
    for x in &nonempty {
        for y in &nonempty {
            let Ok(maps) = all_maps(x, y, MAP_BUDGET) else { continue };
            let mut seen: Option<FinMap> = None;
            for f in maps {
                let act = action(h, &f)?;
                if act.dom().len() != m || !act.is_bijective() {
                    return Ok(None);
                }
                match &seen {
                    Some(prev) if *prev != act => return Ok(None),
                    Some(_) => {}
                    None => seen = Some(act),
                }
            }
        }
    }
    Ok(Some(m))
}

/// The unique `ŝ_∅ : E -> K ∅` with `K(∅ -> 1) ∘ ŝ_∅ = s_1` on `E`, for a
/// transformation with component `s_1 : H 1 -> K 1`. Requires `K ∅ -> K 1`
/// to be injective, as it is when `K` preserves the equalizer.
pub fn extend_along_reflection(closure: &ClosureResult, k: &dyn Functor, s_one: &FinMap) -> Result<FinMap> {
    let k_bang = action(k, &FinMap::from_empty(&FinSet::naturals(1)))?;
    if let Some(w) = k_bang.collision() {
        return Err(Error::NotInjective(w));
    }
    let table = closure
        .value_at_empty
        .iter()
        .map(|e| {
            let target = s_one.eval(e)?;
            k_bang
                .pairs()
                .find(|(_, v)| **v == target)
                .map(|(k0, _)| k0.clone())
                .ok_or(Error::NotFound)
        })
        .collect::<Result<Vec<_>>>()?;
    FinMap::new(closure.value_at_empty.clone(), k_bang.dom().clone(), table)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::monad::{builtin, check_laws, default_probes, ConstantFunctor, Exception};

    fn consts(n: usize) -> FinSet {
        FinSet::from_labels((0..n).map(|i| Label::atom(format!("m{i}"))))
    }

    #[test]
    fn constant_zero_closes_to_its_value() {
        for n in [1, 3] {
            let h = ConstantFunctor::preserving_empty(consts(n));
            let c = closure_at_empty(&h).unwrap();
            assert_eq!(c.value_at_empty, consts(n));
            assert_eq!(c.classification, Classification::ZeroOfClosure);
        }
        let c = closure_at_empty(&ConstantFunctor::new(consts(2))).unwrap();
        assert_eq!(c.classification, Classification::AlreadyClosed);
    }

    #[test]
    fn builtins_classify() {
        let cases = [
            ("exception0", Classification::ZeroOfClosure),
            ("terminal0", Classification::ZeroOfClosure),
            ("exception", Classification::AlreadyClosed),
            ("maybe", Classification::AlreadyClosed),
            ("powerset", Classification::AlreadyClosed),
            ("terminal", Classification::AlreadyClosed),
            ("reader", Classification::ZeroOfClosure),
            ("state", Classification::ZeroOfClosure),
        ];
        for (name, want) in cases {
            let m = builtin(name, &[2]).unwrap();
            assert_eq!(classify(m.as_ref()).unwrap(), want, "{name}");
        }
        let p = closure_at_empty(&crate::monad::Powerset).unwrap();
        assert_eq!(p.value_at_empty, FinSet::from_labels([Label::set([])]));
        assert!(p.reflection_at_empty.is_bijective());
    }

    #[test]
    fn closure_restores_exceptions_at_empty() {
        let e = Exception::constants(2);
        let closed = monad_closure(Arc::new(Exception::preserving_empty(e.clone()))).unwrap();
        assert!(check_laws(&closed, &default_probes(), 100).passed());
        let want = Exception::new(e);
        assert_eq!(compare_on_probes(&closed, &want, &default_probes()).unwrap(), None);
        assert!(!closed.exception_shape().unwrap().preserves_empty);
    }

    #[test]
    fn closure_of_closed_monads_is_unchanged() {
        for name in ["powerset", "maybe", "reader"] {
            let m = builtin(name, &[2]).unwrap();
            let c = monad_closure(m.clone()).unwrap();
            assert_eq!(
                compare_on_probes(&c, m.as_ref(), &default_probes()).unwrap(),
                None,
                "{name}"
            );
        }
    }

    #[test]
    fn zero_submonads() {
        let e = Exception::constants(1);
        let z = zero_submonad(Arc::new(Exception::new(e.clone())));
        let want = Exception::preserving_empty(e);
        assert_eq!(compare_on_probes(&z, &want, &default_probes()).unwrap(), None);
        assert!(check_laws(&z, &default_probes(), 100).passed());
        let zz = zero_submonad(Arc::new(z));
        assert_eq!(compare_on_probes(&zz, &want, &default_probes()).unwrap(), None);

        let t0 = zero_submonad(builtin("terminal", &[]).unwrap());
        let want = builtin("terminal0", &[]).unwrap();
        assert_eq!(compare_on_probes(&t0, want.as_ref(), &default_probes()).unwrap(), None);
    }

    #[test]
    fn differences_are_reported() {
        let a = builtin("exception", &[1]).unwrap();
        let b = builtin("exception", &[2]).unwrap();
        assert!(matches!(
            compare_on_probes(a.as_ref(), b.as_ref(), &default_probes()).unwrap(),
            Some(Difference::Carrier { size: 0 })
        ));
    }

    #[test]
    fn exceptional_detection() {
        let probes = default_probes();
        for (name, n) in [("exception", 2), ("exception0", 2), ("maybe", 1)] {
            let m = builtin(name, &[2]).unwrap();
            assert_eq!(
                substantially_exceptional(m, &probes).unwrap().map(|e| e.len()),
                Some(n),
                "{name}"
            );
        }
        for name in ["powerset", "reader", "state"] {
            assert_eq!(
                substantially_exceptional(builtin(name, &[2]).unwrap(), &probes).unwrap(),
                None
            );
        }
    }

    #[test]
    fn constant_detection() {
        let probes = default_probes();
        assert_eq!(
            substantially_constant(&ConstantFunctor::preserving_empty(consts(3)), &probes).unwrap(),
            Some(3)
        );
        assert_eq!(
            substantially_constant(&ConstantFunctor::new(consts(1)), &probes).unwrap(),
            Some(1)
        );
        assert_eq!(substantially_constant(&crate::monad::Powerset, &probes).unwrap(), None);
    }

    #[test]
    fn reflection_is_universal() {
        // s : C⁰_M -> C_N is given by any g : M -> N; it extends uniquely
        for m in 1..=3 {
            let h = ConstantFunctor::preserving_empty(consts(m));
            let c = closure_at_empty(&h).unwrap();
            let n_set = FinSet::from_labels((0..2).map(|i| Label::atom(format!("n{i}"))));
            let k = ConstantFunctor::new(n_set.clone());
            for g in all_maps(&consts(m), &n_set, 100).unwrap() {
                let ext = extend_along_reflection(&c, &k, &g).unwrap();
                assert_eq!(ext, g);
            }
        }
    }
}
