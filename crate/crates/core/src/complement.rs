//! The unit complement `S̄ X = S X \ ran η_X`, a functor on injections.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::finset::{FinMap, FinSet};
use crate::label::Label;
use crate::monad::{classify_consistency, default_probes, ConsistencyClass, Monad, MonadRef};

/// A consistent monad viewed through its unit complement.
#[derive(Clone)]
pub struct Complement {
    base: MonadRef,
}

/// Fails with `InconsistentMonad` unless the unit is injective on the
/// default probes.
pub fn complement(s: MonadRef) -> Result<Complement> {
    match classify_consistency(s.as_ref(), &default_probes()) {
        ConsistencyClass::Consistent => Ok(Complement { base: s }),
        _ => Err(Error::InconsistentMonad(s.name())),
    }
}

/// `S X` minus the unit's range.
pub fn complement_carrier(s: &dyn Monad, x: &FinSet) -> Result<FinSet> {
    let units: HashSet<Label> = x.iter().map(|a| s.unit(a)).collect();
    Ok(s.carrier(x)?.iter().filter(|e| !units.contains(e)).cloned().collect())
}

/// `|S̄ n|` from `|S n|`, for a consistent monad.
pub fn complement_cardinality(s: &dyn Monad, n: u128) -> Option<u128> {
    s.cardinality(n)?.checked_sub(n)
}

impl Complement {
    pub fn base(&self) -> &MonadRef {
        &self.base
    }

    pub fn name(&self) -> String {
        format!("bar {}", self.base.name())
    }

    pub fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        complement_carrier(self.base.as_ref(), x)
    }

    pub fn cardinality(&self, n: u128) -> Option<u128> {
        complement_cardinality(self.base.as_ref(), n)
    }

    /// Whether an element of `S X` lies outside the unit's range.
    pub fn contains(&self, s: &Label) -> bool {
        self.base.unit_preimage(s).is_none()
    }

    /// `S m` restricted to `S̄ X`.
    pub fn act(&self, m: &FinMap, s: &Label) -> Result<Label> {
        if let Some(w) = m.collision() {
            return Err(Error::NotInjective(w));
        }
        let f = |l: &Label| m.apply(l).cloned().expect("element of the domain");
        let out = self.base.fmap(&f, s);
        if self.contains(&out) {
            Ok(out)
        } else {
            Err(Error::SubfunctorViolation(format!(
                "{} sends {s} into the unit's range",
                self.base.name()
            )))
        }
    }

    /// `S̄ m : S̄ X -> S̄ Y` for an injection `m : X -> Y`.
    pub fn action(&self, m: &FinMap) -> Result<FinMap> {
        if let Some(w) = m.collision() {
            return Err(Error::NotInjective(w));
        }
        let dom = self.carrier(m.dom())?;
        let cod = self.carrier(m.cod())?;
        let table = dom.iter().map(|s| self.act(m, s)).collect::<Result<_>>()?;
        FinMap::new(dom, cod, table)
    }
}

/// Whether `s ∈ S n` lies in the range of `S(U ↪ n)`.
///
/// For nonempty `U` this uses a retraction `r : n -> U`: `s` comes from `U`
/// exactly when `S(incl ∘ r)` fixes it.
pub fn supported_by(s: &dyn Monad, u: &FinSet, elem: &Label) -> Result<bool> {
    if u.is_empty() {
        return Ok(s.from_empty(elem)?.is_some());
    }
    let anchor = u.elements()[0].clone();
    let retract = |l: &Label| if u.contains(l) { l.clone() } else { anchor.clone() };
    Ok(s.fmap(&retract, elem) == *elem)
}

/// The least `U ⊆ n` with `s` in the range of `S(U ↪ n)`.
///
/// Subsets are tried in increasing size; a second support of the same size
/// raises `AmbiguousSupport`.
pub fn minimal_support(s: &dyn Monad, n: &FinSet, elem: &Label) -> Result<FinSet> {
    for k in 0..=n.len() {
        let mut found: Option<FinSet> = None;
        for u in n.subsets_of_size(k) {
            if supported_by(s, &u, elem)? {
                if let Some(first) = found {
                    return Err(Error::AmbiguousSupport {
                        element: elem.clone(),
                        first: first.to_string(),
                        second: u.to_string(),
                    });
                }
                found = Some(u);
            }
        }
        if let Some(u) = found {
            return Ok(u);
        }
    }
    Err(Error::NotAnElement(elem.clone()))
}

/// Given `s` supported by `U`, the element `t ∈ S U` with `S(incl)(t) = s`.
pub fn restrict_to_support(s: &dyn Monad, u: &FinSet, elem: &Label) -> Result<Label> {
    if u.is_empty() {
        return s.from_empty(elem)?.ok_or_else(|| Error::NotAnElement(elem.clone()));
    }
    // on labels the inclusion is the identity, so the retraction image is the preimage
    let anchor = u.elements()[0].clone();
    let retract = |l: &Label| if u.contains(l) { l.clone() } else { anchor.clone() };
    Ok(s.fmap(&retract, elem))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::finset::all_maps;
    use crate::monad::{builtin, Powerset};

    fn set(v: &[u64]) -> Label {
        Label::set(v.iter().map(|&n| Label::nat(n)))
    }

    #[test]
    fn powerset_complement_drops_singletons() {
        let c = complement(Arc::new(Powerset)).unwrap();
        let got = c.carrier(&FinSet::naturals(2)).unwrap();
        assert_eq!(got, FinSet::from_labels([set(&[]), set(&[0, 1])]));
    }

    #[test]
    fn exception_complement_is_constants() {
        for spec in ["exception:2", "maybe"] {
            let m = crate::monad::parse_monad(spec).unwrap();
            let consts = m.exception_shape().unwrap().constants;
            let c = complement(m).unwrap();
            for n in 0..4 {
                let got = c.carrier(&FinSet::naturals(n)).unwrap();
                let want: FinSet = consts.iter().cloned().map(Label::right).collect();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn inconsistent_monads_are_rejected() {
        assert!(matches!(
            complement(builtin("terminal", &[]).unwrap()),
            Err(Error::InconsistentMonad(_))
        ));
    }

    #[test]
    fn action_on_injections() {
        let c = complement(Arc::new(Powerset)).unwrap();
        let m = FinMap::inclusion(&FinSet::naturals(2), &FinSet::naturals(3)).unwrap();
        assert_eq!(c.act(&m, &set(&[0, 1])).unwrap(), set(&[0, 1]));

        let g = FinMap::new(FinSet::naturals(2), FinSet::naturals(1), vec![Label::nat(0); 2]).unwrap();
        assert!(matches!(c.act(&g, &set(&[0, 1])), Err(Error::NotInjective(_))));

        let e = complement(builtin("exception", &[1]).unwrap()).unwrap();
        let m = FinMap::new(FinSet::naturals(1), FinSet::naturals(3), vec![Label::nat(2)]).unwrap();
        let k = Label::right(Label::atom("e0"));
        assert_eq!(e.act(&m, &k).unwrap(), k);
    }

    #[test]
    fn partition_and_subfunctor_closure() {
        for (name, params) in [
            ("powerset", &[][..]),
            ("exception", &[2]),
            ("reader", &[2]),
            ("state", &[1]),
        ] {
            let m = builtin(name, params).unwrap();
            let c = complement(m.clone()).unwrap();
            for nx in 0..=3 {
                let x = FinSet::naturals(nx);
                let sx = m.carrier(&x).unwrap();
                let bar = c.carrier(&x).unwrap();
                assert_eq!(bar.len() + x.len(), sx.len(), "{name}");
                for ny in nx..=3 {
                    let y = FinSet::naturals(ny);
                    for inj in all_maps(&x, &y, 1000).unwrap().filter(FinMap::is_injective) {
                        let act = c.action(&inj).unwrap();
                        assert!(act.is_injective());
                    }
                }
            }
        }
    }

    #[test]
    fn supports() {
        let n = FinSet::naturals(3);
        assert_eq!(
            minimal_support(&Powerset, &n, &set(&[0, 2])).unwrap(),
            FinSet::from_labels([Label::nat(0), Label::nat(2)])
        );
        assert_eq!(minimal_support(&Powerset, &n, &set(&[])).unwrap(), FinSet::empty());
        assert_eq!(
            minimal_support(&Powerset, &n, &Powerset.unit(&Label::nat(1))).unwrap(),
            FinSet::from_labels([Label::nat(1)])
        );
        let e = builtin("exception", &[1]).unwrap();
        let k = Label::right(Label::atom("e0"));
        assert_eq!(minimal_support(e.as_ref(), &n, &k).unwrap(), FinSet::empty());
        let e0 = builtin("exception0", &[1]).unwrap();
        assert!(matches!(
            minimal_support(e0.as_ref(), &n, &k),
            Err(Error::AmbiguousSupport { .. })
        ));
    }

    /// Brute force: the subsets `U` for which some `t ∈ S U` maps to `s`.
    fn supports_by_enumeration(m: &dyn Monad, n: &FinSet, s: &Label) -> Vec<FinSet> {
        n.subsets()
            .filter(|u| {
                let su = m.carrier(u).unwrap();
                let incl = |l: &Label| l.clone();
                su.iter().any(|t| m.fmap(&incl, t) == *s)
            })
            .collect()
    }

    #[test]
    fn support_matches_enumeration() {
        for name in ["powerset", "maybe"] {
            let m = builtin(name, &[]).unwrap();
            let n = FinSet::naturals(3);
            for s in m.carrier(&n).unwrap().iter() {
                let all = supports_by_enumeration(m.as_ref(), &n, s);
                let least = minimal_support(m.as_ref(), &n, s).unwrap();
                assert!(all.iter().all(|u| least.is_subset(u)), "{s}");
                assert!(all.contains(&least));
                let t = restrict_to_support(m.as_ref(), &least, s).unwrap();
                assert!(m.carrier(&least).unwrap().contains(&t));
            }
        }
    }

    #[test]
    fn complement_support_agrees_with_base_support() {
        let m: MonadRef = Arc::new(Powerset);
        let c = complement(m.clone()).unwrap();
        let n = FinSet::naturals(3);
        for s in c.carrier(&n).unwrap().iter() {
            let u = minimal_support(m.as_ref(), &n, s).unwrap();
            // the preimage in S U is itself outside the unit's range
            let t = restrict_to_support(m.as_ref(), &u, s).unwrap();
            assert!(c.carrier(&u).unwrap().contains(&t));
        }
    }
}
