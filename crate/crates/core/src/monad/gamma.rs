//! Algebra structures on `R` as natural families `S X -> R^(R^X)`.

use itertools::Itertools;

use super::Monad;
use crate::error::{Error, Result};
use crate::finset::{all_maps, FinMap, FinSet};
use crate::label::Label;

/// The family induced by an Eilenberg-Moore algebra `alg : S R -> R`.
///
/// A function `X -> R` is encoded as the tuple of its values in `X`'s order,
/// and an element of `R^(R^X)` as the tuple of its values over all of
/// `R^X` in odometer order.
pub struct Gamma<'a> {
    monad: &'a dyn Monad,
    r: FinSet,
    alg: FinMap,
}

/// `R^X` in odometer order.
fn functions(x: &FinSet, r: &FinSet) -> Result<Vec<FinMap>> {
    Ok(all_maps(x, r, 1 << 16)?.collect())
}

fn encode(f: &FinMap) -> Label {
    Label::tuple(f.table().to_vec())
}

/// Checks the unit and multiplication axioms of `alg : S R -> R`.
pub fn check_em_algebra(s: &dyn Monad, r: &FinSet, alg: &FinMap) -> Result<()> {
    let sr = s.carrier(r)?;
    if alg.dom() != &sr || alg.cod() != r {
        return Err(Error::InvalidAlgebra(format!(
            "structure map must go from {} to R",
            s.name()
        )));
    }
    for x in r {
        if alg.eval(&s.unit(x))? != *x {
            return Err(Error::InvalidAlgebra(format!("unit axiom fails at {x}")));
        }
    }
    let ssr = s.carrier(&sr)?;
    let a = |l: &Label| alg.apply(l).cloned().expect("total");
    for t in &ssr {
        if alg.eval(&s.mult(t))? != alg.eval(&s.fmap(&a, t))? {
            return Err(Error::InvalidAlgebra(format!("multiplication axiom fails at {t}")));
        }
    }
    Ok(())
}

/// Builds the family `X ↦ (s ↦ (k ↦ alg(S k (s))))`.
pub fn gamma<'a>(s: &'a dyn Monad, r: &FinSet, alg: &FinMap) -> Result<Gamma<'a>> {
    check_em_algebra(s, r, alg)?;
    Ok(Gamma {
        monad: s,
        r: r.clone(),
        alg: alg.clone(),
    })
}

impl Gamma<'_> {
    pub fn base(&self) -> &FinSet {
        &self.r
    }

    /// The value at `s ∈ S X`, as a tuple indexed by `R^X`.
    pub fn apply(&self, x: &FinSet, s: &Label) -> Result<Label> {
        let ks = functions(x, &self.r)?;
        let vals = ks
            .iter()
            .map(|k| {
                let kf = |l: &Label| k.apply(l).cloned().expect("total");
                self.alg.eval(&self.monad.fmap(&kf, s))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Label::tuple(vals))
    }

    /// The component `S X -> R^(R^X)`.
    pub fn component(&self, x: &FinSet) -> Result<FinMap> {
        let dom = self.monad.carrier(x)?;
        let n = functions(x, &self.r)?.len();
        let cod: FinSet = (0..n)
            .map(|_| self.r.elements().to_vec())
            .multi_cartesian_product()
            .map(Label::tuple)
            .chain((n == 0).then(|| Label::tuple(vec![])))
            .collect();
        let table = dom.iter().map(|s| self.apply(x, s)).collect::<Result<_>>()?;
        FinMap::new(dom, cod, table)
    }

    /// Position of `k` in the enumeration of `R^X`.
    pub fn index_of(&self, x: &FinSet, k: &FinMap) -> Result<usize> {
        let target = encode(k);
        functions(x, &self.r)?
            .iter()
            .position(|f| encode(f) == target)
            .ok_or(Error::NotAnElement(target))
    }
}

/// Recovers the algebra from the component at `R`, evaluated at `id_R`.
pub fn gamma_inverse(s: &dyn Monad, r: &FinSet, component_at_r: &FinMap) -> Result<FinMap> {
    let id = FinMap::identity(r);
    let target = encode(&id);
    let idx = functions(r, r)?
        .iter()
        .position(|f| encode(f) == target)
        .expect("identity is a function R -> R");
    let sr = s.carrier(r)?;
    let table = sr
        .iter()
        .map(|t| {
            let v = component_at_r.eval(t)?;
            Ok(v.as_tuple().expect("encoded functional")[idx].clone())
        })
        .collect::<Result<_>>()?;
    FinMap::new(sr, r.clone(), table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monad::{action, builtin, Exception, Functor};

    /// Every EM algebra on `r`, by trying all maps `S R -> R`.
    fn brute_force_algebras(s: &dyn Monad, r: &FinSet) -> Vec<FinMap> {
        let sr = s.carrier(r).unwrap();
        all_maps(&sr, r, 1 << 20)
            .unwrap()
            .filter(|alg| check_em_algebra(s, r, alg).is_ok())
            .collect()
    }

    #[test]
    fn round_trip_on_small_bases() {
        for m in [builtin("exception", &[1]).unwrap(), builtin("maybe", &[]).unwrap()] {
            let mut total = 0;
            for n in 0..=2 {
                let r = FinSet::atoms(n);
                for alg in brute_force_algebras(m.as_ref(), &r) {
                    let g = gamma(m.as_ref(), &r, &alg).unwrap();
                    let back = gamma_inverse(m.as_ref(), &r, &g.component(&r).unwrap()).unwrap();
                    assert_eq!(back, alg);
                    total += 1;
                }
            }
            // algebras for X + 1 are pointed sets: 0 + 1 + 2
            assert_eq!(total, 3, "{}", m.name());
        }
    }

    #[test]
    fn singleton_base_gives_constant_components() {
        let m = builtin("powerset", &[]).unwrap();
        let r = FinSet::atoms(1);
        let algs = brute_force_algebras(m.as_ref(), &r);
        assert_eq!(algs.len(), 1);
        let g = gamma(m.as_ref(), &r, &algs[0]).unwrap();
        for n in 0..=2 {
            let c = g.component(&FinSet::atoms(n)).unwrap();
            assert_eq!(c.cod().len(), 1);
            assert_eq!(c.image().len(), 1);
        }
    }

    #[test]
    fn component_at_empty_set_is_given_by_constants() {
        let m = Exception::new(Exception::constants(2));
        let r = FinSet::atoms(2);
        // e0 ↦ a, e1 ↦ b
        let sr = m.carrier(&r).unwrap();
        let alg = FinMap::from_fn(sr, r.clone(), |t| match t.as_left() {
            Some(x) => x.clone(),
            None if *t.as_right().unwrap() == Label::atom("e0") => Label::atom("a"),
            None => Label::atom("b"),
        })
        .unwrap();
        let g = gamma(&m, &r, &alg).unwrap();
        let c = g.component(&FinSet::empty()).unwrap();
        // R^∅ has one element, so R^(R^∅) ≅ R
        assert_eq!(c.cod().len(), 2);
        assert_eq!(
            c.eval(&Label::right(Label::atom("e1"))).unwrap(),
            Label::tuple(vec![Label::atom("b")])
        );
    }

    #[test]
    fn components_are_natural() {
        let m = builtin("maybe", &[]).unwrap();
        let r = FinSet::atoms(2);
        for alg in brute_force_algebras(m.as_ref(), &r) {
            let g = gamma(m.as_ref(), &r, &alg).unwrap();
            let x = FinSet::naturals(2);
            let y = FinSet::naturals(3);
            for f in all_maps(&x, &y, 100).unwrap() {
                let sf = action(m.as_ref(), &f).unwrap();
                let ky = functions(&y, &r).unwrap();
                for s in m.carrier(&x).unwrap().iter() {
                    let lhs = g.apply(&y, &sf.eval(s).unwrap()).unwrap();
                    let rhs = g.apply(&x, s).unwrap();
                    // (Γ_Y (S f s))(k) = (Γ_X s)(k ∘ f)
                    for (i, k) in ky.iter().enumerate() {
                        let kf = f.then(k).unwrap();
                        let j = g.index_of(&x, &kf).unwrap();
                        assert_eq!(lhs.as_tuple().unwrap()[i], rhs.as_tuple().unwrap()[j]);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_non_algebras() {
        let m = builtin("maybe", &[]).unwrap();
        let r = FinSet::atoms(2);
        let sr = m.carrier(&r).unwrap();
        let constant = FinMap::from_fn(sr, r.clone(), |_| Label::atom("a")).unwrap();
        assert!(matches!(
            gamma(m.as_ref(), &r, &constant),
            Err(Error::InvalidAlgebra(_))
        ));
    }
}
