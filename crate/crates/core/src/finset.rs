//! Finite sets, total maps, coproducts and equalizers.

use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::label::Label;

/// Largest carrier this crate will materialize.
pub const MATERIALIZE_LIMIT: usize = 1 << 18;

/// Default bound on `|X|` for exhaustive bijection search.
pub const BIJECTION_SEARCH_BOUND: usize = 8;

/// A finite set of labels in canonical order.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct FinSet {
    elems: Vec<Label>,
}

impl FinSet {
    pub fn empty() -> Self {
        FinSet { elems: Vec::new() }
    }

    /// Collects labels, sorting them and dropping duplicates.
    pub fn from_labels(labels: impl IntoIterator<Item = Label>) -> Self {
        let mut elems: Vec<Label> = labels.into_iter().collect();
        elems.sort();
        elems.dedup();
        FinSet { elems }
    }

    /// Like [`FinSet::from_labels`] but rejects repeated labels.
    pub fn try_distinct(labels: Vec<Label>) -> Result<Self> {
        let n = labels.len();
        let set = FinSet::from_labels(labels);
        if set.len() != n {
            return Err(Error::Contract("repeated label in finite set".into()));
        }
        Ok(set)
    }

    /// The index set `{0, .., n-1}`.
    pub fn naturals(n: usize) -> Self {
        FinSet {
            elems: (0..n as u64).map(Label::nat).collect(),
        }
    }

    /// `n` named atoms `a, b, c, ...`.
    pub fn atoms(n: usize) -> Self {
        let name = |i: usize| {
            if n <= 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{i:05}")
            }
        };
        FinSet::from_labels((0..n).map(|i| Label::atom(name(i))))
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Label> {
        self.elems.iter()
    }

    pub fn elements(&self) -> &[Label] {
        &self.elems
    }

    pub fn get(&self, i: usize) -> Option<&Label> {
        self.elems.get(i)
    }

    pub fn index_of(&self, l: &Label) -> Option<usize> {
        self.elems.binary_search(l).ok()
    }

    pub fn contains(&self, l: &Label) -> bool {
        self.index_of(l).is_some()
    }

    pub fn is_subset(&self, other: &FinSet) -> bool {
        self.iter().all(|l| other.contains(l))
    }

    /// Elements of `self` not in `other`.
    pub fn difference(&self, other: &FinSet) -> FinSet {
        FinSet {
            elems: self.iter().filter(|l| !other.contains(l)).cloned().collect(),
        }
    }

    /// All subsets in increasing size, each size in lexicographic order.
    pub fn subsets(&self) -> impl Iterator<Item = FinSet> + '_ {
        (0..=self.len()).flat_map(move |k| self.subsets_of_size(k))
    }

    pub fn subsets_of_size(&self, k: usize) -> impl Iterator<Item = FinSet> + '_ {
        self.elems.iter().cloned().combinations(k).map(|elems| FinSet { elems })
    }
}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.elems.iter()).finish()
    }
}

impl fmt::Display for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.elems.iter().join(", "))
    }
}

impl<'a> IntoIterator for &'a FinSet {
    type Item = &'a Label;
    type IntoIter = std::slice::Iter<'a, Label>;

    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

impl FromIterator<Label> for FinSet {
    fn from_iter<I: IntoIterator<Item = Label>>(iter: I) -> Self {
        FinSet::from_labels(iter)
    }
}

/// A total map between finite sets, stored as a table aligned with the
/// domain's canonical order.
#[derive(Clone, PartialEq, Eq, Hash, Serialize)]
pub struct FinMap {
    dom: FinSet,
    cod: FinSet,
    table: Vec<Label>,
}

impl FinMap {
    pub fn new(dom: FinSet, cod: FinSet, table: Vec<Label>) -> Result<Self> {
        if table.len() != dom.len() {
            return Err(Error::Contract(format!(
                "table has {} rows for a domain of {} elements",
                table.len(),
                dom.len()
            )));
        }
        if let Some(bad) = table.iter().find(|l| !cod.contains(l)) {
            return Err(Error::Contract(format!("{bad} is outside the codomain")));
        }
        Ok(FinMap { dom, cod, table })
    }

    pub fn from_fn(dom: FinSet, cod: FinSet, f: impl Fn(&Label) -> Label) -> Result<Self> {
        let table = dom.iter().map(f).collect();
        FinMap::new(dom, cod, table)
    }

    pub fn identity(x: &FinSet) -> Self {
        FinMap {
            dom: x.clone(),
            cod: x.clone(),
            table: x.elements().to_vec(),
        }
    }

    /// The inclusion of `sub` into `sup`.
    pub fn inclusion(sub: &FinSet, sup: &FinSet) -> Result<Self> {
        FinMap::new(sub.clone(), sup.clone(), sub.elements().to_vec())
    }

    /// The unique map out of the empty set.
    pub fn from_empty(cod: &FinSet) -> Self {
        FinMap {
            dom: FinSet::empty(),
            cod: cod.clone(),
            table: Vec::new(),
        }
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn table(&self) -> &[Label] {
        &self.table
    }

    pub fn apply(&self, x: &Label) -> Option<&Label> {
        self.dom.index_of(x).map(|i| &self.table[i])
    }

    /// Like [`FinMap::apply`] but reports a missing element as an error.
    pub fn eval(&self, x: &Label) -> Result<Label> {
        self.apply(x).cloned().ok_or_else(|| Error::NotAnElement(x.clone()))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Label, &Label)> {
        self.dom.iter().zip(self.table.iter())
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &FinMap) -> Result<FinMap> {
        if self.cod != next.dom {
            return Err(Error::Contract("composing maps with mismatched ends".into()));
        }
        let table = self
            .table
            .iter()
            .map(|y| next.apply(y).cloned().expect("codomain checked"))
            .collect();
        Ok(FinMap {
            dom: self.dom.clone(),
            cod: next.cod.clone(),
            table,
        })
    }

    /// First domain element whose image repeats an earlier one.
    pub fn collision(&self) -> Option<Label> {
        let mut seen = std::collections::HashMap::with_capacity(self.table.len());
        for (x, y) in self.pairs() {
            if seen.insert(y, x).is_some() {
                return Some(x.clone());
            }
        }
        None
    }

    pub fn is_injective(&self) -> bool {
        self.collision().is_none()
    }

    pub fn is_surjective(&self) -> bool {
        FinSet::from_labels(self.table.iter().cloned()).len() == self.cod.len()
    }

    pub fn is_bijective(&self) -> bool {
        self.dom.len() == self.cod.len() && self.is_injective()
    }

    pub fn image(&self) -> FinSet {
        FinSet::from_labels(self.table.iter().cloned())
    }

    pub fn inverse(&self) -> Result<FinMap> {
        if !self.is_bijective() {
            return Err(Error::NotBijective);
        }
        let mut pairs: Vec<(Label, Label)> = self.pairs().map(|(x, y)| (y.clone(), x.clone())).collect();
        pairs.sort();
        Ok(FinMap {
            dom: self.cod.clone(),
            cod: self.dom.clone(),
            table: pairs.into_iter().map(|(_, x)| x).collect(),
        })
    }

    /// Whether every element is sent to itself (an inclusion of labels).
    pub fn is_label_identity(&self) -> bool {
        self.pairs().all(|(x, y)| x == y)
    }
}

impl fmt::Debug for FinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.pairs()).finish()
    }
}

/// Iterates all maps `dom -> cod` in odometer order (last domain element
/// varies fastest).
pub fn all_maps(dom: &FinSet, cod: &FinSet, budget: usize) -> Result<impl Iterator<Item = FinMap>> {
    let count = (cod.len() as u128).checked_pow(dom.len() as u32);
    match count {
        Some(c) if c <= budget as u128 => {}
        _ => {
            return Err(Error::BudgetExceeded(format!(
                "{}^{} maps exceed the enumeration budget {budget}",
                cod.len(),
                dom.len()
            )))
        }
    }
    let dom = dom.clone();
    let cod = cod.clone();
    let n = dom.len();
    let k = cod.len();
    let mut digits = vec![0usize; n];
    let mut done = k == 0 && n > 0;
    Ok(std::iter::from_fn(move || {
        if done {
            return None;
        }
        let table = digits.iter().map(|&d| cod.elements()[d].clone()).collect();
        let map = FinMap {
            dom: dom.clone(),
            cod: cod.clone(),
            table,
        };
        // advance
        let mut i = n;
        loop {
            if i == 0 {
                done = true;
                break;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < k {
                break;
            }
            digits[i] = 0;
        }
        Some(map)
    }))
}

/// `X + Y` with its two injections.
#[derive(Clone, Debug)]
pub struct Coproduct {
    pub sum: FinSet,
    pub inl: FinMap,
    pub inr: FinMap,
}

impl Coproduct {
    /// The unique `w` with `w ∘ inl = u` and `w ∘ inr = v`.
    pub fn copair(&self, u: &FinMap, v: &FinMap) -> Result<FinMap> {
        if u.dom() != self.inl.dom() || v.dom() != self.inr.dom() || u.cod() != v.cod() {
            return Err(Error::Contract("copair legs do not match the coproduct".into()));
        }
        FinMap::from_fn(self.sum.clone(), u.cod().clone(), |z| match z.node() {
            crate::label::Node::Left(x) => u.apply(x).cloned().expect("left leg"),
            crate::label::Node::Right(y) => v.apply(y).cloned().expect("right leg"),
            _ => unreachable!("coproduct labels are tagged"),
        })
    }
}

pub fn coproduct(x: &FinSet, y: &FinSet) -> Coproduct {
    let sum = FinSet::from_labels(
        x.iter()
            .map(|l| Label::left(l.clone()))
            .chain(y.iter().map(|l| Label::right(l.clone()))),
    );
    let inl = FinMap::from_fn(x.clone(), sum.clone(), |l| Label::left(l.clone())).expect("inl");
    let inr = FinMap::from_fn(y.clone(), sum.clone(), |l| Label::right(l.clone())).expect("inr");
    Coproduct { sum, inl, inr }
}

/// `f + g : X + Y -> X' + Y'`.
pub fn sum_map(f: &FinMap, g: &FinMap) -> FinMap {
    let dom = coproduct(f.dom(), g.dom()).sum;
    let cod = coproduct(f.cod(), g.cod()).sum;
    FinMap::from_fn(dom, cod, |z| match z.node() {
        crate::label::Node::Left(x) => Label::left(f.apply(x).cloned().expect("left")),
        crate::label::Node::Right(y) => Label::right(g.apply(y).cloned().expect("right")),
        _ => unreachable!("coproduct labels are tagged"),
    })
    .expect("sum of maps lands in the sum")
}

/// The subset where `f` and `g` agree, with its inclusion.
pub fn equalizer(f: &FinMap, g: &FinMap) -> Result<(FinSet, FinMap)> {
    if f.dom() != g.dom() || f.cod() != g.cod() {
        return Err(Error::Contract("equalizer of maps with different ends".into()));
    }
    let e = FinSet::from_labels(
        f.pairs()
            .zip(g.table())
            .filter(|((_, fx), gx)| fx == gx)
            .map(|((x, _), _)| x.clone()),
    );
    let incl = FinMap::inclusion(&e, f.dom())?;
    Ok((e, incl))
}

pub fn is_injective(f: &FinMap) -> bool {
    f.is_injective()
}

/// First bijection `x -> y` (in lexicographic permutation order) satisfying
/// `constraint`.
pub fn search_bijection(x: &FinSet, y: &FinSet, bound: usize, constraint: impl Fn(&FinMap) -> bool) -> Result<FinMap> {
    if x.len() != y.len() {
        return Err(Error::NotFound);
    }
    if x.len() > bound {
        return Err(Error::BudgetExceeded(format!(
            "bijection search on {} elements exceeds bound {bound}",
            x.len()
        )));
    }
    for perm in (0..y.len()).permutations(y.len()) {
        let table = perm.iter().map(|&i| y.elements()[i].clone()).collect();
        let cand = FinMap {
            dom: x.clone(),
            cod: y.clone(),
            table,
        };
        if constraint(&cand) {
            return Ok(cand);
        }
    }
    Err(Error::NotFound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(names: &[&str]) -> FinSet {
        FinSet::from_labels(names.iter().map(|n| Label::atom(*n)))
    }

    #[test]
    fn coproduct_sizes() {
        assert_eq!(coproduct(&set(&["a"]), &set(&["b"])).sum.len(), 2);
        let c = coproduct(&FinSet::empty(), &set(&["p", "q"]));
        assert_eq!(c.sum.len(), 2);
        assert!(c.inr.is_bijective());
        let c = coproduct(&FinSet::naturals(2), &FinSet::naturals(1));
        assert_eq!(c.sum.len(), 3);
        assert!(c.inl.is_injective() && c.inr.is_injective());
        assert!(c.inl.image().iter().all(|l| l.as_left().is_some()));
        assert!(c.inr.image().iter().all(|l| l.as_right().is_some()));
    }

    #[test]
    fn injectivity() {
        let x = set(&["a", "b"]);
        assert!(FinMap::identity(&x).is_injective());
        let k = FinMap::from_fn(x.clone(), set(&["z"]), |_| Label::atom("z")).unwrap();
        assert!(!k.is_injective());
        assert_eq!(k.collision(), Some(Label::atom("b")));
    }

    #[test]
    fn equalizer_of_equal_maps_is_domain() {
        let x = FinSet::naturals(3);
        let (e, incl) = equalizer(&FinMap::identity(&x), &FinMap::identity(&x)).unwrap();
        assert_eq!(e, x);
        assert!(incl.is_bijective());
    }

    #[test]
    fn equalizer_rejects_mismatch() {
        let f = FinMap::identity(&FinSet::naturals(2));
        let g = FinMap::identity(&FinSet::naturals(3));
        assert!(matches!(equalizer(&f, &g), Err(Error::Contract(_))));
    }

    #[test]
    fn bijection_search() {
        let a = set(&["a"]);
        let found = search_bijection(&a, &a, 8, |_| true).unwrap();
        assert_eq!(found, FinMap::identity(&a));
        assert!(matches!(
            search_bijection(&FinSet::naturals(2), &FinSet::naturals(3), 8, |_| true),
            Err(Error::NotFound)
        ));
        assert!(matches!(
            search_bijection(&FinSet::naturals(9), &FinSet::naturals(9), 8, |_| true),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn equivariant_bijection_is_unique() {
        // x = {0,1} with the swap, y = {a,b} with the swap: both candidate
        // bijections commute with the involutions, so use a fixed-point-free
        // involution on x against the identity on y to leave none, and the
        // swap against the swap with a pinned point to leave exactly one.
        let x = FinSet::naturals(2);
        let y = set(&["a", "b"]);
        let swap_x = FinMap::from_fn(x.clone(), x.clone(), |l| Label::nat(1 - l.as_nat().unwrap())).unwrap();
        let id_y = FinMap::identity(&y);
        let commutes = |f: &FinMap, sx: &FinMap, sy: &FinMap| {
            x.iter()
                .all(|e| f.apply(sx.apply(e).unwrap()) == sy.apply(f.apply(e).unwrap()))
        };
        assert!(matches!(
            search_bijection(&x, &y, 8, |f| commutes(f, &swap_x, &id_y)),
            Err(Error::NotFound)
        ));
        let swap_y = FinMap::from_fn(y.clone(), y.clone(), |l| {
            if *l == Label::atom("a") {
                Label::atom("b")
            } else {
                Label::atom("a")
            }
        })
        .unwrap();
        let hits: Vec<_> = (0..y.len())
            .permutations(2)
            .map(|p| {
                FinMap::new(
                    x.clone(),
                    y.clone(),
                    p.iter().map(|&i| y.elements()[i].clone()).collect(),
                )
                .unwrap()
            })
            .filter(|f| commutes(f, &swap_x, &swap_y) && f.apply(&Label::nat(0)) == Some(&Label::atom("b")))
            .collect();
        assert_eq!(hits.len(), 1);
        let found = search_bijection(&x, &y, 8, |f| {
            commutes(f, &swap_x, &swap_y) && f.apply(&Label::nat(0)) == Some(&Label::atom("b"))
        })
        .unwrap();
        assert_eq!(found, hits[0]);
    }

    #[test]
    fn coproduct_universal_property() {
        let x = FinSet::naturals(2);
        let y = set(&["p"]);
        let c = coproduct(&x, &y);
        for wn in 0..=3 {
            let w = FinSet::atoms(wn);
            for u in all_maps(&x, &w, 1000).unwrap() {
                for v in all_maps(&y, &w, 1000).unwrap() {
                    let hits: Vec<FinMap> = all_maps(&c.sum, &w, 1000)
                        .unwrap()
                        .filter(|m| c.inl.then(m).unwrap() == u && c.inr.then(m).unwrap() == v)
                        .collect();
                    assert_eq!(hits.len(), 1);
                    assert_eq!(hits[0], c.copair(&u, &v).unwrap());
                }
            }
        }
    }

    #[test]
    fn equalizer_universal_property() {
        let x = FinSet::naturals(3);
        let y = FinSet::naturals(2);
        for f in all_maps(&x, &y, 100).unwrap() {
            for g in all_maps(&x, &y, 100).unwrap() {
                let (e, incl) = equalizer(&f, &g).unwrap();
                let w = FinSet::atoms(2);
                for h in all_maps(&w, &x, 100).unwrap() {
                    let equalizes = h.then(&f).unwrap() == h.then(&g).unwrap();
                    let factor: Vec<FinMap> = all_maps(&w, &e, 100)
                        .unwrap()
                        .filter(|k| k.then(&incl).unwrap() == h)
                        .collect();
                    assert_eq!(factor.len(), usize::from(equalizes));
                }
            }
        }
    }

    #[test]
    fn all_maps_counts() {
        assert_eq!(
            all_maps(&FinSet::naturals(2), &FinSet::naturals(3), 100)
                .unwrap()
                .count(),
            9
        );
        assert_eq!(all_maps(&FinSet::empty(), &FinSet::empty(), 100).unwrap().count(), 1);
        assert_eq!(
            all_maps(&FinSet::naturals(1), &FinSet::empty(), 100).unwrap().count(),
            0
        );
        assert!(all_maps(&FinSet::naturals(30), &FinSet::naturals(2), 100).is_err());
    }

    #[test]
    fn subsets_in_size_order() {
        let s: Vec<FinSet> = FinSet::naturals(3).subsets().collect();
        assert_eq!(s.len(), 8);
        assert!(s[0].is_empty());
        assert_eq!(s[7].len(), 3);
        assert!(s.windows(2).all(|w| w[0].len() <= w[1].len()));
    }

    #[test]
    fn inverse_round_trip() {
        let x = set(&["a", "b", "c"]);
        let y = FinSet::naturals(3);
        let f = search_bijection(&x, &y, 8, |f| f.apply(&Label::atom("a")) == Some(&Label::nat(2))).unwrap();
        let g = f.inverse().unwrap();
        assert_eq!(f.then(&g).unwrap(), FinMap::identity(&x));
        assert_eq!(g.then(&f).unwrap(), FinMap::identity(&y));
    }
}
