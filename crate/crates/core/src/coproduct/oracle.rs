//! Closed-form coproducts with exception monads, and comparison of a
//! constructed coproduct against such a closed form.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::CoproductMonad;
use crate::error::Result;
use crate::finset::{coproduct, FinMap, FinSet, MATERIALIZE_LIMIT};
use crate::label::{Label, Node};
use crate::monad::{pick, sample_level, Functor, LeafSampler, Monad, MonadRef};

/// A monad carrying, at every set, an algebra for each coproduct summand.
pub trait BialgebraOracle: Monad {
    /// The structure for summand `p` applied to `w ∈ S_p(self X)`.
    fn summand_structure(&self, p: usize, w: &Label) -> Label;
}

/// `X ↦ T(X + E)`, the coproduct of `T` with the exception monad for `E`.
///
/// With `preserves_empty` the exception side is the variant sending `∅` to
/// `∅`; the value at `∅` is then empty when `T ∅` is.
pub struct ExceptionOracle {
    base: MonadRef,
    constants: FinSet,
    exception_index: usize,
    preserves_empty: bool,
}

/// `T(- + E)` with `T` as summand 0 and the exceptions as summand 1.
pub fn exception_oracle(t: MonadRef, e: &FinSet) -> ExceptionOracle {
    ExceptionOracle::new(t, e.clone(), 1, false)
}

impl ExceptionOracle {
    pub fn new(base: MonadRef, constants: FinSet, exception_index: usize, preserves_empty: bool) -> Self {
        ExceptionOracle {
            base,
            constants,
            exception_index,
            preserves_empty,
        }
    }

    fn empty_at_empty(&self) -> bool {
        self.preserves_empty
            && self.base.cardinality(0).map_or_else(
                || {
                    self.base
                        .carrier(&FinSet::empty())
                        .map(|c| c.is_empty())
                        .unwrap_or(false)
                },
                |n| n == 0,
            )
    }
}

impl Functor for ExceptionOracle {
    fn name(&self) -> String {
        format!("{}(- + {})", self.base.name(), self.constants.len())
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        if x.is_empty() && self.empty_at_empty() {
            return Ok(FinSet::empty());
        }
        self.base.carrier(&coproduct(x, &self.constants).sum)
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        let g = |l: &Label| match l.node() {
            Node::Left(x) => Label::left(f(x)),
            _ => l.clone(),
        };
        self.base.fmap(&g, s)
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        if n == 0 && self.empty_at_empty() {
            return Some(0);
        }
        self.base.cardinality(n.checked_add(self.constants.len() as u128)?)
    }
}

impl Monad for ExceptionOracle {
    fn unit(&self, x: &Label) -> Label {
        self.base.unit(&Label::left(x.clone()))
    }

    fn mult(&self, ss: &Label) -> Label {
        let flatten = |l: &Label| match l.node() {
            Node::Left(inner) => inner.clone(),
            _ => self.base.unit(l),
        };
        self.base.mult(&self.base.fmap(&flatten, ss))
    }

    fn unit_preimage(&self, s: &Label) -> Option<Label> {
        self.base.unit_preimage(s)?.as_left().cloned()
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        let constants = &self.constants;
        let mut inner = |r: &mut dyn RngCore| {
            if constants.is_empty() || r.next_u32().is_multiple_of(2) {
                if let Some(x) = leaf(r) {
                    return Some(Label::left(x));
                }
            }
            pick(r, constants).map(Label::right)
        };
        self.base.sample(rng, &mut inner)
    }
}

impl BialgebraOracle for ExceptionOracle {
    fn summand_structure(&self, p: usize, w: &Label) -> Label {
        if p == self.exception_index {
            match w.node() {
                Node::Left(o) => o.clone(),
                _ => self.base.unit(w),
            }
        } else {
            self.base.mult(w)
        }
    }
}

/// Result of comparing a constructed coproduct with a closed form.
#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub constructed_size: usize,
    pub oracle_size: usize,
    /// The comparison map, when sizes agree.
    pub map: Option<FinMap>,
    pub bijective: bool,
    pub unit_commutes: bool,
    /// Elements of the two-fold value checked against the multiplication.
    pub mult_checked: usize,
    pub mult_exhaustive: bool,
    pub mult_witness: Option<Label>,
    pub mismatch: Option<String>,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none() && self.bijective && self.unit_commutes && self.mult_witness.is_none()
    }
}

const MULT_SAMPLES: usize = 500;

/// Builds the morphism from the coproduct at `A` into the oracle that
/// extends the oracle's unit, and checks that it is a bijection commuting
/// with units and multiplications.
pub fn canonical_compare(cop: &CoproductMonad, oracle: &dyn BialgebraOracle, a: &FinSet) -> Result<Comparison> {
    let carrier = cop.carrier(a)?;
    let ocar = oracle.carrier(a)?;
    let mut out = Comparison {
        constructed_size: carrier.len(),
        oracle_size: ocar.len(),
        map: None,
        bijective: false,
        unit_commutes: false,
        mult_checked: 0,
        mult_exhaustive: false,
        mult_witness: None,
        mismatch: None,
    };
    if carrier.len() != ocar.len() {
        out.mismatch = Some(format!(
            "sizes differ: {} constructed, {} in the closed form",
            carrier.len(),
            ocar.len()
        ));
        return Ok(out);
    }
    let unit = |x: &Label| oracle.unit(x);
    let alg = |p: usize, w: &Label| oracle.summand_structure(p, w);
    let cmp = |z: &Label| cop.fold(z, &unit, &alg);
    let table: Vec<Label> = carrier.iter().map(cmp).collect();
    if let Some((z, v)) = carrier.iter().zip(&table).find(|(_, v)| !ocar.contains(v)) {
        out.mismatch = Some(format!("{z} is sent to {v}, outside the closed form"));
        return Ok(out);
    }
    let map = FinMap::new(carrier.clone(), ocar, table)?;
    out.bijective = map.is_bijective();
    out.unit_commutes = a.iter().all(|x| map.apply(&cop.unit(x)) == Some(&oracle.unit(x)));

    // multiplication square on the two-fold value
    let small = oracle
        .cardinality(carrier.len() as u128)
        .is_some_and(|n| n <= MATERIALIZE_LIMIT as u128);
    let level2: Vec<Label> = match small.then(|| cop.carrier(&carrier)).transpose() {
        Ok(Some(c)) => {
            out.mult_exhaustive = true;
            c.elements().to_vec()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(carrier.len() as u64);
            (0..MULT_SAMPLES)
                .filter_map(|_| sample_level(cop, a, 2, &mut rng))
                .collect()
        }
    };
    let outer = |z: &Label| map.apply(z).cloned().expect("carrier element");
    for zz in &level2 {
        out.mult_checked += 1;
        let lhs = outer(&cop.mult(zz));
        let rhs = oracle.mult(&oracle.fmap(&outer, &cop.fold(zz, &unit, &alg)));
        if lhs != rhs {
            out.mult_witness = Some(zz.clone());
            break;
        }
    }
    out.map = Some(map);
    Ok(out)
}
