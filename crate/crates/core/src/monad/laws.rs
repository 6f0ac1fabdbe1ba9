use std::collections::HashMap;
use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{pick, Functor, Monad};
use crate::finset::{all_maps, FinMap, FinSet};
use crate::label::Label;

/// Elements per level beyond which checks switch to sampling.
pub const EXHAUSTIVE_LIMIT: usize = 4096;
/// Maps per probe pair beyond which naturality checks sample maps.
const MAP_LIMIT: usize = 64;
const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Law {
    LeftUnit,
    RightUnit,
    Associativity,
    UnitNaturality,
    MultNaturality,
    FunctorIdentity,
    FunctorComposition,
    /// Operations land in the materialized carriers.
    Closure,
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Law::LeftUnit => "left-unit",
            Law::RightUnit => "right-unit",
            Law::Associativity => "associativity",
            Law::UnitNaturality => "unit-naturality",
            Law::MultNaturality => "mult-naturality",
            Law::FunctorIdentity => "functor-identity",
            Law::FunctorComposition => "functor-composition",
            Law::Closure => "closure",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LawOutcome {
    pub law: Law,
    /// Size of the probe set.
    pub probe: usize,
    /// Number of instances checked.
    pub checked: usize,
    /// Whether every instance at this probe was checked.
    pub exhaustive: bool,
    /// First failing element, if any.
    pub witness: Option<Label>,
}

impl LawOutcome {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub monad: String,
    pub outcomes: Vec<LawOutcome>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(LawOutcome::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawOutcome> {
        self.outcomes.iter().filter(|o| !o.passed())
    }

    pub fn first_failure(&self, law: Law) -> Option<&LawOutcome> {
        self.failures().find(|o| o.law == law)
    }
}

/// Probe sets of sizes 0 through 3.
pub fn default_probes() -> Vec<FinSet> {
    (0..=3).map(FinSet::atoms).collect()
}

/// The elements one level up: all of them when small, else samples.
struct Level {
    elems: Vec<Label>,
    exhaustive: bool,
}

fn materialize_level(s: &dyn Functor, set: &FinSet) -> Option<FinSet> {
    match s.cardinality(set.len() as u128) {
        Some(n) if n > EXHAUSTIVE_LIMIT as u128 => return None,
        None if set.len() > 8 => return None,
        _ => {}
    }
    s.carrier(set).ok().filter(|c| c.len() <= EXHAUSTIVE_LIMIT)
}

/// Draws an element of `S^level X`.
pub(crate) fn sample_level(s: &dyn Monad, x: &FinSet, level: usize, rng: &mut dyn RngCore) -> Option<Label> {
    if level == 0 {
        return pick(rng, x);
    }
    let mut leaf = |r: &mut dyn RngCore| sample_level(s, x, level - 1, r);
    s.sample(rng, &mut leaf)
}

/// Draws until `samples` elements are found; samplers may fail on some
/// draws, so give up after a fixed number of attempts.
fn sampled(s: &dyn Monad, x: &FinSet, level: usize, samples: usize, rng: &mut dyn RngCore) -> Level {
    let elems = (0..samples * 20)
        .filter_map(|_| sample_level(s, x, level, rng))
        .take(samples)
        .collect();
    Level {
        elems,
        exhaustive: false,
    }
}

/// `S X`, `S S X` and `S S S X` as far as they can be enumerated.
fn levels(s: &dyn Monad, x: &FinSet, samples: usize, rng: &mut dyn RngCore) -> Vec<(Level, Option<FinSet>)> {
    let mut out = Vec::with_capacity(3);
    let mut below = Some(x.clone());
    for level in 1..=3 {
        let entry = match below.as_ref().and_then(|b| materialize_level(s, b)) {
            Some(set) => (
                Level {
                    elems: set.elements().to_vec(),
                    exhaustive: true,
                },
                Some(set),
            ),
            None => (sampled(s, x, level, samples, rng), None),
        };
        below = entry.1.clone();
        out.push(entry);
    }
    out
}

struct Tally {
    law: Law,
    probe: usize,
    checked: usize,
    exhaustive: bool,
    witness: Option<Label>,
}

impl Tally {
    fn new(law: Law, probe: usize, exhaustive: bool) -> Self {
        Tally {
            law,
            probe,
            checked: 0,
            exhaustive,
            witness: None,
        }
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> Label) {
        self.checked += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn finish(self) -> LawOutcome {
        LawOutcome {
            law: self.law,
            probe: self.probe,
            checked: self.checked,
            exhaustive: self.exhaustive,
            witness: self.witness,
        }
    }
}

/// Maps `X -> Y`, all of them when few, else a random selection.
fn probe_maps(x: &FinSet, y: &FinSet, rng: &mut dyn RngCore) -> (Vec<FinMap>, bool) {
    let count = (y.len() as u128).checked_pow(x.len() as u32);
    if count.is_some_and(|c| c <= MAP_LIMIT as u128) {
        let maps = all_maps(x, y, MAP_LIMIT).expect("within budget").collect();
        return (maps, true);
    }
    let maps = (0..MAP_LIMIT)
        .map(|_| {
            let table = x.iter().map(|_| pick(rng, y).expect("nonempty codomain")).collect();
            FinMap::new(x.clone(), y.clone(), table).expect("valid random map")
        })
        .collect();
    (maps, false)
}

fn as_fn(f: &FinMap) -> impl Fn(&Label) -> Label + '_ {
    move |l| f.apply(l).cloned().unwrap_or_else(|| panic!("{l} outside map domain"))
}

/// Checks the monad laws, functoriality, naturality of unit and
/// multiplication and closure of the operations on every probe.
///
/// Each law is checked exhaustively where the relevant level of `S^k X` has
/// at most [`EXHAUSTIVE_LIMIT`] elements and on `samples` random elements
/// otherwise.
pub fn check_laws(s: &dyn Monad, probes: &[FinSet], samples: usize) -> LawReport {
    check_laws_seeded(s, probes, samples, DEFAULT_SEED)
}

pub fn check_laws_seeded(s: &dyn Monad, probes: &[FinSet], samples: usize, seed: u64) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes = Vec::new();
    let levels_of: Vec<_> = probes.iter().map(|x| levels(s, x, samples, &mut rng)).collect();

    for (x, lv) in probes.iter().zip(&levels_of) {
        let (l1, l2, l3) = (&lv[0], &lv[1], &lv[2]);
        let n = x.len();

        let mut closure = Tally::new(Law::Closure, n, l1.0.exhaustive && l2.0.exhaustive);
        if let Some(sx) = &l1.1 {
            for a in x {
                closure.check(sx.contains(&s.unit(a)), || a.clone());
            }
            for ss in &l2.0.elems {
                closure.check(sx.contains(&s.mult(ss)), || ss.clone());
            }
        }
        outcomes.push(closure.finish());

        let mut left = Tally::new(Law::LeftUnit, n, l1.0.exhaustive);
        let mut right = Tally::new(Law::RightUnit, n, l1.0.exhaustive);
        let mut ident = Tally::new(Law::FunctorIdentity, n, l1.0.exhaustive);
        let unit = |a: &Label| s.unit(a);
        let id = |a: &Label| a.clone();
        for e in &l1.0.elems {
            left.check(s.mult(&s.fmap(&unit, e)) == *e, || e.clone());
            right.check(s.mult(&s.unit(e)) == *e, || e.clone());
            ident.check(s.fmap(&id, e) == *e, || e.clone());
        }
        outcomes.extend([left.finish(), right.finish(), ident.finish()]);

        let mut assoc = Tally::new(Law::Associativity, n, l3.0.exhaustive);
        let mult = |a: &Label| s.mult(a);
        for e in &l3.0.elems {
            assoc.check(s.mult(&s.mult(e)) == s.mult(&s.fmap(&mult, e)), || e.clone());
        }
        outcomes.push(assoc.finish());

        let mut unit_nat = Tally::new(Law::UnitNaturality, n, true);
        let mut mult_nat = Tally::new(Law::MultNaturality, n, l2.0.exhaustive);
        let mut comp = Tally::new(Law::FunctorComposition, n, l1.0.exhaustive);
        for y in probes.iter().filter(|y| !y.is_empty() || x.is_empty()) {
            let (maps, all) = probe_maps(x, y, &mut rng);
            unit_nat.exhaustive &= all;
            mult_nat.exhaustive &= all;
            comp.exhaustive &= all;
            for f in &maps {
                let fa = as_fn(f);
                for a in x {
                    unit_nat.check(s.fmap(&fa, &s.unit(a)) == s.unit(&fa(a)), || a.clone());
                }
                let sf = |t: &Label| s.fmap(&fa, t);
                for ss in &l2.0.elems {
                    mult_nat.check(s.fmap(&fa, &s.mult(ss)) == s.mult(&s.fmap(&sf, ss)), || ss.clone());
                }
                // compose with a map Y -> Y drawn from a cyclic shift and a collapse
                for g in endomaps(y) {
                    let ga = as_fn(&g);
                    let gf = |a: &Label| ga(&fa(a));
                    for e in &l1.0.elems {
                        comp.check(s.fmap(&gf, e) == s.fmap(&ga, &s.fmap(&fa, e)), || e.clone());
                    }
                }
            }
        }
        outcomes.extend([unit_nat.finish(), mult_nat.finish(), comp.finish()]);
    }

    LawReport {
        monad: s.name(),
        outcomes,
    }
}

/// A cyclic shift and a collapse onto the first element.
fn endomaps(y: &FinSet) -> Vec<FinMap> {
    if y.is_empty() {
        return vec![FinMap::identity(y)];
    }
    let n = y.len();
    let shift = (0..n).map(|i| y.elements()[(i + 1) % n].clone()).collect();
    let collapse = vec![y.elements()[0].clone(); n];
    vec![
        FinMap::new(y.clone(), y.clone(), shift).expect("shift"),
        FinMap::new(y.clone(), y.clone(), collapse).expect("collapse"),
    ]
}

/// Functoriality and closure for a plain functor, over all maps between
/// probes (or a random selection when there are many).
pub fn check_functor_laws(s: &dyn Functor, probes: &[FinSet]) -> LawReport {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut outcomes = Vec::new();
    for x in probes {
        let Ok(sx) = s.carrier(x) else { continue };
        let n = x.len();
        let id = |a: &Label| a.clone();
        let mut ident = Tally::new(Law::FunctorIdentity, n, true);
        for e in &sx {
            ident.check(s.fmap(&id, e) == *e, || e.clone());
        }
        let mut closure = Tally::new(Law::Closure, n, true);
        let mut comp = Tally::new(Law::FunctorComposition, n, true);
        for y in probes.iter().filter(|y| !y.is_empty() || x.is_empty()) {
            let Ok(sy) = s.carrier(y) else { continue };
            let (maps, all) = probe_maps(x, y, &mut rng);
            closure.exhaustive &= all;
            comp.exhaustive &= all;
            for f in &maps {
                let fa = as_fn(f);
                for e in &sx {
                    closure.check(sy.contains(&s.fmap(&fa, e)), || e.clone());
                }
                for g in endomaps(y) {
                    let ga = as_fn(&g);
                    let gf = |a: &Label| ga(&fa(a));
                    for e in &sx {
                        comp.check(s.fmap(&gf, e) == s.fmap(&ga, &s.fmap(&fa, e)), || e.clone());
                    }
                }
            }
        }
        outcomes.extend([ident.finish(), closure.finish(), comp.finish()]);
    }
    LawReport {
        monad: s.name(),
        outcomes,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InjectionCheck {
    pub holds: bool,
    /// Number of injections checked.
    pub checked: usize,
    /// Two distinct elements identified by some injection's action.
    pub witness: Option<(Label, Label)>,
}

/// Whether the functor action of every injection between probes is injective.
/// Probes whose carrier cannot be materialized are skipped.
pub fn preserves_injections(s: &dyn Functor, probes: &[FinSet]) -> InjectionCheck {
    let mut checked = 0;
    for x in probes {
        let Ok(sx) = s.carrier(x) else { continue };
        for y in probes.iter().filter(|y| y.len() >= x.len()) {
            let Ok(maps) = all_maps(x, y, 1 << 16) else { continue };
            for m in maps.filter(FinMap::is_injective) {
                checked += 1;
                let ma = as_fn(&m);
                let mut seen: HashMap<Label, Label> = HashMap::new();
                for e in &sx {
                    let image = s.fmap(&ma, e);
                    if let Some(prev) = seen.insert(image, e.clone()) {
                        return InjectionCheck {
                            holds: false,
                            checked,
                            witness: Some((prev, e.clone())),
                        };
                    }
                }
            }
        }
    }
    InjectionCheck {
        holds: true,
        checked,
        witness: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConsistencyClass {
    /// The unit is injective.
    Consistent,
    /// Isomorphic to the terminal monad `X ↦ 1`.
    IsoTerminal,
    /// Isomorphic to the terminal monad's submonad with `∅ ↦ ∅`.
    IsoTerminalZero,
}

impl fmt::Display for ConsistencyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConsistencyClass::Consistent => "consistent",
            ConsistencyClass::IsoTerminal => "iso-terminal",
            ConsistencyClass::IsoTerminalZero => "iso-terminal-zero",
        })
    }
}

/// Consistent iff the unit is injective on every probe; an inconsistent
/// monad is told apart by the size of `S ∅`.
pub fn classify_consistency(s: &dyn Monad, probes: &[FinSet]) -> ConsistencyClass {
    let injective = probes.iter().all(|x| {
        let mut seen = std::collections::HashSet::new();
        x.iter().all(|a| seen.insert(s.unit(a)))
    });
    if injective {
        return ConsistencyClass::Consistent;
    }
    let at_empty = s
        .cardinality(0)
        .or_else(|| s.carrier(&FinSet::empty()).ok().map(|c| c.len() as u128));
    if at_empty == Some(0) {
        ConsistencyClass::IsoTerminalZero
    } else {
        ConsistencyClass::IsoTerminal
    }
}
