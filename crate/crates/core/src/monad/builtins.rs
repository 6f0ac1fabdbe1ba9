use std::sync::Arc;

use itertools::Itertools;
use rand::RngCore;

use super::{pick, too_big, ExceptionShape, Functor, FunctorRef, LeafSampler, Monad, MonadRef};
use crate::error::{Error, Result};
use crate::finset::{coproduct, FinSet, MATERIALIZE_LIMIT};
use crate::label::{Label, Node};

fn checked_limit(name: &str, size: Option<u128>) -> Result<()> {
    match size {
        Some(n) if n <= MATERIALIZE_LIMIT as u128 => Ok(()),
        other => Err(too_big(name, other)),
    }
}

/// `X ↦ X + E`, optionally modified to send `∅` to `∅`.
#[derive(Clone, Debug)]
pub struct Exception {
    name: String,
    constants: FinSet,
    preserves_empty: bool,
}

impl Exception {
    pub fn new(constants: FinSet) -> Self {
        Exception {
            name: format!("exception({})", constants.len()),
            constants,
            preserves_empty: false,
        }
    }

    /// The submonad agreeing with `X + E` on nonempty sets and empty at `∅`.
    pub fn preserving_empty(constants: FinSet) -> Self {
        Exception {
            name: format!("exception0({})", constants.len()),
            constants,
            preserves_empty: true,
        }
    }

    pub fn maybe() -> Self {
        Exception {
            name: "maybe".into(),
            constants: FinSet::from_labels([Label::atom("err")]),
            preserves_empty: false,
        }
    }

    /// Constants `e0, e1, ..`.
    pub fn constants(n: usize) -> FinSet {
        FinSet::from_labels((0..n).map(|i| Label::atom(format!("e{i}"))))
    }
}

impl Functor for Exception {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        if self.preserves_empty && x.is_empty() {
            return Ok(FinSet::empty());
        }
        checked_limit(&self.name, self.cardinality(x.len() as u128))?;
        Ok(coproduct(x, &self.constants).sum)
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        match s.node() {
            Node::Left(x) => Label::left(f(x)),
            _ => s.clone(),
        }
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        if self.preserves_empty && n == 0 {
            Some(0)
        } else {
            n.checked_add(self.constants.len() as u128)
        }
    }
}

impl Monad for Exception {
    fn unit(&self, x: &Label) -> Label {
        Label::left(x.clone())
    }

    fn mult(&self, ss: &Label) -> Label {
        match ss.node() {
            Node::Left(inner) => inner.clone(),
            _ => ss.clone(),
        }
    }

    fn unit_preimage(&self, s: &Label) -> Option<Label> {
        s.as_left().cloned()
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        let want_leaf = self.constants.is_empty() || rng.next_u32().is_multiple_of(2);
        if want_leaf {
            if let Some(x) = leaf(rng) {
                return Some(Label::left(x));
            }
            if self.preserves_empty {
                return None;
            }
        }
        pick(rng, &self.constants).map(Label::right)
    }

    fn from_empty(&self, s: &Label) -> Result<Option<Label>> {
        if self.preserves_empty {
            return Ok(None);
        }
        Ok(match s.node() {
            Node::Right(e) if self.constants.contains(e) => Some(s.clone()),
            _ => None,
        })
    }

    fn exception_shape(&self) -> Option<ExceptionShape> {
        Some(ExceptionShape {
            constants: self.constants.clone(),
            preserves_empty: self.preserves_empty,
        })
    }
}

/// The terminal monad `X ↦ 1`, or its submonad `1₀` with `∅ ↦ ∅`.
#[derive(Clone, Debug)]
pub struct Terminal {
    preserves_empty: bool,
}

impl Terminal {
    pub fn new() -> Self {
        Terminal { preserves_empty: false }
    }

    pub fn preserving_empty() -> Self {
        Terminal { preserves_empty: true }
    }

    pub fn point() -> Label {
        Label::atom("*")
    }
}

impl Default for Terminal {
    fn default() -> Self {
        Terminal::new()
    }
}

impl Functor for Terminal {
    fn name(&self) -> String {
        if self.preserves_empty { "terminal0" } else { "terminal" }.into()
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        if self.preserves_empty && x.is_empty() {
            Ok(FinSet::empty())
        } else {
            Ok(FinSet::from_labels([Terminal::point()]))
        }
    }

    fn fmap(&self, _f: &dyn Fn(&Label) -> Label, _s: &Label) -> Label {
        Terminal::point()
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        Some(if self.preserves_empty && n == 0 { 0 } else { 1 })
    }
}

impl Monad for Terminal {
    fn unit(&self, _x: &Label) -> Label {
        Terminal::point()
    }

    fn mult(&self, _ss: &Label) -> Label {
        Terminal::point()
    }

    fn unit_preimage(&self, _s: &Label) -> Option<Label> {
        None
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        if self.preserves_empty {
            leaf(rng).map(|_| Terminal::point())
        } else {
            Some(Terminal::point())
        }
    }
}

/// The powerset monad on finite sets.
#[derive(Clone, Debug, Default)]
pub struct Powerset;

impl Functor for Powerset {
    fn name(&self) -> String {
        "powerset".into()
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        checked_limit("powerset", self.cardinality(x.len() as u128))?;
        Ok(x.subsets().map(|s| Label::set(s.iter().cloned())).collect())
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        let elems = s.as_set().expect("powerset element is a set label");
        Label::set(elems.iter().map(f))
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        if n >= 127 {
            None
        } else {
            Some(1u128 << n)
        }
    }
}

impl Monad for Powerset {
    fn unit(&self, x: &Label) -> Label {
        Label::set([x.clone()])
    }

    fn mult(&self, ss: &Label) -> Label {
        let outer = ss.as_set().expect("powerset element is a set label");
        Label::set(
            outer
                .iter()
                .flat_map(|inner| inner.as_set().expect("nested set label").iter().cloned()),
        )
    }

    fn unit_preimage(&self, s: &Label) -> Option<Label> {
        match s.as_set() {
            Some([x]) => Some(x.clone()),
            _ => None,
        }
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        let k = rng.next_u32() % 4;
        let mut elems = Vec::new();
        for _ in 0..k {
            match leaf(rng) {
                Some(x) => elems.push(x),
                None => break,
            }
        }
        Some(Label::set(elems))
    }

    fn from_empty(&self, s: &Label) -> Result<Option<Label>> {
        Ok(match s.as_set() {
            Some([]) => Some(s.clone()),
            _ => None,
        })
    }
}

/// The reader monad `X ↦ X^E`; elements are tuples indexed by `E`'s order.
#[derive(Clone, Debug)]
pub struct Reader {
    env: usize,
}

impl Reader {
    pub fn new(env: usize) -> Self {
        Reader { env }
    }
}

impl Functor for Reader {
    fn name(&self) -> String {
        format!("reader({})", self.env)
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        checked_limit(&self.name(), self.cardinality(x.len() as u128))?;
        Ok((0..self.env)
            .map(|_| x.elements().to_vec())
            .multi_cartesian_product()
            .map(Label::tuple)
            .chain(if self.env == 0 {
                Some(Label::tuple(vec![]))
            } else {
                None
            })
            .collect())
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        Label::tuple(s.as_tuple().expect("reader element").iter().map(f).collect())
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        n.checked_pow(self.env as u32)
    }
}

impl Monad for Reader {
    fn unit(&self, x: &Label) -> Label {
        Label::tuple(vec![x.clone(); self.env])
    }

    fn mult(&self, ss: &Label) -> Label {
        let rows = ss.as_tuple().expect("reader element");
        Label::tuple(
            rows.iter()
                .enumerate()
                .map(|(i, row)| row.as_tuple().expect("nested reader element")[i].clone())
                .collect(),
        )
    }

    fn unit_preimage(&self, s: &Label) -> Option<Label> {
        let t = s.as_tuple()?;
        let first = t.first()?;
        t.iter().all(|x| x == first).then(|| first.clone())
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        let mut v = Vec::with_capacity(self.env);
        for _ in 0..self.env {
            v.push(leaf(rng)?);
        }
        Some(Label::tuple(v))
    }
}

/// The state monad `X ↦ (X × St)^St`; an element is a tuple indexed by the
/// initial state holding `(value, next state)` pairs.
#[derive(Clone, Debug)]
pub struct State {
    states: FinSet,
}

impl State {
    pub fn new(n: usize) -> Self {
        State {
            states: FinSet::from_labels((0..n).map(|i| Label::atom(format!("s{i}")))),
        }
    }

    fn pair(x: Label, st: Label) -> Label {
        Label::tuple(vec![x, st])
    }
}

impl Functor for State {
    fn name(&self) -> String {
        format!("state({})", self.states.len())
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        checked_limit(&self.name(), self.cardinality(x.len() as u128))?;
        let pairs: Vec<Label> = x
            .iter()
            .cartesian_product(self.states.iter())
            .map(|(a, s)| State::pair(a.clone(), s.clone()))
            .collect();
        let k = self.states.len();
        if k == 0 {
            return Ok(FinSet::from_labels([Label::tuple(vec![])]));
        }
        Ok((0..k)
            .map(|_| pairs.clone())
            .multi_cartesian_product()
            .map(Label::tuple)
            .collect())
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        Label::tuple(
            s.as_tuple()
                .expect("state element")
                .iter()
                .map(|p| {
                    let p = p.as_tuple().expect("state pair");
                    State::pair(f(&p[0]), p[1].clone())
                })
                .collect(),
        )
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        let k = self.states.len() as u128;
        n.checked_mul(k)?.checked_pow(k as u32)
    }
}

impl Monad for State {
    fn unit(&self, x: &Label) -> Label {
        Label::tuple(self.states.iter().map(|s| State::pair(x.clone(), s.clone())).collect())
    }

    fn mult(&self, ss: &Label) -> Label {
        let rows = ss.as_tuple().expect("state element");
        Label::tuple(
            rows.iter()
                .map(|p| {
                    let p = p.as_tuple().expect("state pair");
                    let next = self.states.index_of(&p[1]).expect("known state");
                    p[0].as_tuple().expect("nested state element")[next].clone()
                })
                .collect(),
        )
    }

    fn unit_preimage(&self, s: &Label) -> Option<Label> {
        let rows = s.as_tuple()?;
        let first = rows.first()?.as_tuple()?[0].clone();
        let ok = rows.iter().zip(self.states.iter()).all(|(p, st)| {
            let p = p.as_tuple().expect("state pair");
            p[0] == first && p[1] == *st
        });
        ok.then_some(first)
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        let mut v = Vec::with_capacity(self.states.len());
        for _ in 0..self.states.len() {
            let x = leaf(rng)?;
            let st = pick(rng, &self.states)?;
            v.push(State::pair(x, st));
        }
        Some(Label::tuple(v))
    }
}

/// The constant functor `C_M`, or `C⁰_M` which sends `∅` to `∅`.
#[derive(Clone, Debug)]
pub struct ConstantFunctor {
    value: FinSet,
    preserves_empty: bool,
}

impl ConstantFunctor {
    pub fn new(value: FinSet) -> Self {
        ConstantFunctor {
            value,
            preserves_empty: false,
        }
    }

    pub fn preserving_empty(value: FinSet) -> Self {
        ConstantFunctor {
            value,
            preserves_empty: true,
        }
    }
}

impl Functor for ConstantFunctor {
    fn name(&self) -> String {
        let base = if self.preserves_empty { "const0" } else { "const" };
        format!("{base}({})", self.value.len())
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        if self.preserves_empty && x.is_empty() {
            Ok(FinSet::empty())
        } else {
            Ok(self.value.clone())
        }
    }

    fn fmap(&self, _f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        s.clone()
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        Some(if self.preserves_empty && n == 0 {
            0
        } else {
            self.value.len() as u128
        })
    }
}

/// `P_A X = {M ⊆ X : |M| ∈ A or M = ∅}`, with `P_A f (M) = f[M]` when `f` is
/// injective on `M` and `∅` otherwise. A functor only.
#[derive(Clone, Debug)]
pub struct PowersetA {
    cardinals: Vec<usize>,
}

impl PowersetA {
    pub fn new(mut cardinals: Vec<usize>) -> Self {
        cardinals.sort_unstable();
        cardinals.dedup();
        PowersetA { cardinals }
    }

    fn admits(&self, k: usize) -> bool {
        k == 0 || self.cardinals.contains(&k)
    }
}

impl Functor for PowersetA {
    fn name(&self) -> String {
        format!("pA({})", self.cardinals.iter().join(","))
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        checked_limit(&self.name(), Powerset.cardinality(x.len() as u128))?;
        Ok(x.subsets()
            .filter(|s| self.admits(s.len()))
            .map(|s| Label::set(s.iter().cloned()))
            .collect())
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        let elems = s.as_set().expect("subset label");
        let image = Label::set(elems.iter().map(f));
        if image.as_set().map(<[Label]>::len) == Some(elems.len()) {
            image
        } else {
            Label::set([])
        }
    }
}

fn count_param(name: &str, params: &[usize], idx: usize) -> Result<usize> {
    params
        .get(idx)
        .copied()
        .ok_or_else(|| Error::BadSpecifier(format!("`{name}` needs a size parameter")))
}

/// Builds a named monad. Sizes in `params` become sets of that many
/// constants, environment values or states.
pub fn builtin(name: &str, params: &[usize]) -> Result<MonadRef> {
    let m: MonadRef = match name {
        "exception" => Arc::new(Exception::new(Exception::constants(count_param(name, params, 0)?))),
        "exception0" => Arc::new(Exception::preserving_empty(Exception::constants(count_param(
            name, params, 0,
        )?))),
        "maybe" => Arc::new(Exception::maybe()),
        "terminal" => Arc::new(Terminal::new()),
        "terminal0" => Arc::new(Terminal::preserving_empty()),
        "powerset" => Arc::new(Powerset),
        "reader" => Arc::new(Reader::new(count_param(name, params, 0)?)),
        "state" => Arc::new(State::new(count_param(name, params, 0)?)),
        other => return Err(Error::UnknownMonad(other.to_string())),
    };
    Ok(m)
}

fn split_spec(spec: &str) -> Result<(&str, Vec<usize>)> {
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (spec.trim(), None),
    };
    let params = match rest {
        None => Vec::new(),
        Some(r) => r
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::BadSpecifier(format!("`{p}` in `{spec}` is not a size")))
            })
            .collect::<Result<_>>()?,
    };
    Ok((name, params))
}

/// Parses `name` or `name:size`, e.g. `exception:2`, `reader:2`, `maybe`.
pub fn parse_monad(spec: &str) -> Result<MonadRef> {
    let (name, params) = split_spec(spec)?;
    builtin(name, &params)
}

/// Parses a functor specifier: any monad, or `const:n`, `const0:n`,
/// `pA:k1,k2,..`.
pub fn parse_functor(spec: &str) -> Result<FunctorRef> {
    let (name, params) = split_spec(spec)?;
    let constants = |n: usize| FinSet::from_labels((0..n).map(|i| Label::atom(format!("m{i}"))));
    Ok(match name {
        "const" => Arc::new(ConstantFunctor::new(constants(count_param(name, &params, 0)?))),
        "const0" => Arc::new(ConstantFunctor::preserving_empty(constants(count_param(
            name, &params, 0,
        )?))),
        "pA" => Arc::new(PowersetA::new(params)),
        _ => {
            let m = builtin(name, &params)?;
            Arc::new(AsFunctor(m))
        }
    })
}

/// Views a monad as its underlying functor.
struct AsFunctor(MonadRef);

impl Functor for AsFunctor {
    fn name(&self) -> String {
        self.0.name()
    }
    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        self.0.carrier(x)
    }
    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        self.0.fmap(f, s)
    }
    fn cardinality(&self, n: u128) -> Option<u128> {
        self.0.cardinality(n)
    }
}
