//! Coproducts of monads on finite sets.
//!
//! For summands `S_0, .., S_{n-1}` the value at `A` is
//! `S_0* A + .. + S_{n-1}* A + A`, where the `S_p* A` solve
//! `X_p = S̄_p(Σ_{q≠p} X_q + A)` as the limit of the initial chain. An
//! element is either a variable `inr(a)` or a layer `inl(ι_p(s))` with
//! `s ∈ S_p* A`, whose leaves are layers of the other summands or
//! variables. All operations are defined element by element through the
//! freeness recursion, so they work without materializing any carrier.

mod morphism;
mod oracle;
mod special;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::RngCore;

use crate::bialgebra::{Bialgebra, EMAlgebra};
use crate::chain::{run_chain, ChainOutcome, EquationSystem, Expr, SolutionPair};
use crate::error::{Error, Result};
use crate::finset::{FinMap, FinSet};
use crate::label::{Label, Node};
use crate::monad::{classify_consistency, default_probes, ConsistencyClass, Functor, LeafSampler, Monad, MonadRef};

pub use morphism::{injective_morphism_transfer, LabelMorphism, MonadMorphism};
pub use oracle::{canonical_compare, exception_oracle, BialgebraOracle, Comparison, ExceptionOracle};
pub use special::{special_case, SpecialCase};

/// Default number of chain steps.
pub const DEFAULT_BUDGET: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Carriers are computed by running the initial chain.
    Materialized { budget: usize },
    /// Only element-wise operations are available.
    Symbolic,
}

/// Tags `x` as the `k`-th of `m` summands of a left-nested sum.
pub(crate) fn inject(k: usize, m: usize, x: Label) -> Label {
    if m == 1 {
        x
    } else if k == m - 1 {
        Label::right(x)
    } else {
        Label::left(inject(k, m - 1, x))
    }
}

/// Inverse of [`inject`].
pub(crate) fn project(m: usize, l: &Label) -> (usize, Label) {
    if m == 1 {
        return (0, l.clone());
    }
    match l.node() {
        Node::Right(x) => (m - 1, x.clone()),
        Node::Left(y) => project(m - 1, y),
        _ => panic!("{l} is not tagged for a {m}-fold sum"),
    }
}

/// The left-nested sum of the given sorts.
fn sum_of_sorts(sorts: &[usize]) -> Expr {
    match sorts {
        [q] => Expr::sort(*q),
        [rest @ .., last] => Expr::sum(sum_of_sorts(rest), Expr::sort(*last)),
        [] => unreachable!("at least one other summand"),
    }
}

pub struct CoproductMonad {
    summands: Vec<MonadRef>,
    mode: Mode,
    solved: Mutex<HashMap<FinSet, Arc<SolutionPair>>>,
}

impl CoproductMonad {
    /// Fails with `InconsistentMonad` when a summand's unit is not
    /// injective; see [`special_case`] for those.
    pub fn new(summands: Vec<MonadRef>, mode: Mode) -> Result<Self> {
        if summands.len() < 2 {
            return Err(Error::Contract("a coproduct needs at least two summands".into()));
        }
        for s in &summands {
            if classify_consistency(s.as_ref(), &default_probes()) != ConsistencyClass::Consistent {
                return Err(Error::InconsistentMonad(s.name()));
            }
        }
        Ok(CoproductMonad {
            summands,
            mode,
            solved: Mutex::new(HashMap::new()),
        })
    }

    pub fn binary(s: MonadRef, t: MonadRef, mode: Mode) -> Result<Self> {
        CoproductMonad::new(vec![s, t], mode)
    }

    pub fn summands(&self) -> &[MonadRef] {
        &self.summands
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn n(&self) -> usize {
        self.summands.len()
    }

    /// The summands other than `p`, in order.
    fn others(&self, p: usize) -> Vec<usize> {
        (0..self.n()).filter(|&q| q != p).collect()
    }

    /// The system `X_p = S̄_p(Σ_{q≠p} X_q + A)`.
    pub fn system(&self, a: &FinSet) -> Result<EquationSystem> {
        let names = self.summands.iter().map(|s| format!("{}*", s.name())).collect();
        let rhs = (0..self.n())
            .map(|p| {
                let inner = Expr::sum(sum_of_sorts(&self.others(p)), Expr::constant(a.clone()));
                Expr::bar(self.summands[p].clone(), inner)
            })
            .collect();
        EquationSystem::new(names, rhs)
    }

    /// Runs (or recalls) the initial chain at `A`.
    pub fn solve(&self, a: &FinSet) -> Result<Arc<SolutionPair>> {
        let budget = match self.mode {
            Mode::Materialized { budget } => budget,
            Mode::Symbolic => {
                return Err(Error::BudgetExceeded(format!(
                    "{} is symbolic; carriers are not materialized",
                    self.name()
                )))
            }
        };
        if let Some(s) = self.solved.lock().expect("cache lock").get(a) {
            return Ok(s.clone());
        }
        let sol = match run_chain(&self.system(a)?, budget)? {
            ChainOutcome::Converged(sol) => sol,
            ChainOutcome::Diverged(trace) => return Err(Error::NoConvergence(Box::new(trace))),
        };
        for (p, s) in sol.structure.iter().enumerate() {
            if !s.is_label_identity() {
                return Err(Error::NonCanonicalLabels(format!("sort {} of {}", p, self.name())));
            }
        }
        let sol = Arc::new(sol);
        self.solved.lock().expect("cache lock").insert(a.clone(), sol.clone());
        Ok(sol)
    }

    /// `inl(ι_p(s))`.
    pub fn layer(&self, p: usize, s: Label) -> Label {
        Label::left(inject(p, self.n(), s))
    }

    /// Splits an element into its summand and layer, or `None` for a
    /// variable.
    pub fn split(&self, z: &Label) -> Option<(usize, Label)> {
        match z.node() {
            Node::Left(t) => Some(project(self.n(), t)),
            Node::Right(_) => None,
            _ => panic!("{z} is not an element of {}", self.name()),
        }
    }

    /// A leaf of an `S_p`-layer (an element of `Σ_{q≠p} X_q + A`) as an
    /// element of the coproduct.
    pub fn leaf_to_element(&self, p: usize, leaf: &Label) -> Label {
        match leaf.node() {
            Node::Right(a) => Label::right(a.clone()),
            Node::Left(o) => {
                let others = self.others(p);
                let (k, x) = project(others.len(), o);
                self.layer(others[k], x)
            }
            _ => panic!("{leaf} is not a leaf of a layer"),
        }
    }

    /// The coproduct element as an element of `S_p(Σ_{q≠p} X_q + A)`.
    pub fn to_side(&self, p: usize, z: &Label) -> Label {
        let s = &self.summands[p];
        match self.split(z) {
            None => s.unit(&Label::right(z.as_right().expect("variable").clone())),
            Some((q, x)) if q == p => x,
            Some((q, x)) => {
                let others = self.others(p);
                let k = others.iter().position(|&o| o == q).expect("another summand");
                s.unit(&Label::left(inject(k, others.len(), x)))
            }
        }
    }

    /// Inverse of [`Self::to_side`].
    pub fn from_side(&self, p: usize, u: &Label) -> Label {
        match self.summands[p].unit_preimage(u) {
            Some(leaf) => self.leaf_to_element(p, &leaf),
            None => self.layer(p, u.clone()),
        }
    }

    /// The `S_p`-algebra structure: the free `S_p`-algebra on
    /// `Σ_{q≠p} X_q + A` transported to the coproduct.
    pub fn structure(&self, p: usize, w: &Label) -> Label {
        let s = &self.summands[p];
        let inner = s.fmap(&|z: &Label| self.to_side(p, z), w);
        self.from_side(p, &s.mult(&inner))
    }

    /// The unique multialgebra morphism out of the free one extending `h`,
    /// into the multialgebra given by `alg(p, w)` on `S_p`-elements.
    pub fn fold(&self, z: &Label, h: &dyn Fn(&Label) -> Label, alg: &dyn Fn(usize, &Label) -> Label) -> Label {
        match self.split(z) {
            None => h(z.as_right().expect("variable")),
            Some((p, s)) => {
                let mapped =
                    self.summands[p].fmap(&|leaf: &Label| self.fold(&self.leaf_to_element(p, leaf), h, alg), &s);
                alg(p, &mapped)
            }
        }
    }

    /// The embedding `S_p A -> (⊕ S) A`.
    pub fn embed(&self, p: usize, u: &Label) -> Label {
        let s = &self.summands[p];
        match s.unit_preimage(u) {
            Some(a) => Label::right(a),
            None => self.layer(p, s.fmap(&|a: &Label| Label::right(a.clone()), u)),
        }
    }

    /// The embedding of summand `p` at `A` as a map.
    pub fn embedding(&self, p: usize, a: &FinSet) -> Result<FinMap> {
        FinMap::from_fn(self.summands[p].carrier(a)?, self.carrier(a)?, |u| self.embed(p, u))
    }

    /// The free multialgebra on `A` with its generators.
    pub fn free_multialgebra(&self, a: &FinSet) -> Result<(Bialgebra, FinMap)> {
        let carrier = self.carrier(a)?;
        let components = (0..self.n())
            .map(|p| {
                let s = self.summands[p].clone();
                let dom = s.carrier(&carrier)?;
                let table = FinMap::from_fn(dom, carrier.clone(), |w| self.structure(p, w))?;
                EMAlgebra::new(s, carrier.clone(), table)
            })
            .collect::<Result<Vec<_>>>()?;
        let unit = FinMap::from_fn(a.clone(), carrier.clone(), |x| self.unit(x))?;
        Ok((Bialgebra::new(components)?, unit))
    }

    /// The morphism from the free multialgebra on `A` into `target`
    /// extending `h`.
    pub fn extend(&self, a: &FinSet, target: &Bialgebra, h: &FinMap) -> Result<FinMap> {
        let ha = |x: &Label| h.apply(x).cloned().expect("generator");
        let alg = |p: usize, w: &Label| target.component(p).apply(w);
        FinMap::from_fn(self.carrier(a)?, target.carrier().clone(), |z| self.fold(z, &ha, &alg))
    }

    fn sample_depth(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>, depth: usize) -> Option<Label> {
        if depth == 0 || rng.next_u32().is_multiple_of(3) {
            if let Some(a) = leaf(rng) {
                return Some(Label::right(a));
            }
        }
        let p = (rng.next_u32() as usize) % self.n();
        let w = if depth == 0 {
            self.summands[p].sample(rng, &mut |_: &mut dyn RngCore| None)?
        } else {
            let mut inner = |r: &mut dyn RngCore| self.sample_depth(r, leaf, depth - 1);
            self.summands[p].sample(rng, &mut inner)?
        };
        Some(self.structure(p, &w))
    }
}

const SAMPLE_DEPTH: usize = 3;

impl Functor for CoproductMonad {
    fn name(&self) -> String {
        let names: Vec<String> = self.summands.iter().map(|s| s.name()).collect();
        names.join(" + ")
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        let sol = self.solve(x)?;
        let layers = sol
            .carriers
            .iter()
            .enumerate()
            .flat_map(|(p, c)| c.iter().map(move |s| self.layer(p, s.clone())));
        Ok(layers.chain(x.iter().map(|a| Label::right(a.clone()))).collect())
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        self.fold(s, &|a| Label::right(f(a)), &|p, w| self.structure(p, w))
    }

    fn finite_valued(&self) -> bool {
        self.summands.iter().all(|s| s.finite_valued())
    }
}

impl Monad for CoproductMonad {
    fn unit(&self, x: &Label) -> Label {
        Label::right(x.clone())
    }

    fn mult(&self, ss: &Label) -> Label {
        self.fold(ss, &|z| z.clone(), &|p, w| self.structure(p, w))
    }

    fn unit_preimage(&self, s: &Label) -> Option<Label> {
        s.as_right().cloned()
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        self.sample_depth(rng, leaf, SAMPLE_DEPTH)
    }

    fn from_empty(&self, s: &Label) -> Result<Option<Label>> {
        // an element comes from ∅ exactly when it has no variables
        fn closed(m: &CoproductMonad, z: &Label) -> bool {
            match m.split(z) {
                None => false,
                Some((p, s)) => {
                    let ok = std::cell::Cell::new(true);
                    m.summands[p].fmap(
                        &|leaf: &Label| {
                            if !closed(m, &m.leaf_to_element(p, leaf)) {
                                ok.set(false);
                            }
                            leaf.clone()
                        },
                        &s,
                    );
                    ok.get()
                }
            }
        }
        Ok(closed(self, s).then(|| s.clone()))
    }
}

/// What [`build`] produced.
#[derive(Clone)]
pub struct Built {
    pub monad: MonadRef,
    pub carrier: FinSet,
    /// `Some(stage)` when the carrier came from a converged chain.
    pub converged_at: Option<usize>,
    /// Set when a special-case rule replaced the construction.
    pub special: Option<SpecialCase>,
}

/// The coproduct of `s` and `t` at `A`: inconsistent summands go through
/// the special-case rules; otherwise the chain is run.
pub fn build(s: MonadRef, t: MonadRef, a: &FinSet, budget: usize) -> Result<Built> {
    build_family(vec![s, t], a, budget)
}

/// [`build`] for a family of at least two monads.
pub fn build_family(summands: Vec<MonadRef>, a: &FinSet, budget: usize) -> Result<Built> {
    if let Some((case, monad)) = special::for_inconsistent(&summands)? {
        let carrier = monad.carrier(a)?;
        return Ok(Built {
            monad,
            carrier,
            converged_at: None,
            special: Some(case),
        });
    }
    let cop = Arc::new(CoproductMonad::new(summands, Mode::Materialized { budget })?);
    let converged_at = cop.solve(a)?.converged_at;
    let carrier = cop.carrier(a)?;
    Ok(Built {
        monad: cop,
        carrier,
        converged_at: Some(converged_at),
        special: None,
    })
}
