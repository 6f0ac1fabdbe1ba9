//! Initial chains of equation systems over injections.
//!
//! A system assigns to each sort a right-hand side built from sort
//! variables, fixed sets, binary sums and unit complements `S̄(-)`. The
//! chain starts at the empty sets and applies the right-hand sides until
//! every connecting injection is a bijection.

use std::fmt;

use serde::Serialize;

use crate::complement::{complement_cardinality, complement_carrier};
use crate::error::{Error, Result};
use crate::finset::{coproduct, FinMap, FinSet};
use crate::label::{Label, Node};
use crate::monad::{classify_consistency, default_probes, ConsistencyClass, MonadRef};

#[derive(Clone)]
pub enum Expr {
    Sort(usize),
    Const(FinSet),
    Sum(Box<Expr>, Box<Expr>),
    /// The unit complement of a monad applied to an expression.
    Bar(MonadRef, Box<Expr>),
}

impl Expr {
    pub fn sort(i: usize) -> Self {
        Expr::Sort(i)
    }

    pub fn constant(set: FinSet) -> Self {
        Expr::Const(set)
    }

    pub fn sum(a: Expr, b: Expr) -> Self {
        Expr::Sum(Box::new(a), Box::new(b))
    }

    pub fn bar(m: MonadRef, e: Expr) -> Self {
        Expr::Bar(m, Box::new(e))
    }

    fn max_sort(&self) -> Option<usize> {
        match self {
            Expr::Sort(i) => Some(*i),
            Expr::Const(_) => None,
            Expr::Sum(a, b) => a.max_sort().max(b.max_sort()),
            Expr::Bar(_, e) => e.max_sort(),
        }
    }

    fn monads<'a>(&'a self, out: &mut Vec<&'a MonadRef>) {
        match self {
            Expr::Sort(_) | Expr::Const(_) => {}
            Expr::Sum(a, b) => {
                a.monads(out);
                b.monads(out);
            }
            Expr::Bar(m, e) => {
                out.push(m);
                e.monads(out);
            }
        }
    }

    /// The expression at a tuple of sets.
    pub fn eval(&self, sets: &[FinSet]) -> Result<FinSet> {
        match self {
            Expr::Sort(i) => Ok(sets[*i].clone()),
            Expr::Const(c) => Ok(c.clone()),
            Expr::Sum(a, b) => Ok(coproduct(&a.eval(sets)?, &b.eval(sets)?).sum),
            Expr::Bar(m, e) => complement_carrier(m.as_ref(), &e.eval(sets)?),
        }
    }

    /// The expression's size from the sort sizes, when computable.
    pub fn size(&self, sizes: &[u128]) -> Option<u128> {
        match self {
            Expr::Sort(i) => Some(sizes[*i]),
            Expr::Const(c) => Some(c.len() as u128),
            Expr::Sum(a, b) => a.size(sizes)?.checked_add(b.size(sizes)?),
            Expr::Bar(m, e) => complement_cardinality(m.as_ref(), e.size(sizes)?),
        }
    }

    /// The induced map on one element, given per-sort maps.
    pub fn map_elem(&self, maps: &dyn Fn(usize, &Label) -> Label, x: &Label) -> Label {
        match (self, x.node()) {
            (Expr::Sort(i), _) => maps(*i, x),
            (Expr::Const(_), _) => x.clone(),
            (Expr::Sum(a, _), Node::Left(l)) => Label::left(a.map_elem(maps, l)),
            (Expr::Sum(_, b), Node::Right(r)) => Label::right(b.map_elem(maps, r)),
            (Expr::Sum(..), _) => panic!("{x} is not an element of a sum"),
            (Expr::Bar(m, e), _) => m.fmap(&|l: &Label| e.map_elem(maps, l), x),
        }
    }

    /// The same expression with every `S̄` replaced by `S`, evaluated.
    pub fn eval_unbarred(&self, sets: &[FinSet]) -> Result<FinSet> {
        match self {
            Expr::Sort(i) => Ok(sets[*i].clone()),
            Expr::Const(c) => Ok(c.clone()),
            Expr::Sum(a, b) => Ok(coproduct(&a.eval_unbarred(sets)?, &b.eval_unbarred(sets)?).sum),
            Expr::Bar(m, e) => m.carrier(&e.eval_unbarred(sets)?),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Sort(i) => write!(f, "X{i}"),
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Sum(a, b) => write!(f, "({a} + {b})"),
            Expr::Bar(m, e) => write!(f, "bar[{}]({e})", m.name()),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Debug)]
pub struct EquationSystem {
    names: Vec<String>,
    rhs: Vec<Expr>,
}

impl EquationSystem {
    /// Checks that every sort variable is in range and every complemented
    /// monad is consistent.
    pub fn new(names: Vec<String>, rhs: Vec<Expr>) -> Result<Self> {
        if names.len() != rhs.len() {
            return Err(Error::Contract("one right-hand side per sort".into()));
        }
        for e in &rhs {
            if e.max_sort().is_some_and(|i| i >= rhs.len()) {
                return Err(Error::Contract(format!("{e} mentions an unknown sort")));
            }
            let mut ms = Vec::new();
            e.monads(&mut ms);
            for m in ms {
                if classify_consistency(m.as_ref(), &default_probes()) != ConsistencyClass::Consistent {
                    return Err(Error::InconsistentMonad(m.name()));
                }
            }
        }
        Ok(EquationSystem { names, rhs })
    }

    pub fn sorts(&self) -> usize {
        self.rhs.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rhs(&self, sort: usize) -> &Expr {
        &self.rhs[sort]
    }
}

/// A materialized stage of the initial chain.
#[derive(Clone, Debug)]
pub struct Chain {
    /// `stages[i][sort]` is `H^i 0` at that sort.
    pub stages: Vec<Vec<FinSet>>,
    /// `connectors[i][sort]` is `h_{i,i+1}`.
    pub connectors: Vec<Vec<FinMap>>,
}

#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub carriers: Vec<FinSet>,
    /// Per sort, the bijection from the right-hand side at the carriers onto
    /// the carrier (inverse of the last connector).
    pub structure: Vec<FinMap>,
    pub converged_at: usize,
    pub chain: Chain,
}

/// Size of one sort at one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StageSize {
    /// The stage was built element by element.
    Materialized(usize),
    /// Counted from cardinality formulas only.
    Counted(u128),
    /// Too large for 128 bits.
    Overflow,
    /// No cardinality formula is known.
    Unknown,
}

impl StageSize {
    pub fn value(&self) -> Option<u128> {
        match self {
            StageSize::Materialized(n) => Some(*n as u128),
            StageSize::Counted(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for StageSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StageSize::Materialized(n) => write!(f, "{n}"),
            StageSize::Counted(n) => write!(f, "{n}*"),
            StageSize::Overflow => f.write_str(">2^128"),
            StageSize::Unknown => f.write_str("?"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DivergenceReason {
    /// Every stage up to the budget was built without convergence.
    StageBudget,
    /// Stages grew beyond what can be materialized.
    SizeLimit,
}

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceTrace {
    pub sorts: Vec<String>,
    /// `sizes[i][sort]`.
    pub sizes: Vec<Vec<StageSize>>,
    pub reason: DivergenceReason,
}

impl DivergenceTrace {
    /// Whether each sort's size strictly increases across the stages whose
    /// sizes are known.
    pub fn strictly_increasing(&self) -> bool {
        (0..self.sorts.len()).all(|s| {
            let known: Vec<u128> = self.sizes.iter().filter_map(|st| st[s].value()).collect();
            known.windows(2).all(|w| w[0] < w[1])
        })
    }
}

impl fmt::Display for DivergenceTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reason = match self.reason {
            DivergenceReason::StageBudget => "stage budget exhausted",
            DivergenceReason::SizeLimit => "stages too large to materialize",
        };
        writeln!(f, "no convergence ({reason}); sizes per stage (* = counted only):")?;
        for (i, st) in self.sizes.iter().enumerate() {
            let row: Vec<String> = self.sorts.iter().zip(st).map(|(n, s)| format!("{n}={s}")).collect();
            writeln!(f, "  stage {i}: {}", row.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum ChainOutcome {
    Converged(SolutionPair),
    Diverged(DivergenceTrace),
}

impl ChainOutcome {
    pub fn solution(self) -> Result<SolutionPair> {
        match self {
            ChainOutcome::Converged(s) => Ok(s),
            ChainOutcome::Diverged(t) => Err(Error::NoConvergence(Box::new(t))),
        }
    }
}

/// The connector `H h : H X -> H Y` induced by per-sort injections.
fn induced(sys: &EquationSystem, prev: &[FinMap], cur: &[FinSet], next: &[FinSet]) -> Result<Vec<FinMap>> {
    let maps = |i: usize, l: &Label| -> Label { prev[i].apply(l).cloned().expect("element of the previous stage") };
    (0..sys.sorts())
        .map(|s| {
            let dom = cur[s].clone();
            let table: Vec<Label> = dom.iter().map(|x| sys.rhs(s).map_elem(&maps, x)).collect();
            let m = FinMap::new(dom, next[s].clone(), table).map_err(|_| {
                Error::SubfunctorViolation(format!("induced map for {} leaves the complement", sys.names()[s]))
            })?;
            if let Some(w) = m.collision() {
                return Err(Error::SubfunctorViolation(format!(
                    "induced map for {} identifies {w}",
                    sys.names()[s]
                )));
            }
            Ok(m)
        })
        .collect()
}

fn eval_stage(sys: &EquationSystem, prev: &[FinSet]) -> Result<Vec<FinSet>> {
    (0..sys.sorts()).map(|s| sys.rhs(s).eval(prev)).collect()
}

fn materialized(stage: &[FinSet]) -> Vec<StageSize> {
    stage.iter().map(|c| StageSize::Materialized(c.len())).collect()
}

/// Runs the initial chain for at most `budget` steps.
///
/// Converges at stage `i` when every connector `h_{i,i+1}` is a bijection.
/// Stages that cannot be materialized are continued by counting alone so
/// the divergence trace shows the growth.
pub fn run_chain(sys: &EquationSystem, budget: usize) -> Result<ChainOutcome> {
    if budget == 0 {
        return Err(Error::Contract("chain budget must be at least 1".into()));
    }
    let n = sys.sorts();
    let mut stages: Vec<Vec<FinSet>> = vec![vec![FinSet::empty(); n]];
    let mut connectors: Vec<Vec<FinMap>> = Vec::new();
    let mut sizes: Vec<Vec<StageSize>> = vec![materialized(&stages[0])];

    for i in 0..budget {
        let next = match eval_stage(sys, &stages[i]) {
            Ok(next) => next,
            Err(Error::BudgetExceeded(_)) => {
                count_onwards(sys, &mut sizes, budget);
                return Ok(ChainOutcome::Diverged(DivergenceTrace {
                    sorts: sys.names().to_vec(),
                    sizes,
                    reason: DivergenceReason::SizeLimit,
                }));
            }
            Err(e) => return Err(e),
        };
        let conn = if i == 0 {
            next.iter().map(FinMap::from_empty).collect()
        } else {
            induced(sys, &connectors[i - 1], &stages[i], &next)?
        };
        sizes.push(materialized(&next));
        let done = conn.iter().all(FinMap::is_bijective);
        stages.push(next);
        connectors.push(conn);
        if done {
            let structure = connectors[i].iter().map(FinMap::inverse).collect::<Result<Vec<_>>>()?;
            return Ok(ChainOutcome::Converged(SolutionPair {
                carriers: stages[i].clone(),
                structure,
                converged_at: i,
                chain: Chain { stages, connectors },
            }));
        }
    }
    Ok(ChainOutcome::Diverged(DivergenceTrace {
        sorts: sys.names().to_vec(),
        sizes,
        reason: DivergenceReason::StageBudget,
    }))
}

fn count_onwards(sys: &EquationSystem, sizes: &mut Vec<Vec<StageSize>>, budget: usize) {
    while sizes.len() <= budget {
        let last = sizes.last().expect("stage 0 exists");
        let known: Option<Vec<u128>> = last.iter().map(StageSize::value).collect();
        let Some(known) = known else { break };
        let row: Vec<StageSize> = (0..sys.sorts())
            .map(|s| match sys.rhs(s).size(&known) {
                Some(v) => StageSize::Counted(v),
                None if has_formulas(sys.rhs(s)) => StageSize::Overflow,
                None => StageSize::Unknown,
            })
            .collect();
        let stop = row.iter().all(|s| s.value().is_none());
        sizes.push(row);
        if stop {
            break;
        }
    }
}

fn has_formulas(e: &Expr) -> bool {
    match e {
        Expr::Sort(_) | Expr::Const(_) => true,
        Expr::Sum(a, b) => has_formulas(a) && has_formulas(b),
        Expr::Bar(m, e) => m.cardinality(0).is_some() && has_formulas(e),
    }
}

/// An algebra for the un-complemented right-hand sides: per sort a carrier
/// and a structure map from the right-hand side (with `S̄` read as `S`).
pub trait GAlgebra {
    fn carrier(&self, sort: usize) -> &FinSet;
    fn phi(&self, sort: usize, g: &Label) -> Label;
}

/// A [`GAlgebra`] given by tables.
pub struct TableAlgebra {
    pub carriers: Vec<FinSet>,
    pub phi: Vec<FinMap>,
}

impl GAlgebra for TableAlgebra {
    fn carrier(&self, sort: usize) -> &FinSet {
        &self.carriers[sort]
    }

    fn phi(&self, sort: usize, g: &Label) -> Label {
        self.phi[sort]
            .apply(g)
            .cloned()
            .unwrap_or_else(|| panic!("{g} outside the structure map's domain"))
    }
}

/// `c_{i+1}(x) = φ(G(c_i)(x))` for `x` in stage `i+1`.
fn next_cocone(sys: &EquationSystem, stage: &[FinSet], prev: &[FinMap], target: &dyn GAlgebra) -> Result<Vec<FinMap>> {
    let maps = |i: usize, l: &Label| -> Label { prev[i].apply(l).cloned().expect("element of the stage") };
    (0..sys.sorts())
        .map(|s| {
            let table = stage[s]
                .iter()
                .map(|x| target.phi(s, &sys.rhs(s).map_elem(&maps, x)))
                .collect();
            FinMap::new(stage[s].clone(), target.carrier(s).clone(), table)
        })
        .collect()
}

/// The canonical cocone from the chain into a G-algebra, one family of maps
/// per stage.
pub fn canonical_cocone(sys: &EquationSystem, chain: &Chain, target: &dyn GAlgebra) -> Result<Vec<Vec<FinMap>>> {
    let mut out: Vec<Vec<FinMap>> = vec![(0..sys.sorts())
        .map(|s| FinMap::from_empty(target.carrier(s)))
        .collect()];
    for stage in &chain.stages[1..] {
        let next = next_cocone(sys, stage, out.last().expect("nonempty"), target)?;
        out.push(next);
    }
    Ok(out)
}

/// Whether `c_{i+1} ∘ h_{i,i+1} = c_i` for every stage and sort.
pub fn cocone_commutes(chain: &Chain, cocone: &[Vec<FinMap>]) -> bool {
    chain.connectors.iter().enumerate().all(|(i, hs)| {
        hs.iter()
            .enumerate()
            .all(|(s, h)| h.then(&cocone[i + 1][s]).map(|m| m == cocone[i][s]).unwrap_or(false))
    })
}

/// The unique map from a converged solution into a G-algebra compatible
/// with both structures.
pub fn recurse(sys: &EquationSystem, solution: &SolutionPair, target: &dyn GAlgebra) -> Result<Vec<FinMap>> {
    let cocone = canonical_cocone(sys, &solution.chain, target)?;
    Ok(cocone[solution.converged_at].clone())
}

/// Whether `f ∘ structure = φ ∘ G(f)` on every element of the right-hand
/// side at the solution.
pub fn is_morphism(sys: &EquationSystem, solution: &SolutionPair, target: &dyn GAlgebra, f: &[FinMap]) -> bool {
    let maps = |i: usize, l: &Label| -> Label { f[i].apply(l).cloned().expect("carrier element") };
    (0..sys.sorts()).all(|s| {
        solution.structure[s]
            .pairs()
            .all(|(y, x)| f[s].apply(x) == Some(&target.phi(s, &sys.rhs(s).map_elem(&maps, y))))
    })
}

/// One row of [`even_stage_comparison`].
#[derive(Clone, Debug, Serialize)]
pub struct EvenStage {
    pub stage: usize,
    /// Sort `X` of the two-sorted chain at stage `2k`.
    pub two_sorted: StageSize,
    /// The composite chain at stage `k`.
    pub composite: StageSize,
    /// Whether the two stages are the same set, when both are materialized.
    pub bijective: Option<bool>,
}

fn stage_rows(outcome: &ChainOutcome, sort: usize) -> (Vec<StageSize>, Option<&Chain>) {
    match outcome {
        ChainOutcome::Converged(sol) => (
            sol.chain
                .stages
                .iter()
                .map(|st| StageSize::Materialized(st[sort].len()))
                .collect(),
            Some(&sol.chain),
        ),
        ChainOutcome::Diverged(t) => (t.sizes.iter().map(|st| st[sort]).collect(), None),
    }
}

/// Runs `X = S̄(Y + A), Y = T̄(X + A)` and `Z = S̄(T̄(Z + A) + A)` and
/// compares stage `2k` of `X` with stage `k` of `Z`. Without `A` the sums
/// are dropped.
pub fn even_stage_comparison(s: MonadRef, t: MonadRef, a: Option<&FinSet>, budget: usize) -> Result<Vec<EvenStage>> {
    let plus = |e: Expr| match a {
        Some(a) => Expr::sum(e, Expr::constant(a.clone())),
        None => e,
    };
    let two = EquationSystem::new(
        vec!["X".into(), "Y".into()],
        vec![
            Expr::bar(s.clone(), plus(Expr::sort(1))),
            Expr::bar(t.clone(), plus(Expr::sort(0))),
        ],
    )?;
    let one = EquationSystem::new(
        vec!["Z".into()],
        vec![Expr::bar(s, plus(Expr::bar(t, plus(Expr::sort(0)))))],
    )?;
    let two_out = run_chain(&two, 2 * budget)?;
    let one_out = run_chain(&one, budget)?;
    let (two_sizes, two_chain) = stage_rows(&two_out, 0);
    let (one_sizes, one_chain) = stage_rows(&one_out, 0);
    let rows = (0..one_sizes.len())
        .take_while(|k| 2 * k < two_sizes.len())
        .map(|k| {
            let bijective = match (two_chain, one_chain) {
                (Some(x), Some(z)) => {
                    let (xs, zs) = (&x.stages[2 * k][0], &z.stages[k][0]);
                    // on labels the identity is the only candidate
                    Some(FinMap::new(xs.clone(), zs.clone(), xs.elements().to_vec()).is_ok_and(|m| m.is_bijective()))
                }
                _ => None,
            };
            EvenStage {
                stage: k,
                two_sorted: two_sizes[2 * k],
                composite: one_sizes[k],
                bijective,
            }
        })
        .collect();
    Ok(rows)
}
