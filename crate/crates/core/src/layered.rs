//! Canonical layered terms for coproducts of monads.
//!
//! An element of `(S_0 ⊕ .. ⊕ S_{n-1}) A` is a variable or a layer: an
//! operation `op ∈ S̄_p(k)` over the index set `{0, .., k-1}` with `k`
//! children. Layers alternate between summands, children are distinct and
//! sorted, and `op` uses every index. This works for summands whose values
//! are infinite, where the materialized carriers are unavailable.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complement::{minimal_support, restrict_to_support, supported_by};
use crate::coproduct::CoproductMonad;
use crate::error::{Error, Result};
use crate::finset::{FinSet, MATERIALIZE_LIMIT};
use crate::label::{Label, Node};
use crate::monad::{sample_level, Functor, Monad, MonadRef};
use crate::trnkova::closure_at_empty;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LayeredTerm {
    Var(Label),
    Layer {
        side: usize,
        op: Label,
        children: Vec<LayeredTerm>,
    },
}

impl Ord for LayeredTerm {
    /// Variables first, then by side, arity, operation and children.
    fn cmp(&self, other: &Self) -> Ordering {
        use LayeredTerm::*;
        match (self, other) {
            (Var(a), Var(b)) => a.cmp(b),
            (Var(_), Layer { .. }) => Ordering::Less,
            (Layer { .. }, Var(_)) => Ordering::Greater,
            (
                Layer {
                    side: s,
                    op: o,
                    children: c,
                },
                Layer {
                    side: t,
                    op: p,
                    children: d,
                },
            ) => s
                .cmp(t)
                .then(c.len().cmp(&d.len()))
                .then_with(|| o.cmp(p))
                .then_with(|| c.cmp(d)),
        }
    }
}

impl PartialOrd for LayeredTerm {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl LayeredTerm {
    pub fn var(a: Label) -> Self {
        LayeredTerm::Var(a)
    }

    pub fn side(&self) -> Option<usize> {
        match self {
            LayeredTerm::Var(_) => None,
            LayeredTerm::Layer { side, .. } => Some(*side),
        }
    }

    /// Number of nested layers.
    pub fn depth(&self) -> usize {
        match self {
            LayeredTerm::Var(_) => 0,
            LayeredTerm::Layer { children, .. } => 1 + children.iter().map(Self::depth).max().unwrap_or(0),
        }
    }

    /// Encodes the term as a label, so terms can serve as variables.
    pub fn to_label(&self) -> Label {
        match self {
            LayeredTerm::Var(a) => Label::var(a.clone()),
            LayeredTerm::Layer { side, op, children } => {
                let mut args = vec![op.clone()];
                args.extend(children.iter().map(Self::to_label));
                Label::op(format!("layer{side}"), args)
            }
        }
    }

    pub fn from_label(l: &Label) -> Result<Self> {
        match l.node() {
            Node::Var(a) => Ok(LayeredTerm::Var(a.clone())),
            Node::Op(name, args) if !args.is_empty() => {
                let side = name
                    .strip_prefix("layer")
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::NotAnElement(l.clone()))?;
                Ok(LayeredTerm::Layer {
                    side,
                    op: args[0].clone(),
                    children: args[1..].iter().map(Self::from_label).collect::<Result<_>>()?,
                })
            }
            _ => Err(Error::NotAnElement(l.clone())),
        }
    }

    fn map_vars(&self, f: &dyn Fn(&Label) -> Result<LayeredTerm>) -> Result<LayeredTerm> {
        match self {
            LayeredTerm::Var(a) => f(a),
            LayeredTerm::Layer { side, op, children } => Ok(LayeredTerm::Layer {
                side: *side,
                op: op.clone(),
                children: children.iter().map(|c| c.map_vars(f)).collect::<Result<_>>()?,
            }),
        }
    }
}

impl fmt::Display for LayeredTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayeredTerm::Var(a) => write!(f, "{a}"),
            LayeredTerm::Layer { side, op, children } => {
                write!(f, "S{side}[{op}]")?;
                if !children.is_empty() {
                    f.write_str("(")?;
                    for (i, c) in children.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{c}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

fn index(l: &Label) -> usize {
    l.as_nat().expect("index label") as usize
}

/// Default cap on layer depth for [`Layered::subst`].
pub const DEFAULT_MAX_DEPTH: usize = 64;

/// Term operations for a fixed family of summands.
pub struct Layered {
    summands: Vec<MonadRef>,
    max_depth: usize,
    ops: Mutex<HashMap<(usize, usize, usize), Vec<Label>>>,
    /// Per summand, the constants that exist over every nonempty set but
    /// not over `∅`. They have no least support, so they are layers with
    /// no children, allowed wherever some child could stand.
    nullary: Vec<FinSet>,
}

impl Layered {
    pub fn new(summands: Vec<MonadRef>) -> Result<Self> {
        if summands.len() < 2 {
            return Err(Error::Contract("layered terms need at least two summands".into()));
        }
        let nullary = summands.iter().map(|s| extra_constants(s.as_ref())).collect();
        Ok(Layered {
            summands,
            max_depth: DEFAULT_MAX_DEPTH,
            ops: Mutex::new(HashMap::new()),
            nullary,
        })
    }

    pub fn with_max_depth(mut self, max_depth: usize) -> Self {
        self.max_depth = max_depth;
        self
    }

    pub fn summands(&self) -> &[MonadRef] {
        &self.summands
    }

    /// Height of a term: layers of ordinary monads count one, term
    /// monads count their own height.
    /// Layers without children count one here; their chain stage depends
    /// on what else exists over `A`, see [`Layered::enumerate_staged`].
    pub fn height(&self, t: &LayeredTerm) -> usize {
        match t {
            LayeredTerm::Var(_) => 0,
            LayeredTerm::Layer { side, op, children } => {
                let hs: Vec<usize> = children.iter().map(|c| self.height(c)).collect();
                self.layer_height(*side, op, &hs)
            }
        }
    }

    fn layer_height(&self, p: usize, op: &Label, child_heights: &[usize]) -> usize {
        let s = &self.summands[p];
        child_heights
            .iter()
            .enumerate()
            .map(|(i, h)| s.leaf_depth(op, &Label::nat(i as u64)) + h)
            .fold(s.op_height(op), usize::max)
    }

    /// Checks alternation, sorted distinct children, complement membership
    /// and full support, recursively.
    pub fn is_canonical(&self, t: &LayeredTerm) -> bool {
        match t {
            LayeredTerm::Var(_) => true,
            LayeredTerm::Layer { side, op, children } => {
                let Some(s) = self.summands.get(*side) else {
                    return false;
                };
                let n = FinSet::naturals(children.len());
                if self.nullary[*side].contains(op) {
                    return children.is_empty();
                }
                children.windows(2).all(|w| w[0] < w[1])
                    && children.iter().all(|c| c.side() != Some(*side) && self.is_canonical(c))
                    && s.unit_preimage(op).is_none()
                    && minimal_support(s.as_ref(), &n, op).is_ok_and(|u| u == n)
            }
        }
    }

    /// Brings a layered tree into canonical form: same-summand layers are
    /// merged through the multiplication, duplicate children are
    /// identified, unused children dropped and unit layers collapsed.
    pub fn normalize(&self, t: &LayeredTerm) -> Result<LayeredTerm> {
        let LayeredTerm::Layer { side, op, children } = t else {
            return Ok(t.clone());
        };
        let p = *side;
        let s = self
            .summands
            .get(p)
            .ok_or_else(|| Error::Contract(format!("no summand {p}")))?;
        if !self.nullary[p].contains(op) && !supported_by(s.as_ref(), &FinSet::naturals(children.len()), op)? {
            return Err(Error::Contract(format!(
                "{op} is not an operation on {} children",
                children.len()
            )));
        }
        let kids = children.iter().map(|c| self.normalize(c)).collect::<Result<Vec<_>>>()?;
        let mut pool: Vec<LayeredTerm> = Vec::new();
        for c in &kids {
            match c {
                LayeredTerm::Layer { side, children, .. } if *side == p => pool.extend(children.iter().cloned()),
                other => pool.push(other.clone()),
            }
        }
        pool.sort();
        pool.dedup();
        let at = |c: &LayeredTerm| Label::nat(pool.binary_search(c).expect("pooled") as u64);
        let inner: Vec<Label> = kids
            .iter()
            .map(|c| match c {
                LayeredTerm::Layer { side, op, children } if *side == p => {
                    s.fmap(&|i: &Label| at(&children[index(i)]), op)
                }
                other => s.unit(&at(other)),
            })
            .collect();
        let flat = s.mult(&s.fmap(&|i: &Label| inner[index(i)].clone(), op));
        self.layer_over(p, &flat, &pool)
    }

    /// The canonical term for `op ∈ S_p(pool)`, with `op` over the indices
    /// of `pool` and every pool entry canonical and not `p`-topped.
    fn layer_over(&self, p: usize, op: &Label, pool: &[LayeredTerm]) -> Result<LayeredTerm> {
        let s = self.summands[p].as_ref();
        if let Some(i) = s.unit_preimage(op) {
            return Ok(pool[index(&i)].clone());
        }
        if self.nullary[p].contains(op) {
            return Ok(LayeredTerm::Layer {
                side: p,
                op: op.clone(),
                children: Vec::new(),
            });
        }
        let u = minimal_support(s, &FinSet::naturals(pool.len()), op)?;
        let restricted = restrict_to_support(s, &u, op)?;
        let op = s.fmap(
            &|i: &Label| Label::nat(u.index_of(i).expect("in support") as u64),
            &restricted,
        );
        Ok(LayeredTerm::Layer {
            side: p,
            op,
            children: u.iter().map(|i| pool[index(i)].clone()).collect(),
        })
    }

    /// The embedding of `S_p A`: units become variables, everything else
    /// one layer over its support.
    pub fn embed(&self, p: usize, u: &Label) -> Result<LayeredTerm> {
        let s = self.summands[p].as_ref();
        if let Some(a) = s.unit_preimage(u) {
            return Ok(LayeredTerm::Var(a));
        }
        let leaves = leaves_of(s, u);
        let pool: Vec<LayeredTerm> = leaves.iter().cloned().map(LayeredTerm::Var).collect();
        let op = s.fmap(&|a: &Label| Label::nat(leaves.index_of(a).expect("leaf") as u64), u);
        self.layer_over(p, &op, &pool)
    }

    /// Substitutes terms for variables and renormalizes. With the decoding
    /// of variables as terms this is the multiplication.
    pub fn subst(&self, t: &LayeredTerm, assignment: &dyn Fn(&Label) -> Result<LayeredTerm>) -> Result<LayeredTerm> {
        let out = self.normalize(&t.map_vars(assignment)?)?;
        if out.depth() > self.max_depth {
            return Err(Error::BudgetExceeded(format!(
                "substitution reached depth {} (cap {})",
                out.depth(),
                self.max_depth
            )));
        }
        Ok(out)
    }

    pub fn unit(&self, a: &Label) -> LayeredTerm {
        LayeredTerm::Var(a.clone())
    }

    /// Flattens a term whose variables are encoded terms.
    pub fn mult(&self, tt: &LayeredTerm) -> Result<LayeredTerm> {
        self.subst(tt, &|v: &Label| LayeredTerm::from_label(v))
    }

    /// Renames variables along `f`.
    pub fn fmap(&self, f: &dyn Fn(&Label) -> Label, t: &LayeredTerm) -> Result<LayeredTerm> {
        self.subst(t, &|a: &Label| Ok(LayeredTerm::Var(f(a))))
    }

    /// Canonical operations of summand `p` over `k` indices of height at
    /// most `h`.
    fn full_ops(&self, p: usize, k: usize, h: usize) -> Result<Vec<Label>> {
        let s = &self.summands[p];
        let key = (p, k, if s.finite_valued() { 0 } else { h });
        if let Some(v) = self.ops.lock().expect("ops lock").get(&key) {
            return Ok(v.clone());
        }
        let n = FinSet::naturals(k);
        let mut out = Vec::new();
        for op in s.bounded_carrier(&n, h)?.iter() {
            if s.unit_preimage(op).is_some() || s.op_height(op) > h || self.nullary[p].contains(op) {
                continue;
            }
            if minimal_support(s.as_ref(), &n, op)? == n {
                out.push(op.clone());
            }
        }
        self.ops.lock().expect("ops lock").insert(key, out.clone());
        Ok(out)
    }

    /// All canonical terms over `A` of height at most `depth`, sorted.
    pub fn enumerate(&self, a: &FinSet, depth: usize) -> Result<Vec<LayeredTerm>> {
        Ok(self.enumerate_staged(a, depth)?.into_iter().map(|(t, _)| t).collect())
    }

    /// [`Layered::enumerate`] with the chain stage at which each term
    /// first appears. A childless layer whose operation needs a nonempty
    /// set appears one stage after the earliest possible child.
    pub fn enumerate_staged(&self, a: &FinSet, depth: usize) -> Result<Vec<(LayeredTerm, usize)>> {
        let vars: Vec<(LayeredTerm, usize)> = a.iter().map(|x| (LayeredTerm::Var(x.clone()), 0)).collect();
        let mut level = vars.clone();
        for h in 1..=depth {
            let mut next = vars.clone();
            for p in 0..self.summands.len() {
                let s = &self.summands[p];
                let pool: Vec<&(LayeredTerm, usize)> = level.iter().filter(|(t, _)| t.side() != Some(p)).collect();
                if let Some(lowest) = pool.iter().map(|(_, ht)| *ht).min() {
                    for op in &self.nullary[p] {
                        let t = LayeredTerm::Layer {
                            side: p,
                            op: op.clone(),
                            children: Vec::new(),
                        };
                        next.push((t, lowest + 1));
                    }
                }
                for k in 0..=pool.len() {
                    for op in self.full_ops(p, k, h)? {
                        let limits: Vec<usize> = (0..k)
                            .map(|i| h.saturating_sub(s.leaf_depth(&op, &Label::nat(i as u64))))
                            .collect();
                        let mut chosen = Vec::with_capacity(k);
                        choose(&pool, &limits, 0, &mut chosen, &mut |kids: &[&(
                            LayeredTerm,
                            usize,
                        )]| {
                            let hs: Vec<usize> = kids.iter().map(|(_, ht)| *ht).collect();
                            let ht = self.layer_height(p, &op, &hs);
                            let t = LayeredTerm::Layer {
                                side: p,
                                op: op.clone(),
                                children: kids.iter().map(|(c, _)| c.clone()).collect(),
                            };
                            next.push((t, ht));
                        });
                        if next.len() > MATERIALIZE_LIMIT {
                            return Err(Error::BudgetExceeded(format!(
                                "more than {MATERIALIZE_LIMIT} terms at height {h}"
                            )));
                        }
                    }
                }
            }
            next.sort();
            level = next;
        }
        Ok(level)
    }

    /// A tree with one line per layer, children indented.
    pub fn pretty(&self, t: &LayeredTerm) -> String {
        let mut out = String::new();
        self.pretty_into(t, 0, &mut out);
        out
    }

    fn pretty_into(&self, t: &LayeredTerm, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match t {
            LayeredTerm::Var(a) => out.push_str(&format!("{pad}{a}\n")),
            LayeredTerm::Layer { side, op, children } => {
                out.push_str(&format!("{pad}{} {op}\n", self.summands[*side].name()));
                for c in children {
                    self.pretty_into(c, indent + 1, out);
                }
            }
        }
    }
}

/// Strictly increasing choices from `pool` with per-position height limits.
fn choose<'a>(
    pool: &[&'a (LayeredTerm, usize)],
    limits: &[usize],
    start: usize,
    chosen: &mut Vec<&'a (LayeredTerm, usize)>,
    emit: &mut dyn FnMut(&[&'a (LayeredTerm, usize)]),
) {
    let i = chosen.len();
    if i == limits.len() {
        emit(chosen);
        return;
    }
    for j in start..pool.len() {
        if pool.len() - j < limits.len() - i {
            break;
        }
        if pool[j].1 <= limits[i] {
            chosen.push(pool[j]);
            choose(pool, limits, j + 1, chosen, emit);
            chosen.pop();
        }
    }
}

/// Elements of the closure of `s` at `∅` that are not in `s ∅`. Monads
/// with infinite values are left alone.
fn extra_constants(s: &dyn Monad) -> FinSet {
    let Ok(closure) = closure_at_empty(s) else {
        return FinSet::empty();
    };
    closure.value_at_empty.difference(&closure.reflection_at_empty.image())
}

/// The labels `fmap` visits in `u`; a superset of any support.
fn leaves_of(s: &dyn Monad, u: &Label) -> FinSet {
    let seen = RefCell::new(Vec::new());
    s.fmap(
        &|l: &Label| {
            seen.borrow_mut().push(l.clone());
            l.clone()
        },
        u,
    );
    FinSet::from_labels(seen.into_inner())
}

/// Translations between layered terms and a materialized coproduct.
impl Layered {
    pub fn for_coproduct(cop: &CoproductMonad) -> Result<Self> {
        Layered::new(cop.summands().to_vec())
    }

    /// The coproduct element denoted by a canonical term.
    pub fn to_element(&self, cop: &CoproductMonad, t: &LayeredTerm) -> Label {
        match t {
            LayeredTerm::Var(a) => cop.unit(a),
            LayeredTerm::Layer { side, op, children } => {
                let kids: Vec<Label> = children.iter().map(|c| self.to_element(cop, c)).collect();
                let w = self.summands[*side].fmap(&|i: &Label| kids[index(i)].clone(), op);
                cop.structure(*side, &w)
            }
        }
    }

    /// The canonical term of a coproduct element.
    pub fn from_element(&self, cop: &CoproductMonad, z: &Label) -> Result<LayeredTerm> {
        let Some((p, s)) = cop.split(z) else {
            return Ok(LayeredTerm::Var(z.as_right().expect("variable").clone()));
        };
        let m = self.summands[p].as_ref();
        let leaves = leaves_of(m, &s);
        let pool = leaves
            .iter()
            .map(|leaf| self.from_element(cop, &cop.leaf_to_element(p, leaf)))
            .collect::<Result<Vec<_>>>()?;
        // reindex so the pool is sorted as terms
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&i, &j| pool[i].cmp(&pool[j]));
        let mut rank = vec![0; pool.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let sorted: Vec<LayeredTerm> = order.iter().map(|&i| pool[i].clone()).collect();
        let op = m.fmap(
            &|leaf: &Label| Label::nat(rank[leaves.index_of(leaf).expect("leaf")] as u64),
            &s,
        );
        self.layer_over(p, &op, &sorted)
    }
}

/// Per-stage comparison in [`mode_agreement`].
#[derive(Clone, Debug, Serialize)]
pub struct StageAgreement {
    pub stage: usize,
    pub materialized: usize,
    pub terms: usize,
    pub matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AgreementReport {
    pub depth: usize,
    pub stages: Vec<StageAgreement>,
    pub bijective: bool,
    pub round_trip: bool,
    pub unit_commutes: bool,
    pub embeddings_commute: bool,
    pub mult_checked: usize,
    pub mult_witness: Option<Label>,
}

impl AgreementReport {
    pub fn passed(&self) -> bool {
        self.stages.iter().all(|s| s.matches)
            && self.bijective
            && self.round_trip
            && self.unit_commutes
            && self.embeddings_commute
            && self.mult_witness.is_none()
    }
}

/// Compares the term enumeration with a converged materialized coproduct
/// stage by stage, and checks that the translation commutes with unit,
/// multiplication (on `samples` sampled two-fold elements) and embeddings.
pub fn mode_agreement(cop: &CoproductMonad, a: &FinSet, samples: usize, seed: u64) -> Result<AgreementReport> {
    let sol = cop.solve(a)?;
    let layered = Layered::for_coproduct(cop)?;
    let depth = sol.converged_at;
    let staged = layered.enumerate_staged(a, depth)?;
    let terms: Vec<LayeredTerm> = staged.iter().map(|(t, _)| t.clone()).collect();

    let mut stages = Vec::with_capacity(depth + 1);
    for k in 0..=depth {
        let mut want: Vec<Label> = a.iter().map(|x| cop.unit(x)).collect();
        for (p, set) in sol.chain.stages[k].iter().enumerate() {
            want.extend(set.iter().map(|x| cop.layer(p, x.clone())));
        }
        let want = FinSet::from_labels(want);
        let got: Vec<Label> = staged
            .iter()
            .filter(|(_, ht)| *ht <= k)
            .map(|(t, _)| layered.to_element(cop, t))
            .collect();
        let n = got.len();
        let got = FinSet::from_labels(got);
        stages.push(StageAgreement {
            stage: k,
            materialized: want.len(),
            terms: n,
            matches: got.len() == n && got == want,
        });
    }

    let carrier = cop.carrier(a)?;
    let image = FinSet::from_labels(terms.iter().map(|t| layered.to_element(cop, t)));
    let bijective = image.len() == terms.len() && image == carrier;
    let mut round_trip = true;
    for t in &terms {
        round_trip &= layered.from_element(cop, &layered.to_element(cop, t))? == *t;
    }
    for z in &carrier {
        round_trip &= layered.to_element(cop, &layered.from_element(cop, z)?) == *z;
    }
    let unit_commutes = a
        .iter()
        .all(|x| layered.to_element(cop, &layered.unit(x)) == cop.unit(x));
    let mut embeddings_commute = true;
    for (p, s) in cop.summands().iter().enumerate() {
        for u in s.carrier(a)?.iter() {
            embeddings_commute &= layered.from_element(cop, &cop.embed(p, u))? == layered.embed(p, u)?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mult_checked = 0;
    let mut mult_witness = None;
    for _ in 0..samples {
        let Some(zz) = sample_level(cop, a, 2, &mut rng) else {
            continue;
        };
        mult_checked += 1;
        let tt = layered.from_element(cop, &zz)?;
        let lhs = layered.subst(&tt, &|v: &Label| layered.from_element(cop, v))?;
        let rhs = layered.from_element(cop, &cop.mult(&zz))?;
        if lhs != rhs {
            mult_witness = Some(zz);
            break;
        }
    }
    Ok(AgreementReport {
        depth,
        stages,
        bijective,
        round_trip,
        unit_commutes,
        embeddings_commute,
        mult_checked,
        mult_witness,
    })
}
