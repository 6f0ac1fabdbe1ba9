//! Free monads on finite signatures.
//!
//! Terms are labels: a variable is [`Node::Var`] and an operation node is
//! [`Node::Op`]. Carriers are infinite as soon as a signature has an
//! operation of positive arity, so they are only ever enumerated up to a
//! height.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::RngCore;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::finset::{FinSet, MATERIALIZE_LIMIT};
use crate::label::{Label, Node};
use crate::layered::{Layered, LayeredTerm};
use crate::monad::{pick, Functor, LeafSampler, Monad, MonadRef};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Signature {
    ops: Vec<(String, usize)>,
}

impl Signature {
    pub fn new(ops: Vec<(String, usize)>) -> Result<Self> {
        let mut names: Vec<&str> = ops.iter().map(|(n, _)| n.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Contract(format!("operation {} declared twice", w[0])));
        }
        Ok(Signature { ops })
    }

    pub fn empty() -> Self {
        Signature { ops: Vec::new() }
    }

    /// Parses `name/arity` items separated by commas, e.g. `f/2,c/0`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.is_empty() {
            return Ok(Signature::empty());
        }
        let ops = spec
            .split(',')
            .map(|item| {
                let (name, arity) = item
                    .trim()
                    .split_once('/')
                    .ok_or_else(|| Error::BadSpecifier(format!("{item}: expected name/arity")))?;
                let arity = arity
                    .parse()
                    .map_err(|_| Error::BadSpecifier(format!("{item}: arity is not a number")))?;
                if name.is_empty() {
                    return Err(Error::BadSpecifier(format!("{item}: empty operation name")));
                }
                Ok((name.to_string(), arity))
            })
            .collect::<Result<Vec<_>>>()?;
        Signature::new(ops)
    }

    pub fn ops(&self) -> &[(String, usize)] {
        &self.ops
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.ops.iter().find(|(n, _)| n == name).map(|(_, a)| *a)
    }

    pub fn is_nullary(&self) -> bool {
        self.ops.iter().all(|(_, a)| *a == 0)
    }

    /// The disjoint union; names must not clash.
    pub fn sum(&self, other: &Signature) -> Result<Signature> {
        Signature::new(self.ops.iter().chain(&other.ops).cloned().collect())
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.ops.iter().map(|(n, a)| format!("{n}/{a}")).collect();
        f.write_str(&items.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Label),
    Op(String, Vec<Term>),
}

impl Term {
    pub fn to_label(&self) -> Label {
        match self {
            Term::Var(a) => Label::var(a.clone()),
            Term::Op(f, args) => Label::op(f.clone(), args.iter().map(Term::to_label).collect()),
        }
    }

    pub fn from_label(l: &Label) -> Result<Term> {
        match l.node() {
            Node::Var(a) => Ok(Term::Var(a.clone())),
            Node::Op(f, args) => Ok(Term::Op(
                f.clone(),
                args.iter().map(Term::from_label).collect::<Result<_>>()?,
            )),
            _ => Err(Error::NotAnElement(l.clone())),
        }
    }
}

/// Height of a term label: variables have height 0.
pub fn height(t: &Label) -> usize {
    match t.node() {
        Node::Op(_, args) => 1 + args.iter().map(height).max().unwrap_or(0),
        _ => 0,
    }
}

/// Number of operation nodes.
pub fn op_count(t: &Label) -> usize {
    match t.node() {
        Node::Op(_, args) => 1 + args.iter().map(op_count).sum::<usize>(),
        _ => 0,
    }
}

fn var_depth(t: &Label, leaf: &Label) -> Option<usize> {
    match t.node() {
        Node::Var(a) => (a == leaf).then_some(0),
        Node::Op(_, args) => args.iter().filter_map(|a| var_depth(a, leaf)).max().map(|d| d + 1),
        _ => None,
    }
}

fn rename(t: &Label, f: &dyn Fn(&Label) -> Label) -> Label {
    match t.node() {
        Node::Var(a) => Label::var(f(a)),
        Node::Op(name, args) => Label::op(name.clone(), args.iter().map(|a| rename(a, f)).collect()),
        _ => t.clone(),
    }
}

fn graft(t: &Label) -> Label {
    match t.node() {
        Node::Var(inner) => inner.clone(),
        Node::Op(name, args) => Label::op(name.clone(), args.iter().map(graft).collect()),
        _ => t.clone(),
    }
}

/// All terms over `x` of height at most `h`, sorted.
pub fn terms_up_to(sig: &Signature, x: &FinSet, h: usize) -> Result<FinSet> {
    let mut level: Vec<Label> = x.iter().map(|a| Label::var(a.clone())).collect();
    for _ in 0..h {
        let mut next = level
            .iter()
            .filter(|t| matches!(t.node(), Node::Var(_)))
            .cloned()
            .collect::<Vec<_>>();
        for (name, arity) in &sig.ops {
            let count = (level.len() as u128).checked_pow(*arity as u32);
            if count.is_none_or(|c| c + next.len() as u128 > MATERIALIZE_LIMIT as u128) {
                return Err(Error::BudgetExceeded(format!(
                    "terms of height {h} over {} variables",
                    x.len()
                )));
            }
            for args in tuples(&level, *arity) {
                next.push(Label::op(name.clone(), args));
            }
        }
        level = next;
    }
    Ok(FinSet::from_labels(level))
}

fn tuples(pool: &[Label], k: usize) -> Vec<Vec<Label>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                pool.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// All terms over `x` with exactly `n` operation nodes.
pub fn terms_of_size(sig: &Signature, x: &FinSet, n: usize) -> Vec<Label> {
    let mut by_size: Vec<Vec<Label>> = Vec::with_capacity(n + 1);
    by_size.push(x.iter().map(|a| Label::var(a.clone())).collect());
    for size in 1..=n {
        let mut here = Vec::new();
        for (name, arity) in &sig.ops {
            // distribute size - 1 nodes over the arguments
            for split in compositions(size - 1, *arity) {
                let mut args_sets: Vec<Vec<Label>> = vec![Vec::new()];
                for part in split {
                    args_sets = args_sets
                        .into_iter()
                        .flat_map(|prefix| {
                            by_size[part].iter().map(move |t| {
                                let mut v = prefix.clone();
                                v.push(t.clone());
                                v
                            })
                        })
                        .collect();
                }
                here.extend(args_sets.into_iter().map(|args| Label::op(name.clone(), args)));
            }
        }
        by_size.push(here);
    }
    by_size.swap_remove(n)
}

/// Ordered ways of writing `total` as a sum of `parts` naturals.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// The free monad on a signature: unit is a variable, multiplication
/// grafts, the functor action renames variables.
#[derive(Clone, Debug)]
pub struct FreeMonad {
    sig: Signature,
}

pub fn term_monad(sig: Signature) -> FreeMonad {
    FreeMonad { sig }
}

impl FreeMonad {
    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    fn sample_depth(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>, depth: usize) -> Option<Label> {
        if self.sig.ops.is_empty() || depth == 0 || rng.next_u32().is_multiple_of(3) {
            if let Some(x) = leaf(rng) {
                return Some(Label::var(x));
            }
        }
        let nullary: Vec<&(String, usize)> = self.sig.ops.iter().filter(|(_, a)| *a == 0).collect();
        let (name, arity) = if depth == 0 {
            *nullary.get(rng.next_u32() as usize % nullary.len().max(1))?
        } else {
            &self.sig.ops[rng.next_u32() as usize % self.sig.ops.len()]
        };
        let args = (0..*arity)
            .map(|_| self.sample_depth(rng, leaf, depth - 1))
            .collect::<Option<Vec<_>>>()?;
        Some(Label::op(name.clone(), args))
    }
}

const SAMPLE_HEIGHT: usize = 4;

impl Functor for FreeMonad {
    fn name(&self) -> String {
        format!("free[{}]", self.sig)
    }

    fn carrier(&self, x: &FinSet) -> Result<FinSet> {
        if !self.sig.is_nullary() {
            return Err(Error::InfiniteCarrier(self.name()));
        }
        terms_up_to(&self.sig, x, 1)
    }

    fn fmap(&self, f: &dyn Fn(&Label) -> Label, s: &Label) -> Label {
        rename(s, f)
    }

    fn cardinality(&self, n: u128) -> Option<u128> {
        self.sig.is_nullary().then(|| n + self.sig.ops.len() as u128)
    }

    fn bounded_carrier(&self, x: &FinSet, bound: usize) -> Result<FinSet> {
        terms_up_to(&self.sig, x, bound)
    }

    fn finite_valued(&self) -> bool {
        self.sig.is_nullary()
    }
}

impl Monad for FreeMonad {
    fn unit(&self, x: &Label) -> Label {
        Label::var(x.clone())
    }

    fn mult(&self, ss: &Label) -> Label {
        graft(ss)
    }

    fn unit_preimage(&self, s: &Label) -> Option<Label> {
        match s.node() {
            Node::Var(a) => Some(a.clone()),
            _ => None,
        }
    }

    fn sample(&self, rng: &mut dyn RngCore, leaf: &mut LeafSampler<'_>) -> Option<Label> {
        self.sample_depth(rng, leaf, SAMPLE_HEIGHT)
    }

    fn from_empty(&self, s: &Label) -> Result<Option<Label>> {
        Ok(var_free(s).then(|| s.clone()))
    }

    fn op_height(&self, s: &Label) -> usize {
        height(s)
    }

    fn leaf_depth(&self, s: &Label, leaf: &Label) -> usize {
        var_depth(s, leaf).unwrap_or(0)
    }
}

fn var_free(t: &Label) -> bool {
    match t.node() {
        Node::Var(_) => false,
        Node::Op(_, args) => args.iter().all(var_free),
        _ => true,
    }
}

/// Draws a term over `x` of height at most `h`.
pub fn sample_term(sig: &Signature, x: &FinSet, h: usize, rng: &mut dyn RngCore) -> Option<Label> {
    let m = FreeMonad { sig: sig.clone() };
    m.sample_depth(rng, &mut |r: &mut dyn RngCore| pick(r, x), h)
}

/// One row of [`verify_barr`]: terms of height `≤ d + 1` against
/// operations applied to terms of height `≤ d`, plus variables.
#[derive(Clone, Debug, Serialize)]
pub struct BarrRow {
    pub depth: usize,
    pub terms: usize,
    pub operation_side: usize,
    pub variables: usize,
    /// `|A| + Σ_f |T_d|^{ar f}`, counted without enumeration.
    pub predicted: u128,
    pub bijective: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BarrReport {
    pub signature: String,
    pub rows: Vec<BarrRow>,
}

impl BarrReport {
    pub fn passed(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.bijective && r.terms as u128 == r.predicted && r.terms == r.operation_side + r.variables)
    }
}

/// Checks `F A ≅ H F A + A` level by level: every term of height `≤ d+1`
/// splits into a variable or an operation over terms of height `≤ d`, and
/// reassembling gives back the term.
pub fn verify_barr(sig: &Signature, a: &FinSet, depth: usize) -> Result<BarrReport> {
    let mut rows = Vec::with_capacity(depth + 1);
    for d in 0..=depth {
        let lower = terms_up_to(sig, a, d)?;
        let upper = terms_up_to(sig, a, d + 1)?;
        // the H F A + A side, tagged
        let mut side: Vec<Label> = a.iter().map(|x| Label::right(x.clone())).collect();
        for (name, arity) in &sig.ops {
            for args in tuples(lower.elements(), *arity) {
                side.push(Label::left(Label::op(name.clone(), args)));
            }
        }
        let side = FinSet::from_labels(side);
        let split = |t: &Label| match t.node() {
            Node::Var(x) => Label::right(x.clone()),
            _ => Label::left(t.clone()),
        };
        let join = |s: &Label| match s.node() {
            Node::Right(x) => Label::var(x.clone()),
            Node::Left(t) => t.clone(),
            _ => unreachable!(),
        };
        let forward_ok = upper.iter().all(|t| side.contains(&split(t)) && join(&split(t)) == *t);
        let backward_ok = side.iter().all(|s| upper.contains(&join(s)) && split(&join(s)) == *s);
        let predicted = sig
            .ops
            .iter()
            .map(|(_, ar)| (lower.len() as u128).pow(*ar as u32))
            .sum::<u128>()
            + a.len() as u128;
        rows.push(BarrRow {
            depth: d,
            terms: upper.len(),
            operation_side: side.len() - a.len(),
            variables: a.len(),
            predicted,
            bijective: forward_ok && backward_ok && upper.len() == side.len(),
        });
    }
    Ok(BarrReport {
        signature: sig.to_string(),
        rows,
    })
}

/// Canonical layered terms for `F_Σ ⊕ T` over `A` up to height `depth`,
/// with the free monad as summand 0.
pub fn coproduct_with_free(t: MonadRef, sig: &Signature, a: &FinSet, depth: usize) -> Result<Vec<LayeredTerm>> {
    let free: MonadRef = Arc::new(term_monad(sig.clone()));
    Layered::new(vec![free, t])?.enumerate(a, depth)
}

/// A `Σ + Σ'` term as a layered term of `F_Σ ⊕ F_Σ'`.
pub fn sum_term_to_layered(layered: &Layered, left: &Signature, t: &Label) -> Result<LayeredTerm> {
    match t.node() {
        Node::Var(a) => Ok(LayeredTerm::Var(a.clone())),
        Node::Op(name, args) => {
            let side = if left.arity(name).is_some() { 0 } else { 1 };
            let op = Label::op(
                name.clone(),
                (0..args.len()).map(|i| Label::var(Label::nat(i as u64))).collect(),
            );
            let children = args
                .iter()
                .map(|x| sum_term_to_layered(layered, left, x))
                .collect::<Result<Vec<_>>>()?;
            layered.normalize(&LayeredTerm::Layer { side, op, children })
        }
        _ => Err(Error::NotAnElement(t.clone())),
    }
}

/// Flattens a layered term of `F_Σ ⊕ F_Σ'` back to a `Σ + Σ'` term.
pub fn layered_to_sum_term(t: &LayeredTerm) -> Label {
    match t {
        LayeredTerm::Var(a) => Label::var(a.clone()),
        LayeredTerm::Layer { op, children, .. } => {
            let kids: Vec<Label> = children.iter().map(layered_to_sum_term).collect();
            graft(&rename(op, &|i: &Label| {
                kids[i.as_nat().expect("index") as usize].clone()
            }))
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SumRow {
    pub depth: usize,
    pub sum_terms: usize,
    pub layered_terms: usize,
    pub bijective: bool,
}

/// Compares `F_Σ ⊕ F_Σ'` as layered terms with `F_{Σ+Σ'}` at each height
/// up to `depth`, through the explicit translations both ways.
pub fn free_sum_bijection(left: &Signature, right: &Signature, a: &FinSet, depth: usize) -> Result<Vec<SumRow>> {
    let sum = left.sum(right)?;
    let layered = Layered::new(vec![
        Arc::new(term_monad(left.clone())) as MonadRef,
        Arc::new(term_monad(right.clone())),
    ])?;
    let mut rows = Vec::new();
    for d in 0..=depth {
        let flat = terms_up_to(&sum, a, d)?;
        let enumerated = layered.enumerate(a, d)?;
        let mut image = BTreeMap::new();
        let mut round_trip = true;
        for t in &flat {
            let l = sum_term_to_layered(&layered, left, t)?;
            round_trip &= layered_to_sum_term(&l) == *t && layered.is_canonical(&l);
            image.insert(l, t.clone());
        }
        let back_ok = enumerated
            .iter()
            .all(|l| image.get(l).is_some_and(|t| *t == layered_to_sum_term(l)));
        rows.push(SumRow {
            depth: d,
            sum_terms: flat.len(),
            layered_terms: enumerated.len(),
            bijective: round_trip && back_ok && image.len() == flat.len() && enumerated.len() == flat.len(),
        });
    }
    Ok(rows)
}
