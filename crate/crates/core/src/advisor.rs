//! Deciding existence of coproducts from declared fixpoint profiles.
//!
//! A fixpoint of a functor `H` is a cardinal `λ` with `|H λ| = λ`. Two
//! consistent monads have a coproduct exactly when one of them is
//! substantially exceptional or they share arbitrarily large fixpoints.
//! Profiles are declarations; nothing here derives them from a monad.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbolic classes of cardinals that contain arbitrarily large members.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CardinalClass {
    /// All `2^κ` beyond some threshold (accessible functors).
    PowersBeyond,
    /// The cardinals `2^λ` for which the interval `(λ, 2^λ]` avoids a
    /// fixed class `A` of cardinals (or, with `complement`, avoids the
    /// complement of `A`). The two polarities of one family are disjoint.
    Interval { family: String, complement: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileKind {
    Inconsistent,
    SubstantiallyExceptional,
    NoFixpoints,
    /// Every cardinal from some point on; the finitary case.
    EventuallyAllCardinals,
    CardinalClass(CardinalClass),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixpointProfile {
    pub kind: ProfileKind,
    /// Constant on nonempty sets; only meaningful for functors.
    pub substantially_constant: bool,
}

impl FixpointProfile {
    pub fn new(kind: ProfileKind) -> Self {
        FixpointProfile {
            kind,
            substantially_constant: false,
        }
    }

    pub fn inconsistent() -> Self {
        Self::new(ProfileKind::Inconsistent)
    }

    pub fn exceptional() -> Self {
        Self::new(ProfileKind::SubstantiallyExceptional)
    }

    pub fn no_fixpoints() -> Self {
        Self::new(ProfileKind::NoFixpoints)
    }

    pub fn finitary() -> Self {
        Self::new(ProfileKind::EventuallyAllCardinals)
    }

    pub fn class(c: CardinalClass) -> Self {
        Self::new(ProfileKind::CardinalClass(c))
    }

    /// A functor constant on nonempty sets.
    pub fn constant() -> Self {
        FixpointProfile {
            kind: ProfileKind::NoFixpoints,
            substantially_constant: true,
        }
    }
}

impl FromStr for FixpointProfile {
    type Err = Error;

    /// `no-fixpoints | exceptional | finitary | inconsistent | constant |
    /// class:none | class:all | class:powers | class:interval:<family> |
    /// class:co-interval:<family>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "no-fixpoints" | "class:none" => Self::no_fixpoints(),
            "exceptional" => Self::exceptional(),
            "finitary" | "class:all" => Self::finitary(),
            "inconsistent" => Self::inconsistent(),
            "constant" => Self::constant(),
            "class:powers" => Self::class(CardinalClass::PowersBeyond),
            _ => {
                let (complement, family) = if let Some(f) = s.strip_prefix("class:interval:") {
                    (false, f)
                } else if let Some(f) = s.strip_prefix("class:co-interval:") {
                    (true, f)
                } else {
                    return Err(Error::BadSpecifier(format!("unknown profile {s}")));
                };
                if family.is_empty() {
                    return Err(Error::BadSpecifier(format!("{s}: missing family name")));
                }
                Self::class(CardinalClass::Interval {
                    family: family.to_string(),
                    complement,
                })
            }
        })
    }
}

impl fmt::Display for FixpointProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.substantially_constant {
            return f.write_str("constant");
        }
        match &self.kind {
            ProfileKind::Inconsistent => f.write_str("inconsistent"),
            ProfileKind::SubstantiallyExceptional => f.write_str("exceptional"),
            ProfileKind::NoFixpoints => f.write_str("no-fixpoints"),
            ProfileKind::EventuallyAllCardinals => f.write_str("finitary"),
            ProfileKind::CardinalClass(CardinalClass::PowersBeyond) => f.write_str("class:powers"),
            ProfileKind::CardinalClass(CardinalClass::Interval { family, complement }) => {
                write!(f, "class:{}interval:{family}", if *complement { "co-" } else { "" })
            }
        }
    }
}

/// Parses `profile <name> = <profile>`.
pub fn parse_declaration(line: &str) -> Result<(String, FixpointProfile)> {
    let rest = line
        .trim()
        .strip_prefix("profile")
        .ok_or_else(|| Error::BadSpecifier(format!("{line}: expected `profile <name> = <kind>`")))?;
    let (name, kind) = rest
        .split_once('=')
        .ok_or_else(|| Error::BadSpecifier(format!("{line}: missing `=`")))?;
    let name = name.trim();
    if name.is_empty() {
        return Err(Error::BadSpecifier(format!("{line}: missing name")));
    }
    Ok((name.to_string(), kind.parse()?))
}

/// Declared profiles of the builtin monads and functors.
pub fn builtin_profile(name: &str) -> Option<FixpointProfile> {
    Some(match name {
        "powerset" | "continuation" => FixpointProfile::no_fixpoints(),
        "exception" | "exception0" | "maybe" => FixpointProfile::exceptional(),
        "terminal" | "terminal0" => FixpointProfile::inconsistent(),
        "reader" | "state" | "finite-powerset" | "list" | "pA" => FixpointProfile::finitary(),
        "const" | "const0" => FixpointProfile::constant(),
        _ => return None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Exists,
    NotExists,
    Unknown,
}

/// The rule a verdict rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    /// An inconsistent summand makes the coproduct inconsistent.
    InconsistentSummand,
    /// A substantially exceptional monad has coproducts with every monad.
    ExceptionalSummand,
    /// All but at most one member of a family are exceptional.
    AtMostOneNonExceptional,
    /// The joint fixpoints are unbounded.
    JointFixpoints,
    /// The joint fixpoints are bounded, so the chain cannot converge.
    NoJointFixpoints,
    /// The table cannot tell whether the joint fixpoints are bounded.
    UndeterminedFixpoints,
    /// The functor generates no free monad.
    NoFreeMonad,
}

impl Rule {
    pub fn description(self) -> &'static str {
        match self {
            Rule::InconsistentSummand => "an inconsistent summand absorbs the coproduct",
            Rule::ExceptionalSummand => "a substantially exceptional monad has coproducts with all monads",
            Rule::AtMostOneNonExceptional => "all members but at most one are substantially exceptional",
            Rule::JointFixpoints => "the non-exceptional members have arbitrarily large joint fixpoints",
            Rule::NoJointFixpoints => "no exceptional member and the joint fixpoints are bounded",
            Rule::UndeterminedFixpoints => "boundedness of the joint fixpoints is not decided by the class table",
            Rule::NoFreeMonad => "the functor has neither large fixpoints nor is it constant, so it has no free monad",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub verdict: Verdict,
    pub rule: Rule,
}

impl Decision {
    fn new(verdict: Verdict, rule: Rule) -> Self {
        Decision { verdict, rule }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} ({})", self.verdict, self.rule.description())
    }
}

/// Fixpoints of a consistent, non-exceptional profile.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Fixpoints {
    None,
    All,
    Class(CardinalClass),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Joint {
    Unbounded(Fixpoints),
    Bounded,
    Unknown,
}

fn fixpoints(p: &FixpointProfile) -> Fixpoints {
    match &p.kind {
        ProfileKind::NoFixpoints => Fixpoints::None,
        ProfileKind::CardinalClass(c) => Fixpoints::Class(c.clone()),
        _ => Fixpoints::All,
    }
}

/// The pairwise table for joint fixpoints.
fn meet(a: &Fixpoints, b: &Fixpoints) -> Joint {
    use CardinalClass::*;
    match (a, b) {
        (Fixpoints::None, _) | (_, Fixpoints::None) => Joint::Bounded,
        (Fixpoints::All, x) | (x, Fixpoints::All) => Joint::Unbounded(x.clone()),
        (Fixpoints::Class(PowersBeyond), Fixpoints::Class(PowersBeyond)) => {
            Joint::Unbounded(Fixpoints::Class(PowersBeyond))
        }
        (
            Fixpoints::Class(Interval {
                family: f,
                complement: c,
            }),
            Fixpoints::Class(Interval {
                family: g,
                complement: d,
            }),
        ) if f == g => {
            if c == d {
                Joint::Unbounded(a.clone())
            } else {
                Joint::Bounded
            }
        }
        _ => Joint::Unknown,
    }
}

fn joint_of(profiles: &[&FixpointProfile]) -> Joint {
    let mut acc = Joint::Unbounded(Fixpoints::All);
    let mut unknown = false;
    for p in profiles {
        let here = fixpoints(p);
        match &acc {
            Joint::Unbounded(x) => match meet(x, &here) {
                Joint::Unknown => unknown = true,
                other => acc = other,
            },
            Joint::Bounded => return Joint::Bounded,
            Joint::Unknown => unreachable!(),
        }
    }
    if matches!(acc, Joint::Bounded) {
        Joint::Bounded
    } else if unknown {
        Joint::Unknown
    } else {
        acc
    }
}

fn by_joint(j: Joint) -> Decision {
    match j {
        Joint::Unbounded(_) => Decision::new(Verdict::Exists, Rule::JointFixpoints),
        Joint::Bounded => Decision::new(Verdict::NotExists, Rule::NoJointFixpoints),
        Joint::Unknown => Decision::new(Verdict::Unknown, Rule::UndeterminedFixpoints),
    }
}

fn is_exceptional(p: &FixpointProfile) -> bool {
    p.kind == ProfileKind::SubstantiallyExceptional
}

/// Whether `S ⊕ T` exists for monads with these profiles.
pub fn coproduct_exists(p: &FixpointProfile, q: &FixpointProfile) -> Decision {
    family_exists(&[p.clone(), q.clone()]).expect("two profiles")
}

/// Whether a family of monads has a coproduct: all non-exceptional
/// members share unbounded fixpoints, or at most one is non-exceptional.
pub fn family_exists(profiles: &[FixpointProfile]) -> Result<Decision> {
    if profiles.len() < 2 {
        return Err(Error::Contract("a family needs at least two members".into()));
    }
    if profiles.iter().any(|p| p.kind == ProfileKind::Inconsistent) {
        return Ok(Decision::new(Verdict::Exists, Rule::InconsistentSummand));
    }
    let rest: Vec<&FixpointProfile> = profiles.iter().filter(|p| !is_exceptional(p)).collect();
    match rest.len() {
        0 | 1 if profiles.len() == 2 => Ok(Decision::new(Verdict::Exists, Rule::ExceptionalSummand)),
        0 | 1 => Ok(Decision::new(Verdict::Exists, Rule::AtMostOneNonExceptional)),
        _ => Ok(by_joint(joint_of(&rest))),
    }
}

/// The profile of the free monad on a functor, if it exists: it has the
/// large fixpoints of the functor, and a functor constant on nonempty sets
/// yields an exception monad.
pub fn free_monad_profile(h: &FixpointProfile) -> Option<FixpointProfile> {
    if h.substantially_constant {
        return Some(FixpointProfile::exceptional());
    }
    match &h.kind {
        ProfileKind::NoFixpoints => None,
        ProfileKind::SubstantiallyExceptional => Some(FixpointProfile::finitary()),
        ProfileKind::Inconsistent => Some(FixpointProfile::exceptional()),
        other => Some(FixpointProfile::new(other.clone())),
    }
}

/// Whether `S ⊕ F_H` exists for the free monad on `H`.
pub fn free_monad_rules(functor: &FixpointProfile, monad: &FixpointProfile) -> Decision {
    match free_monad_profile(functor) {
        None => Decision::new(Verdict::NotExists, Rule::NoFreeMonad),
        Some(f) => coproduct_exists(monad, &f),
    }
}

/// Whether `F_H ⊕ F_K` exists; it is the free monad on `H + K`.
pub fn free_free(h: &FixpointProfile, k: &FixpointProfile) -> Decision {
    match (free_monad_profile(h), free_monad_profile(k)) {
        (Some(f), Some(g)) => coproduct_exists(&f, &g),
        _ => Decision::new(Verdict::NotExists, Rule::NoFreeMonad),
    }
}

/// Coproducts with every monad exist exactly for exceptional monads.
pub fn with_all_monads(p: &FixpointProfile) -> Decision {
    coproduct_exists(p, &FixpointProfile::no_fixpoints())
}

/// Coproducts with every finitary monad exist exactly when the monad's
/// functor generates a free monad.
pub fn with_all_finitary(p: &FixpointProfile) -> Decision {
    coproduct_exists(p, &FixpointProfile::finitary())
}

/// Every profile the table distinguishes, for exhaustive tests.
pub fn all_profiles() -> Vec<FixpointProfile> {
    vec![
        FixpointProfile::inconsistent(),
        FixpointProfile::exceptional(),
        FixpointProfile::no_fixpoints(),
        FixpointProfile::finitary(),
        FixpointProfile::class(CardinalClass::PowersBeyond),
        FixpointProfile::class(CardinalClass::Interval {
            family: "A".into(),
            complement: false,
        }),
        FixpointProfile::class(CardinalClass::Interval {
            family: "A".into(),
            complement: true,
        }),
        FixpointProfile::class(CardinalClass::Interval {
            family: "B".into(),
            complement: false,
        }),
    ]
}
