//! Canonical element labels.
//!
//! Every element of every carrier in this crate is a [`Label`]. Labels are
//! immutable trees with a fixed total order, so finite sets built from them
//! enumerate identically on every run. Monad elements are encoded
//! structurally: a powerset element is a [`Node::Set`] of the labels it
//! contains, an exception constant is a [`Node::Right`], and so on. Nesting a
//! monad inside another therefore just nests labels.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// A cheaply clonable, totally ordered element label.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<Node>);

/// The shape of a label.
///
/// The derived order is the canonical order: naturals, then atoms by name,
/// then left tags before right tags, then sets (sorted-sequence
/// lexicographic), tuples, variables and operation nodes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    /// A numbered atom; index sets `{0, .., n-1}` use these.
    Nat(u64),
    /// A named atom.
    Atom(String),
    /// Left coproduct injection.
    Left(Label),
    /// Right coproduct injection.
    Right(Label),
    /// A finite set; elements are kept sorted and distinct.
    Set(Vec<Label>),
    /// A finite sequence.
    Tuple(Vec<Label>),
    /// A variable leaf of a term.
    Var(Label),
    /// An operation symbol applied to arguments (an opaque term node).
    Op(String, Vec<Label>),
}

impl Label {
    pub fn new(node: Node) -> Self {
        Label(Arc::new(node))
    }

    pub fn nat(n: u64) -> Self {
        Label::new(Node::Nat(n))
    }

    pub fn atom(name: impl Into<String>) -> Self {
        Label::new(Node::Atom(name.into()))
    }

    pub fn left(inner: Label) -> Self {
        Label::new(Node::Left(inner))
    }

    pub fn right(inner: Label) -> Self {
        Label::new(Node::Right(inner))
    }

    /// Builds a set label, sorting and deduplicating the elements.
    pub fn set(elems: impl IntoIterator<Item = Label>) -> Self {
        let mut v: Vec<Label> = elems.into_iter().collect();
        v.sort();
        v.dedup();
        Label::new(Node::Set(v))
    }

    pub fn tuple(elems: Vec<Label>) -> Self {
        Label::new(Node::Tuple(elems))
    }

    pub fn var(inner: Label) -> Self {
        Label::new(Node::Var(inner))
    }

    pub fn op(name: impl Into<String>, args: Vec<Label>) -> Self {
        Label::new(Node::Op(name.into(), args))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn as_nat(&self) -> Option<u64> {
        match self.node() {
            Node::Nat(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_left(&self) -> Option<&Label> {
        match self.node() {
            Node::Left(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_right(&self) -> Option<&Label> {
        match self.node() {
            Node::Right(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&[Label]> {
        match self.node() {
            Node::Set(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_tuple(&self) -> Option<&[Label]> {
        match self.node() {
            Node::Tuple(v) => Some(v),
            _ => None,
        }
    }

    /// Number of nodes in the label tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Nat(_) | Node::Atom(_) => 1,
            Node::Left(l) | Node::Right(l) | Node::Var(l) => 1 + l.size(),
            Node::Set(v) | Node::Tuple(v) | Node::Op(_, v) => 1 + v.iter().map(Label::size).sum::<usize>(),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, v: &[Label]) -> fmt::Result {
            for (i, l) in v.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{l}")?;
            }
            Ok(())
        }
        match self.node() {
            Node::Nat(n) => write!(f, "{n}"),
            Node::Atom(s) => f.write_str(s),
            Node::Left(l) => write!(f, "inl({l})"),
            Node::Right(l) => write!(f, "inr({l})"),
            Node::Set(v) => {
                f.write_str("{")?;
                list(f, v)?;
                f.write_str("}")
            }
            Node::Tuple(v) => {
                f.write_str("(")?;
                list(f, v)?;
                f.write_str(")")
            }
            Node::Var(l) => write!(f, "?{l}"),
            Node::Op(name, v) if v.is_empty() => f.write_str(name),
            Node::Op(name, v) => {
                write!(f, "{name}(")?;
                list(f, v)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label::atom(s)
    }
}

impl From<u64> for Label {
    fn from(n: u64) -> Self {
        Label::nat(n)
    }
}
