//! Process terms and their canonical form.
//!
//! A process is a finite tree built from the inert process `0`, action
//! prefixing `a.P` / `~a.P`, and binary parallel composition `P | Q`.
//! Structural congruence (unit, commutativity and associativity of `|`)
//! is decided by converting to a canonical form: a sorted multiset of
//! prefix-headed components whose continuations are themselves canonical.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::parser::{self, ParseError};

/// A channel name: `[A-Za-z][A-Za-z0-9_]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(String);

impl Name {
    /// Builds a name, checking the identifier shape.
    pub fn new(id: impl Into<String>) -> Result<Self, InvalidName> {
        let id = id.into();
        let mut chars = id.chars();
        let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic());
        let tail_ok = chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if head_ok && tail_ok {
            Ok(Name(id))
        } else {
            Err(InvalidName(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid name {0:?}: expected [A-Za-z][A-Za-z0-9_]*")]
pub struct InvalidName(pub String);

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Direction of an action: plain `a` is an input, `~a` an output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    In,
    Out,
}

impl Polarity {
    /// The complementary polarity. An involution: `p.co().co() == p`.
    pub fn co(self) -> Polarity {
        match self {
            Polarity::In => Polarity::Out,
            Polarity::Out => Polarity::In,
        }
    }
}

/// A name together with a polarity; `a` and `~a` synchronise.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action {
    pub name: Name,
    pub polarity: Polarity,
}

impl Action {
    pub fn input(name: Name) -> Self {
        Action {
            name,
            polarity: Polarity::In,
        }
    }

    pub fn output(name: Name) -> Self {
        Action {
            name,
            polarity: Polarity::Out,
        }
    }

    /// The co-action: same name, flipped polarity.
    pub fn co(&self) -> Action {
        Action {
            name: self.name.clone(),
            polarity: self.polarity.co(),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.polarity {
            Polarity::In => write!(f, "{}", self.name),
            Polarity::Out => write!(f, "~{}", self.name),
        }
    }
}

/// Abstract syntax of a finite CCS term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Process {
    Inert,
    Prefix(Action, Box<Process>),
    Par(Box<Process>, Box<Process>),
}

impl Process {
    pub fn prefix(action: Action, cont: Process) -> Process {
        Process::Prefix(action, Box::new(cont))
    }

    pub fn par(left: Process, right: Process) -> Process {
        Process::Par(Box::new(left), Box::new(right))
    }

    /// Parses the concrete syntax (see the crate docs for the grammar).
    pub fn parse(text: &str) -> Result<Process, ParseError> {
        parser::parse(text)
    }

    /// All names occurring in the term, under either polarity.
    pub fn names(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        self.collect_names(&mut out);
        out
    }

    fn collect_names(&self, out: &mut BTreeSet<Name>) {
        match self {
            Process::Inert => {}
            Process::Prefix(act, cont) => {
                out.insert(act.name.clone());
                cont.collect_names(out);
            }
            Process::Par(l, r) => {
                l.collect_names(out);
                r.collect_names(out);
            }
        }
    }

    /// Number of prefixes in the term. Every reduction removes exactly two,
    /// so this bounds the length of any reduction sequence.
    pub fn prefix_count(&self) -> usize {
        match self {
            Process::Inert => 0,
            Process::Prefix(_, cont) => 1 + cont.prefix_count(),
            Process::Par(l, r) => l.prefix_count() + r.prefix_count(),
        }
    }

    /// True if an action with this name and polarity occurs anywhere in the
    /// term, guarded or not.
    pub fn occurs(&self, name: &Name, polarity: Polarity) -> bool {
        match self {
            Process::Inert => false,
            Process::Prefix(act, cont) => {
                (act.name == *name && act.polarity == polarity) || cont.occurs(name, polarity)
            }
            Process::Par(l, r) => l.occurs(name, polarity) || r.occurs(name, polarity),
        }
    }

    /// The subterm rooted at the unique prefix with this name and polarity,
    /// if one exists. Under linearity there is at most one.
    pub fn find_prefix(&self, name: &Name, polarity: Polarity) -> Option<&Process> {
        match self {
            Process::Inert => None,
            Process::Prefix(act, cont) => {
                if act.name == *name && act.polarity == polarity {
                    Some(self)
                } else {
                    cont.find_prefix(name, polarity)
                }
            }
            Process::Par(l, r) => l
                .find_prefix(name, polarity)
                .or_else(|| r.find_prefix(name, polarity)),
        }
    }

    /// Canonical form modulo structural congruence.
    pub fn canonical(&self) -> CanonicalProcess {
        let mut components = Vec::new();
        self.collect_components(&mut components);
        CanonicalProcess::from_components(components)
    }
}

impl Process {
    fn collect_components(&self, out: &mut Vec<CanonicalPrefix>) {
        match self {
            Process::Inert => {}
            Process::Prefix(act, cont) => out.push(CanonicalPrefix {
                action: act.clone(),
                continuation: cont.canonical(),
            }),
            Process::Par(l, r) => {
                l.collect_components(out);
                r.collect_components(out);
            }
        }
    }
}

impl fmt::Display for Process {
    /// Deterministic rendering; `parse` of the output yields the same AST.
    /// Parallel compositions are printed with `|`; a parenthesis is added
    /// around a left operand or a prefix continuation that is itself a
    /// composition, which is exactly what the right-associative parser needs
    /// to rebuild the original tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Inert => f.write_str("0"),
            Process::Prefix(act, cont) => {
                write!(f, "{act}.")?;
                match cont.as_ref() {
                    Process::Par(..) => write!(f, "({cont})"),
                    _ => write!(f, "{cont}"),
                }
            }
            Process::Par(l, r) => {
                match l.as_ref() {
                    Process::Par(..) => write!(f, "({l})")?,
                    _ => write!(f, "{l}")?,
                }
                write!(f, " | {r}")
            }
        }
    }
}

impl FromStr for Process {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Process::parse(s)
    }
}

/// One component of a canonical form: a prefix whose continuation is again
/// canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalPrefix {
    pub action: Action,
    pub continuation: CanonicalProcess,
}

impl CanonicalPrefix {
    /// The component as a plain process term.
    pub fn to_process(&self) -> Process {
        Process::prefix(self.action.clone(), self.continuation.to_process())
    }
}

impl fmt::Display for CanonicalPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.", self.action)?;
        if self.continuation.components().len() > 1 {
            write!(f, "({})", self.continuation)
        } else {
            write!(f, "{}", self.continuation)
        }
    }
}

/// Canonical form of a process: a multiset of prefix components, kept as a
/// list sorted lexicographically by printed form. The empty list is `0`.
/// Two processes are structurally congruent iff their canonical forms are
/// equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CanonicalProcess {
    components: Vec<CanonicalPrefix>,
}

impl CanonicalProcess {
    /// Sorts the given components into a canonical multiset.
    pub fn from_components(mut components: Vec<CanonicalPrefix>) -> Self {
        components.sort_by_cached_key(|c| c.to_string());
        CanonicalProcess { components }
    }

    pub fn components(&self) -> &[CanonicalPrefix] {
        &self.components
    }

    /// True for the canonical form of `0`.
    pub fn is_inert(&self) -> bool {
        self.components.is_empty()
    }

    /// Rebuilds a plain process term (right-associated composition).
    pub fn to_process(&self) -> Process {
        let mut iter = self.components.iter().rev();
        let Some(last) = iter.next() else {
            return Process::Inert;
        };
        iter.fold(last.to_process(), |acc, c| {
            Process::par(c.to_process(), acc)
        })
    }

    /// All names occurring in any component.
    pub fn names(&self) -> BTreeSet<Name> {
        self.to_process().names()
    }

    /// True if an action with this name and polarity occurs at any depth.
    pub fn occurs(&self, name: &Name, polarity: Polarity) -> bool {
        self.components.iter().any(|c| {
            (c.action.name == *name && c.action.polarity == polarity)
                || c.continuation.occurs(name, polarity)
        })
    }

    pub fn prefix_count(&self) -> usize {
        self.components
            .iter()
            .map(|c| 1 + c.continuation.prefix_count())
            .sum()
    }

    /// The canonical form built from a subset of this one's components.
    /// Indices must be strictly increasing, so order is preserved.
    pub fn select(&self, indices: &[usize]) -> CanonicalProcess {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        CanonicalProcess {
            components: indices
                .iter()
                .map(|&i| self.components[i].clone())
                .collect(),
        }
    }
}

impl fmt::Display for CanonicalProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return f.write_str("0");
        }
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Structural congruence, decided by canonical-form equality.
pub fn struct_eq(p: &Process, q: &Process) -> bool {
    p.canonical() == q.canonical()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Process {
        Process::parse(text).unwrap()
    }

    #[test]
    fn polarity_complement_is_involution() {
        assert_eq!(Polarity::In.co(), Polarity::Out);
        assert_eq!(Polarity::Out.co(), Polarity::In);
        assert_eq!(Polarity::In.co().co(), Polarity::In);
    }

    #[test]
    fn co_action_keeps_name() {
        let a = Action::input(Name::new("a").unwrap());
        assert_eq!(a.co().name, a.name);
        assert_eq!(a.co().polarity, Polarity::Out);
        assert_eq!(a.co().co(), a);
    }

    #[test]
    fn print_basic_forms() {
        assert_eq!(p("0").to_string(), "0");
        assert_eq!(p("~a.0").to_string(), "~a.0");
        assert_eq!(p("a.0 | ~a.0").to_string(), "a.0 | ~a.0");
    }

    #[test]
    fn print_preserves_association() {
        let left = Process::par(Process::par(p("a.0"), p("b.0")), p("c.0"));
        assert_eq!(left.to_string(), "(a.0 | b.0) | c.0");
        assert_eq!(p(&left.to_string()), left);

        let nested = p("a.(b.0 | c.0)");
        assert_eq!(nested.to_string(), "a.(b.0 | c.0)");
        assert_eq!(p(&nested.to_string()), nested);
    }

    #[test]
    fn canonical_drops_inert_and_flattens() {
        assert!(p("0 | 0").canonical().is_inert());
        let c = p("(a.0 | 0) | b.0").canonical();
        let printed: Vec<String> = c.components().iter().map(|x| x.to_string()).collect();
        assert_eq!(printed, vec!["a.0", "b.0"]);
    }

    #[test]
    fn canonical_sorts_example_components() {
        let c = p("a.b.0 | ~b.~c.0 | c.~a.0").canonical();
        let printed: Vec<String> = c.components().iter().map(|x| x.to_string()).collect();
        assert_eq!(printed, vec!["a.b.0", "c.~a.0", "~b.~c.0"]);
    }

    #[test]
    fn struct_eq_examples() {
        assert!(struct_eq(&p("a.0 | b.0"), &p("b.0 | a.0")));
        assert!(struct_eq(&p("a.0"), &p("a.0 | 0")));
        assert!(!struct_eq(&p("a.b.0"), &p("b.a.0")));
    }

    #[test]
    fn names_examples() {
        assert!(p("0").names().is_empty());
        let names: Vec<String> = p("a.b.0 | ~b.~c.0 | c.~a.0")
            .names()
            .into_iter()
            .map(|n| n.to_string())
            .collect();
        assert_eq!(names, vec!["a", "b", "c"]);
        assert_eq!(p("~a.0").names().len(), 1);
    }

    #[test]
    fn multiset_multiplicity_is_kept() {
        let c = p("a.0 | a.0").canonical();
        assert_eq!(c.components().len(), 2);
        assert!(!struct_eq(&p("a.0 | a.0"), &p("a.0")));
    }

    #[test]
    fn invalid_names_rejected() {
        assert!(Name::new("a_1").is_ok());
        assert!(Name::new("").is_err());
        assert!(Name::new("1a").is_err());
        assert!(Name::new("a-b").is_err());
    }
}
