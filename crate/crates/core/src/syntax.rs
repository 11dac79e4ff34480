//! ALCNR abstract syntax, the knowledge-base data model, the s-expression
//! exchange format and the simple-form (negation normal form) rewriter.
//!
//! Concepts are plain values with structural equality and a total order, so
//! every collection of them downstream can be a `BTreeSet` and iteration is
//! deterministic.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Individual name reserved for the fresh individual used by the
/// reasoning-service reductions. The parser rejects it in user input.
pub const RESERVED_INDIVIDUAL: &str = "__fresh";

/// Default cap on numbers appearing in number restrictions.
pub const DEFAULT_NUMBER_CAP: u64 = 1 << 20;

fn valid_token(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '\'')
}

macro_rules! name_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            /// Builds a name, rejecting empty tokens and characters outside
            /// letters, digits, `_`, `-` and `'`.
            pub fn new(s: impl Into<String>) -> Result<Self, SyntaxError> {
                let s = s.into();
                if valid_token(&s) {
                    Ok(Self(s))
                } else {
                    Err(SyntaxError::InvalidName(s))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl std::str::FromStr for $name {
            type Err = SyntaxError;

            fn from_str(s: &str) -> Result<Self, SyntaxError> {
                Self::new(s)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

name_type!(
    /// Name of an atomic concept.
    ConceptName
);
name_type!(
    /// Name of an atomic role.
    RoleName
);
name_type!(
    /// Name of an ABox individual.
    IndividualName
);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("invalid name token `{0}`")]
    InvalidName(String),
    #[error("a role needs at least one role name")]
    EmptyRole,
}

/// A role: the conjunction of a nonempty set of role names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Role(BTreeSet<RoleName>);

impl Role {
    pub fn new(names: impl IntoIterator<Item = RoleName>) -> Result<Self, SyntaxError> {
        let names: BTreeSet<_> = names.into_iter().collect();
        if names.is_empty() {
            return Err(SyntaxError::EmptyRole);
        }
        Ok(Role(names))
    }

    pub fn atomic(name: RoleName) -> Self {
        Role(BTreeSet::from([name]))
    }

    /// Role names in lexicographic order.
    pub fn names(&self) -> &BTreeSet<RoleName> {
        &self.0
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.len() == 1 {
            write!(f, "{}", self.0.iter().next().unwrap())
        } else {
            f.write_str("(and")?;
            for n in &self.0 {
                write!(f, " {n}")?;
            }
            f.write_str(")")
        }
    }
}

/// An ALCNR concept expression.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Top,
    Bottom,
    Name(ConceptName),
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    All(Role, Box<Concept>),
    Some(Role, Box<Concept>),
    AtLeast(u64, Role),
    AtMost(u64, Role),
}

impl Concept {
    pub fn name(s: &str) -> Self {
        Concept::Name(ConceptName::new(s).expect("valid concept name"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Self {
        Concept::Not(Box::new(c))
    }

    pub fn and(a: Concept, b: Concept) -> Self {
        Concept::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Concept, b: Concept) -> Self {
        Concept::Or(Box::new(a), Box::new(b))
    }

    pub fn all(r: Role, c: Concept) -> Self {
        Concept::All(r, Box::new(c))
    }

    pub fn some(r: Role, c: Concept) -> Self {
        Concept::Some(r, Box::new(c))
    }

    /// True iff every complement in the expression wraps a concept name.
    pub fn is_simple(&self) -> bool {
        match self {
            Concept::Top | Concept::Bottom | Concept::Name(_) => true,
            Concept::Not(inner) => matches!(**inner, Concept::Name(_)),
            Concept::And(a, b) | Concept::Or(a, b) => a.is_simple() && b.is_simple(),
            Concept::All(_, c) | Concept::Some(_, c) => c.is_simple(),
            Concept::AtLeast(..) | Concept::AtMost(..) => true,
        }
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        match self {
            Concept::Top | Concept::Bottom | Concept::Name(_) => 1,
            Concept::AtLeast(..) | Concept::AtMost(..) => 1,
            Concept::Not(c) | Concept::All(_, c) | Concept::Some(_, c) => 1 + c.size(),
            Concept::And(a, b) | Concept::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn concept_names(&self, out: &mut BTreeSet<ConceptName>) {
        match self {
            Concept::Top | Concept::Bottom | Concept::AtLeast(..) | Concept::AtMost(..) => {}
            Concept::Name(n) => {
                out.insert(n.clone());
            }
            Concept::Not(c) | Concept::All(_, c) | Concept::Some(_, c) => c.concept_names(out),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.concept_names(out);
                b.concept_names(out);
            }
        }
    }

    pub fn role_names(&self, out: &mut BTreeSet<RoleName>) {
        match self {
            Concept::Top | Concept::Bottom | Concept::Name(_) => {}
            Concept::AtLeast(_, r) | Concept::AtMost(_, r) => out.extend(r.names().iter().cloned()),
            Concept::All(r, c) | Concept::Some(r, c) => {
                out.extend(r.names().iter().cloned());
                c.role_names(out);
            }
            Concept::Not(c) => c.role_names(out),
            Concept::And(a, b) | Concept::Or(a, b) => {
                a.role_names(out);
                b.role_names(out);
            }
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Top => f.write_str("TOP"),
            Concept::Bottom => f.write_str("BOTTOM"),
            Concept::Name(n) => write!(f, "{n}"),
            Concept::Not(c) => write!(f, "(not {c})"),
            Concept::And(..) => write_nary(f, "and", self),
            Concept::Or(..) => write_nary(f, "or", self),
            Concept::All(r, c) => write!(f, "(all {r} {c})"),
            Concept::Some(r, c) => write!(f, "(some {r} {c})"),
            Concept::AtLeast(n, r) => write!(f, "(atleast {n} {r})"),
            Concept::AtMost(n, r) => write!(f, "(atmost {n} {r})"),
        }
    }
}

// Left-nested chains of the same connective print as one n-ary form, which is
// exactly what the parser folds back.
fn write_nary(f: &mut fmt::Formatter<'_>, op: &str, c: &Concept) -> fmt::Result {
    let mut parts = Vec::new();
    let mut cur = c;
    loop {
        match (op, cur) {
            ("and", Concept::And(a, b)) | ("or", Concept::Or(a, b)) => {
                parts.push(&**b);
                cur = a;
            }
            _ => {
                parts.push(cur);
                break;
            }
        }
    }
    write!(f, "({op}")?;
    for p in parts.iter().rev() {
        write!(f, " {p}")?;
    }
    f.write_str(")")
}

/// General concept inclusion `lhs ⊑ rhs`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Inclusion {
    pub lhs: Concept,
    pub rhs: Concept,
}

impl Inclusion {
    pub fn new(lhs: Concept, rhs: Concept) -> Self {
        Inclusion { lhs, rhs }
    }
}

/// ABox membership assertion.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Assertion {
    ConceptMember(IndividualName, Concept),
    RoleMember(IndividualName, IndividualName, Role),
}

/// A knowledge base: TBox of inclusions and ABox of assertions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct KnowledgeBase {
    pub tbox: BTreeSet<Inclusion>,
    pub abox: BTreeSet<Assertion>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_inclusion(mut self, lhs: Concept, rhs: Concept) -> Self {
        self.tbox.insert(Inclusion::new(lhs, rhs));
        self
    }

    pub fn with_instance(mut self, a: &str, c: Concept) -> Self {
        let a = IndividualName::new(a).expect("valid individual name");
        self.abox.insert(Assertion::ConceptMember(a, c));
        self
    }

    pub fn with_related(mut self, a: &str, b: &str, r: Role) -> Self {
        let a = IndividualName::new(a).expect("valid individual name");
        let b = IndividualName::new(b).expect("valid individual name");
        self.abox.insert(Assertion::RoleMember(a, b, r));
        self
    }

    /// The individual names occurring in the ABox.
    pub fn individuals(&self) -> BTreeSet<IndividualName> {
        let mut out = BTreeSet::new();
        for a in &self.abox {
            match a {
                Assertion::ConceptMember(i, _) => {
                    out.insert(i.clone());
                }
                Assertion::RoleMember(i, j, _) => {
                    out.insert(i.clone());
                    out.insert(j.clone());
                }
            }
        }
        out
    }

    pub fn concept_names(&self) -> BTreeSet<ConceptName> {
        let mut out = BTreeSet::new();
        for inc in &self.tbox {
            inc.lhs.concept_names(&mut out);
            inc.rhs.concept_names(&mut out);
        }
        for a in &self.abox {
            if let Assertion::ConceptMember(_, c) = a {
                c.concept_names(&mut out);
            }
        }
        out
    }

    pub fn role_names(&self) -> BTreeSet<RoleName> {
        let mut out = BTreeSet::new();
        for inc in &self.tbox {
            inc.lhs.role_names(&mut out);
            inc.rhs.role_names(&mut out);
        }
        for a in &self.abox {
            match a {
                Assertion::ConceptMember(_, c) => c.role_names(&mut out),
                Assertion::RoleMember(_, _, r) => out.extend(r.names().iter().cloned()),
            }
        }
        out
    }

    /// Total number of constructor nodes over all statements.
    pub fn size(&self) -> usize {
        let t: usize = self.tbox.iter().map(|i| i.lhs.size() + i.rhs.size()).sum();
        let a: usize = self
            .abox
            .iter()
            .map(|a| match a {
                Assertion::ConceptMember(_, c) => 1 + c.size(),
                Assertion::RoleMember(_, _, r) => 2 + r.names().len(),
            })
            .sum();
        t + a
    }
}

/// Rewrites a concept into simple form: complements only in front of concept
/// names. The result is equivalent and at most linearly larger.
pub fn to_simple_form(c: &Concept) -> Concept {
    simple(c, false)
}

fn simple(c: &Concept, negated: bool) -> Concept {
    use Concept::*;
    match (c, negated) {
        (Top, false) | (Bottom, true) => Top,
        (Top, true) | (Bottom, false) => Bottom,
        (Name(_), false) => c.clone(),
        (Name(_), true) => Concept::not(c.clone()),
        (Not(inner), n) => simple(inner, !n),
        (And(a, b), false) => Concept::and(simple(a, false), simple(b, false)),
        (And(a, b), true) => Concept::or(simple(a, true), simple(b, true)),
        (Or(a, b), false) => Concept::or(simple(a, false), simple(b, false)),
        (Or(a, b), true) => Concept::and(simple(a, true), simple(b, true)),
        (All(r, d), false) => Concept::all(r.clone(), simple(d, false)),
        (All(r, d), true) => Concept::some(r.clone(), simple(d, true)),
        (Some(r, d), false) => Concept::some(r.clone(), simple(d, false)),
        (Some(r, d), true) => Concept::all(r.clone(), simple(d, true)),
        (AtLeast(..), false) | (AtMost(..), false) => c.clone(),
        (AtLeast(0, _), true) => Bottom,
        (AtLeast(n, r), true) => AtMost(n - 1, r.clone()),
        (AtMost(n, r), true) => match n.checked_add(1) {
            Option::Some(m) => AtLeast(m, r.clone()),
            // nothing has more than u64::MAX successors in a finite model
            None => Bottom,
        },
    }
}

/// All sub-expressions of `c`, including `c` itself.
pub fn subconcepts(c: &Concept) -> BTreeSet<Concept> {
    let mut out = BTreeSet::new();
    collect_subconcepts(c, &mut out);
    out
}

pub(crate) fn collect_subconcepts(c: &Concept, out: &mut BTreeSet<Concept>) {
    if !out.insert(c.clone()) {
        return;
    }
    match c {
        Concept::Not(d) | Concept::All(_, d) | Concept::Some(_, d) => collect_subconcepts(d, out),
        Concept::And(a, b) | Concept::Or(a, b) => {
            collect_subconcepts(a, out);
            collect_subconcepts(b, out);
        }
        _ => {}
    }
}

/// Renders a KB in the exchange format, one statement per line: inclusions
/// first, then assertions, each group in canonical order.
pub fn render_kb(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    for inc in &kb.tbox {
        out.push_str(&format!("(implies {} {})\n", inc.lhs, inc.rhs));
    }
    for a in &kb.abox {
        match a {
            Assertion::ConceptMember(i, c) => out.push_str(&format!("(instance {i} {c})\n")),
            Assertion::RoleMember(i, j, r) => out.push_str(&format!("(related {i} {j} {r})\n")),
        }
    }
    out
}

pub use crate::parser::{parse_concept, parse_kb, parse_kb_with, ParseError, ParseErrorKind, ParseOptions};

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Concept {
        Concept::name(s)
    }

    fn role(s: &str) -> Role {
        Role::atomic(RoleName::new(s).unwrap())
    }

    #[test]
    fn de_morgan() {
        let c = Concept::not(Concept::and(n("Student"), n("Prof")));
        assert_eq!(
            to_simple_form(&c),
            Concept::or(Concept::not(n("Student")), Concept::not(n("Prof")))
        );
    }

    #[test]
    fn quantifier_duality() {
        let c = Concept::not(Concept::some(role("FRIEND"), n("Italian")));
        assert_eq!(
            to_simple_form(&c),
            Concept::all(role("FRIEND"), Concept::not(n("Italian")))
        );
    }

    #[test]
    fn number_restriction_complements() {
        let c = Concept::not(Concept::AtMost(1, role("DEGREE")));
        assert_eq!(to_simple_form(&c), Concept::AtLeast(2, role("DEGREE")));
        let c = Concept::not(Concept::AtLeast(0, role("R")));
        assert_eq!(to_simple_form(&c), Concept::Bottom);
        let c = Concept::not(Concept::AtLeast(3, role("R")));
        assert_eq!(to_simple_form(&c), Concept::AtMost(2, role("R")));
        assert_eq!(to_simple_form(&Concept::not(Concept::Top)), Concept::Bottom);
        assert_eq!(to_simple_form(&Concept::not(Concept::Bottom)), Concept::Top);
        let huge = Concept::not(Concept::AtMost(u64::MAX, role("R")));
        assert_eq!(to_simple_form(&huge), Concept::Bottom);
    }

    #[test]
    fn simple_form_idempotent_on_simple() {
        let c = Concept::or(
            Concept::not(n("A")),
            Concept::all(role("R"), Concept::AtLeast(0, role("R"))),
        );
        assert!(c.is_simple());
        assert_eq!(to_simple_form(&c), c);
    }

    #[test]
    fn subconcepts_examples() {
        let c = Concept::some(role("FRIEND"), n("Italian"));
        assert_eq!(subconcepts(&c), BTreeSet::from([c.clone(), n("Italian")]));
        assert_eq!(subconcepts(&Concept::Top), BTreeSet::from([Concept::Top]));
        // hand-enumerated: the whole, (not Italian), Italian, (some FRIEND Italian)
        let c = Concept::or(Concept::not(n("Italian")), Concept::some(role("FRIEND"), n("Italian")));
        let subs = subconcepts(&c);
        assert_eq!(subs.len(), 4);
        assert!(subs.contains(&Concept::not(n("Italian"))));
    }

    #[test]
    fn role_rendering_is_sorted() {
        let r = Role::new([RoleName::new("CHILD").unwrap(), RoleName::new("ADOPTEDCHILD'").unwrap()]).unwrap();
        assert_eq!(r.to_string(), "(and ADOPTEDCHILD' CHILD)");
        assert!(Role::new([]).is_err());
    }

    #[test]
    fn nary_rendering_folds_left_spine_only() {
        let c = Concept::and(Concept::and(n("A"), n("B")), n("C"));
        assert_eq!(c.to_string(), "(and A B C)");
        let c = Concept::and(n("A"), Concept::and(n("B"), n("C")));
        assert_eq!(c.to_string(), "(and A (and B C))");
    }

    #[test]
    fn name_validation() {
        assert!(ConceptName::new("").is_err());
        assert!(ConceptName::new("a b").is_err());
        assert!(ConceptName::new("cs-156_x'").is_ok());
    }
}
