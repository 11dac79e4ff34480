//! Constraint systems: the working state of the tableau.
//!
//! A system holds membership constraints `s : C`, role links `s P t`,
//! universal constraints `forall x. x : C` and separations `s != t` over
//! objects, which are either ABox individuals or variables. Variables are
//! numbered in creation order and that order is the variable ordering used
//! by blocking and by the rule strategy.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{
    collect_subconcepts, to_simple_form, Assertion, Concept, IndividualName, KnowledgeBase, Role, RoleName,
};

/// Name of the root individual injected when the ABox is empty.
pub const ROOT_INDIVIDUAL: &str = "__root";

/// An individual or a variable. Individuals sort before variables and
/// variables sort by creation index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Object {
    Ind(IndividualName),
    Var(u32),
}

impl Object {
    pub fn is_var(&self) -> bool {
        matches!(self, Object::Var(_))
    }

    pub fn ind(name: &str) -> Self {
        Object::Ind(IndividualName::new(name).expect("valid individual name"))
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Ind(a) => write!(f, "{a}"),
            Object::Var(i) => write!(f, "_v{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    Member(Object, Concept),
    RoleLink(Object, RoleName, Object),
    Universal(Concept),
    /// Stored with the smaller object first.
    Distinct(Object, Object),
}

impl Constraint {
    pub fn distinct(a: Object, b: Object) -> Self {
        if a <= b {
            Constraint::Distinct(a, b)
        } else {
            Constraint::Distinct(b, a)
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Member(s, c) => write!(f, "{s} : {c}"),
            Constraint::RoleLink(s, p, t) => write!(f, "{s} {p} {t}"),
            Constraint::Universal(c) => write!(f, "forall : {c}"),
            Constraint::Distinct(s, t) => write!(f, "{s} != {t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("only variables can be substituted, `{0}` is an individual")]
    SubstituteIndividual(Object),
    #[error("cannot substitute `{0}` by itself")]
    SelfSubstitution(Object),
    #[error("`{0}` and `{1}` are separated and cannot be identified")]
    Separated(Object, Object),
    #[error("concept `{0}` is not in simple form")]
    NotSimple(Concept),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemMetrics {
    /// Distinct concepts in the system, sub-expressions included.
    pub n_s: usize,
    pub variable_count: usize,
    pub non_blocked_count: usize,
}

static NO_CONCEPTS: BTreeSet<Concept> = BTreeSet::new();

#[derive(Debug, Clone, Default)]
pub struct ConstraintSystem {
    members: BTreeMap<Object, BTreeSet<Concept>>,
    // hash of the sorted member set, kept in step with `members` for variables
    fingerprints: BTreeMap<u32, u64>,
    // source -> target -> role names linking them
    links: BTreeMap<Object, BTreeMap<Object, BTreeSet<RoleName>>>,
    universals: BTreeSet<Concept>,
    distinct: BTreeSet<(Object, Object)>,
    objects: BTreeSet<Object>,
    next_var: u32,
    len: usize,
    source: Option<Arc<KnowledgeBase>>,
}

impl PartialEq for ConstraintSystem {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
            && self.links == other.links
            && self.universals == other.universals
            && self.distinct == other.distinct
    }
}

impl Eq for ConstraintSystem {}

impl ConstraintSystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a system from explicit constraints. Variables mentioned are
    /// registered so that fresh variables are created after them.
    pub fn from_constraints(cs: impl IntoIterator<Item = Constraint>) -> Result<Self, ConstraintError> {
        let mut s = ConstraintSystem::new();
        for c in cs {
            s.insert(c)?;
        }
        Ok(s)
    }

    /// The source knowledge base, when the system came from [`translate_kb`].
    pub fn source(&self) -> Option<&KnowledgeBase> {
        self.source.as_deref()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, c: Constraint) -> Result<bool, ConstraintError> {
        Ok(match c {
            Constraint::Member(s, c) => {
                if !c.is_simple() {
                    return Err(ConstraintError::NotSimple(c));
                }
                self.add_member(s, c)
            }
            Constraint::RoleLink(s, p, t) => self.add_link(s, p, t),
            Constraint::Universal(c) => {
                if !c.is_simple() {
                    return Err(ConstraintError::NotSimple(c));
                }
                self.add_universal(c)
            }
            Constraint::Distinct(s, t) => self.add_distinct(s, t),
        })
    }

    fn note_object(&mut self, o: &Object) {
        if let Object::Var(i) = o {
            self.next_var = self.next_var.max(i + 1);
        }
        if !self.objects.contains(o) {
            self.objects.insert(o.clone());
        }
    }

    fn refresh_fingerprint(&mut self, o: &Object) {
        if let Object::Var(i) = o {
            let mut h = DefaultHasher::new();
            self.members.get(o).unwrap_or(&NO_CONCEPTS).hash(&mut h);
            self.fingerprints.insert(*i, h.finish());
        }
    }

    pub(crate) fn add_member(&mut self, s: Object, c: Concept) -> bool {
        self.note_object(&s);
        let added = self.members.entry(s.clone()).or_default().insert(c);
        if added {
            self.len += 1;
            self.refresh_fingerprint(&s);
        }
        added
    }

    pub(crate) fn add_link(&mut self, s: Object, p: RoleName, t: Object) -> bool {
        self.note_object(&s);
        self.note_object(&t);
        let added = self.links.entry(s).or_default().entry(t).or_default().insert(p);
        if added {
            self.len += 1;
        }
        added
    }

    pub(crate) fn add_universal(&mut self, c: Concept) -> bool {
        let added = self.universals.insert(c);
        if added {
            self.len += 1;
        }
        added
    }

    pub(crate) fn add_distinct(&mut self, s: Object, t: Object) -> bool {
        self.note_object(&s);
        self.note_object(&t);
        let key = if s <= t { (s, t) } else { (t, s) };
        let added = self.distinct.insert(key);
        if added {
            self.len += 1;
        }
        added
    }

    /// Allocates a variable that is larger than every variable seen so far.
    pub(crate) fn fresh_var(&mut self) -> Object {
        let v = Object::Var(self.next_var);
        self.next_var += 1;
        v
    }

    /// Number of variables ever allocated in this system's history.
    pub fn allocated_vars(&self) -> u32 {
        self.next_var
    }

    pub fn contains(&self, c: &Constraint) -> bool {
        match c {
            Constraint::Member(s, c) => self.has_member(s, c),
            Constraint::RoleLink(s, p, t) => self
                .links
                .get(s)
                .and_then(|m| m.get(t))
                .is_some_and(|ps| ps.contains(p)),
            Constraint::Universal(c) => self.universals.contains(c),
            Constraint::Distinct(s, t) => self.separated(s, t),
        }
    }

    pub fn has_member(&self, s: &Object, c: &Concept) -> bool {
        self.members.get(s).is_some_and(|cs| cs.contains(c))
    }

    /// Objects occurring in the system, individuals first, then variables in
    /// creation order.
    pub fn objects(&self) -> &BTreeSet<Object> {
        &self.objects
    }

    pub fn variables(&self) -> impl Iterator<Item = &Object> + '_ {
        self.objects.iter().filter(|o| o.is_var())
    }

    pub fn universals(&self) -> &BTreeSet<Concept> {
        &self.universals
    }

    /// The concepts `C` with `o : C` in the system.
    pub fn sigma(&self, o: &Object) -> &BTreeSet<Concept> {
        self.members.get(o).unwrap_or(&NO_CONCEPTS)
    }

    /// Two variables are equivalent iff they carry the same concepts.
    pub fn s_equivalent(&self, x: &Object, y: &Object) -> bool {
        if let (Object::Var(i), Object::Var(j)) = (x, y) {
            if let (Some(a), Some(b)) = (self.fingerprints.get(i), self.fingerprints.get(j)) {
                if a != b {
                    return false;
                }
            }
        }
        self.sigma(x) == self.sigma(y)
    }

    /// Targets of role links leaving `o`, with the role names of each link.
    pub fn direct_successors(&self, o: &Object) -> impl Iterator<Item = (&Object, &BTreeSet<RoleName>)> + '_ {
        self.links.get(o).into_iter().flat_map(|m| m.iter())
    }

    pub fn has_successors(&self, o: &Object) -> bool {
        self.links.get(o).is_some_and(|m| !m.is_empty())
    }

    /// Objects `t` such that `o P t` holds for every name `P` of `r`.
    pub fn r_successors(&self, o: &Object, r: &Role) -> Vec<Object> {
        self.direct_successors(o)
            .filter(|(_, ps)| r.names().is_subset(ps))
            .map(|(t, _)| t.clone())
            .collect()
    }

    pub fn separated(&self, a: &Object, b: &Object) -> bool {
        let key = if a <= b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        self.distinct.contains(&key)
    }

    /// Replaces every occurrence of variable `y` by `t`.
    pub fn substitute(&self, y: &Object, t: &Object) -> Result<ConstraintSystem, ConstraintError> {
        let mut s = self.clone();
        s.substitute_in_place(y, t)?;
        Ok(s)
    }

    pub(crate) fn substitute_in_place(&mut self, y: &Object, t: &Object) -> Result<(), ConstraintError> {
        if !y.is_var() {
            return Err(ConstraintError::SubstituteIndividual(y.clone()));
        }
        if y == t {
            return Err(ConstraintError::SelfSubstitution(y.clone()));
        }
        if self.separated(y, t) {
            return Err(ConstraintError::Separated(y.clone(), t.clone()));
        }
        if !self.objects.contains(y) {
            return Ok(());
        }
        let rename = |o: &Object| if o == y { t.clone() } else { o.clone() };

        let members = std::mem::take(&mut self.members);
        let links = std::mem::take(&mut self.links);
        let distinct = std::mem::take(&mut self.distinct);
        let universals = std::mem::take(&mut self.universals);
        self.objects.clear();
        self.fingerprints.clear();
        self.len = 0;

        for c in universals {
            self.add_universal(c);
        }
        for (s, cs) in members {
            let s = rename(&s);
            for c in cs {
                self.add_member(s.clone(), c);
            }
        }
        for (s, targets) in links {
            let s = rename(&s);
            for (t2, ps) in targets {
                let t2 = rename(&t2);
                for p in ps {
                    self.add_link(s.clone(), p, t2.clone());
                }
            }
        }
        for (a, b) in distinct {
            self.add_distinct(rename(&a), rename(&b));
        }
        // objects that only ever appeared in substituted constraints are gone;
        // every variable still present gets a fingerprint
        let vars: Vec<Object> = self.variables().cloned().collect();
        for v in vars {
            if !self.members.contains_key(&v) {
                self.refresh_fingerprint(&v);
            }
        }
        Ok(())
    }

    /// The least variable `w` before `x` with the same concepts, if any.
    pub fn witness(&self, x: &Object) -> Option<Object> {
        if !x.is_var() {
            return None;
        }
        self.variables()
            .take_while(|w| *w < x)
            .find(|w| self.s_equivalent(w, x))
            .cloned()
    }

    pub fn is_blocked(&self, x: &Object) -> bool {
        self.witness(x).is_some()
    }

    /// Number of variables without a witness.
    pub fn non_blocked_count(&self) -> usize {
        let mut classes: BTreeSet<&BTreeSet<Concept>> = BTreeSet::new();
        self.variables().filter(|v| classes.insert(self.sigma(v))).count()
    }

    pub fn measure(&self) -> SystemMetrics {
        let mut concepts = BTreeSet::new();
        for cs in self.members.values() {
            for c in cs {
                collect_subconcepts(c, &mut concepts);
            }
        }
        for c in &self.universals {
            collect_subconcepts(c, &mut concepts);
        }
        SystemMetrics {
            n_s: concepts.len(),
            variable_count: self.variables().count(),
            non_blocked_count: self.non_blocked_count(),
        }
    }

    /// All constraints, in canonical order.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut out = Vec::with_capacity(self.len);
        for c in &self.universals {
            out.push(Constraint::Universal(c.clone()));
        }
        for (s, cs) in &self.members {
            out.extend(cs.iter().map(|c| Constraint::Member(s.clone(), c.clone())));
        }
        for (s, targets) in &self.links {
            for (t, ps) in targets {
                out.extend(ps.iter().map(|p| Constraint::RoleLink(s.clone(), p.clone(), t.clone())));
            }
        }
        for (a, b) in &self.distinct {
            out.push(Constraint::Distinct(a.clone(), b.clone()));
        }
        out
    }

    /// One constraint per line, lines sorted.
    pub fn dump(&self) -> String {
        let mut lines: Vec<String> = self.constraints().iter().map(|c| c.to_string()).collect();
        lines.sort();
        let mut out = lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }
}

/// Translates a knowledge base into its initial constraint system.
///
/// An empty ABox gets a single root individual asserted to `TOP`, so that
/// the universal constraints have an object to act on.
pub fn translate_kb(kb: &KnowledgeBase) -> ConstraintSystem {
    let mut s = ConstraintSystem::new();
    for inc in &kb.tbox {
        let c = to_simple_form(&Concept::or(Concept::not(inc.lhs.clone()), inc.rhs.clone()));
        s.add_universal(c);
    }
    for a in &kb.abox {
        match a {
            Assertion::ConceptMember(i, c) => {
                s.add_member(Object::Ind(i.clone()), to_simple_form(c));
            }
            Assertion::RoleMember(i, j, r) => {
                for p in r.names() {
                    s.add_link(Object::Ind(i.clone()), p.clone(), Object::Ind(j.clone()));
                }
            }
        }
    }
    let individuals: Vec<_> = kb.individuals().into_iter().collect();
    for (n, a) in individuals.iter().enumerate() {
        for b in &individuals[n + 1..] {
            s.add_distinct(Object::Ind(a.clone()), Object::Ind(b.clone()));
        }
    }
    if individuals.is_empty() {
        s.add_member(Object::ind(ROOT_INDIVIDUAL), Concept::Top);
    }
    s.source = Some(Arc::new(kb.clone()));
    s
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::parser::{parse_concept, parse_kb};

    pub(crate) const EXAMPLE_33: &str = "(implies Italian (some FRIEND Italian)) (related peter susan FRIEND) \
        (instance peter (all FRIEND (not Italian))) (instance susan (some FRIEND Italian))";

    fn c(s: &str) -> Concept {
        parse_concept(s).unwrap()
    }

    fn role(s: &str) -> Role {
        Role::atomic(RoleName::new(s).unwrap())
    }

    /// The completed system from the worked friendship example, with x and y
    /// as variables 0 and 1.
    pub(crate) fn example_33_s10() -> ConstraintSystem {
        let mut s = translate_kb(&parse_kb(EXAMPLE_33).unwrap());
        let (peter, susan, x, y) = (
            Object::ind("peter"),
            Object::ind("susan"),
            Object::Var(0),
            Object::Var(1),
        );
        let gci = c("(or (not Italian) (some FRIEND Italian))");
        let friend = RoleName::new("FRIEND").unwrap();
        s.add_member(susan.clone(), c("(not Italian)"));
        s.add_member(peter.clone(), gci.clone());
        s.add_member(susan.clone(), gci.clone());
        s.add_member(peter, c("(not Italian)"));
        s.add_link(susan, friend.clone(), x.clone());
        s.add_member(x.clone(), c("Italian"));
        s.add_member(x.clone(), gci.clone());
        s.add_member(x.clone(), c("(some FRIEND Italian)"));
        s.add_link(x, friend, y.clone());
        s.add_member(y.clone(), c("Italian"));
        s.add_member(y.clone(), gci);
        s.add_member(y, c("(some FRIEND Italian)"));
        s
    }

    #[test]
    fn translate_example_33() {
        let s = translate_kb(&parse_kb(EXAMPLE_33).unwrap());
        let expected = ConstraintSystem::from_constraints([
            Constraint::Universal(c("(or (not Italian) (some FRIEND Italian))")),
            Constraint::RoleLink(
                Object::ind("peter"),
                RoleName::new("FRIEND").unwrap(),
                Object::ind("susan"),
            ),
            Constraint::Member(Object::ind("peter"), c("(all FRIEND (not Italian))")),
            Constraint::Member(Object::ind("susan"), c("(some FRIEND Italian)")),
            Constraint::distinct(Object::ind("susan"), Object::ind("peter")),
        ])
        .unwrap();
        assert_eq!(s, expected);
        assert_eq!(s.len(), 5);
        assert_eq!(s.measure().n_s, 5);
    }

    #[test]
    fn translate_example_21() {
        let s = translate_kb(&parse_kb(crate::semantics::tests::EXAMPLE_21).unwrap());
        assert!(s.separated(&Object::ind("john"), &Object::ind("cs156")));
        assert!(s.contains(&Constraint::RoleLink(
            Object::ind("john"),
            RoleName::new("TEACHES").unwrap(),
            Object::ind("cs156")
        )));
        assert_eq!(s.universals().len(), 4);
    }

    #[test]
    fn translate_empty_abox() {
        let s = translate_kb(&parse_kb("(implies A B)").unwrap());
        let expected = ConstraintSystem::from_constraints([
            Constraint::Universal(c("(or (not A) B)")),
            Constraint::Member(Object::ind(ROOT_INDIVIDUAL), Concept::Top),
        ])
        .unwrap();
        assert_eq!(s, expected);
    }

    #[test]
    fn sigma_and_equivalence() {
        let s = example_33_s10();
        let expected: BTreeSet<_> = [
            c("Italian"),
            c("(or (not Italian) (some FRIEND Italian))"),
            c("(some FRIEND Italian)"),
        ]
        .into_iter()
        .collect();
        assert_eq!(s.sigma(&Object::Var(0)), &expected);
        assert_eq!(s.sigma(&Object::Var(1)), &expected);
        assert!(s.sigma(&Object::Var(7)).is_empty());
        assert!(s.s_equivalent(&Object::Var(0), &Object::Var(1)));
        assert!(s.s_equivalent(&Object::Var(0), &Object::Var(0)));
    }

    #[test]
    fn single_variable_has_no_equivalent_partner() {
        // the system right after the first existential expansion
        let mut s = translate_kb(&parse_kb(EXAMPLE_33).unwrap());
        s.add_link(Object::ind("susan"), RoleName::new("FRIEND").unwrap(), Object::Var(0));
        s.add_member(Object::Var(0), c("Italian"));
        let vars: Vec<_> = s.variables().cloned().collect();
        assert_eq!(vars.len(), 1);
        assert_eq!(s.witness(&Object::Var(0)), None);
    }

    #[test]
    fn successors() {
        let s = example_33_s10();
        assert_eq!(
            s.r_successors(&Object::ind("peter"), &role("FRIEND")),
            vec![Object::ind("susan")]
        );
        assert_eq!(s.r_successors(&Object::Var(0), &role("FRIEND")), vec![Object::Var(1)]);
        let mut t = ConstraintSystem::new();
        t.add_link(Object::ind("s"), RoleName::new("P").unwrap(), Object::ind("t"));
        let pq = Role::new([RoleName::new("P").unwrap(), RoleName::new("Q").unwrap()]).unwrap();
        assert!(t.r_successors(&Object::ind("s"), &pq).is_empty());
    }

    #[test]
    fn separation() {
        let s = translate_kb(&parse_kb(EXAMPLE_33).unwrap());
        assert!(s.separated(&Object::ind("peter"), &Object::ind("susan")));
        assert!(s.separated(&Object::ind("susan"), &Object::ind("peter")));
        assert!(!s.separated(&Object::Var(0), &Object::Var(1)));
    }

    #[test]
    fn substitution() {
        let (x, y, t) = (Object::Var(0), Object::Var(1), Object::Var(2));
        let p = RoleName::new("P").unwrap();
        let s = ConstraintSystem::from_constraints([
            Constraint::Member(y.clone(), c("A")),
            Constraint::RoleLink(x.clone(), p.clone(), y.clone()),
            Constraint::RoleLink(x.clone(), p.clone(), t.clone()),
            Constraint::Member(t.clone(), c("A")),
        ])
        .unwrap();
        let once = s.substitute(&y, &t).unwrap();
        let expected = ConstraintSystem::from_constraints([
            Constraint::Member(t.clone(), c("A")),
            Constraint::RoleLink(x.clone(), p, t.clone()),
        ])
        .unwrap();
        assert_eq!(once, expected);
        assert_eq!(once.len(), 2);
        assert!(!once.objects().contains(&y));
        assert_eq!(once.substitute(&y, &t).unwrap(), once);
        assert!(s.substitute(&Object::ind("a"), &t).is_err());
        assert!(s.substitute(&y, &y).is_err());
    }

    #[test]
    fn witnesses() {
        let s = example_33_s10();
        assert_eq!(s.witness(&Object::Var(1)), Some(Object::Var(0)));
        assert_eq!(s.witness(&Object::Var(0)), None);
        assert_eq!(s.witness(&Object::ind("peter")), None);
        let m = s.measure();
        assert_eq!(m.variable_count, 2);
        assert_eq!(m.non_blocked_count, 1);
        assert_eq!(ConstraintSystem::new().measure().n_s, 0);
    }

    #[test]
    fn dump_format() {
        let s = translate_kb(&parse_kb(EXAMPLE_33).unwrap());
        assert_eq!(
            s.dump(),
            "forall : (or (not Italian) (some FRIEND Italian))\n\
             peter != susan\n\
             peter : (all FRIEND (not Italian))\n\
             peter FRIEND susan\n\
             susan : (some FRIEND Italian)\n"
        );
    }

    #[test]
    fn members_must_be_simple() {
        assert!(
            ConstraintSystem::from_constraints([Constraint::Member(Object::ind("a"), c("(not (not A))"))]).is_err()
        );
    }
}
