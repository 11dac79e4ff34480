//! Finite interpretations, the set-theoretic extension function, model
//! checking, and the model text format.
//!
//! The brute-force model finder used as a test oracle lives in
//! [`crate::oracle`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::syntax::{Assertion, Concept, ConceptName, IndividualName, KnowledgeBase, Role, RoleName};

/// Index of a domain element.
pub type Element = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("an interpretation needs a nonempty domain")]
    EmptyDomain,
    #[error("duplicate element label `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("individuals `{0}` and `{1}` map to the same element (unique name assumption)")]
    NotInjective(String, String),
    #[error("individual `{0}` has no element assigned")]
    MissingIndividual(String),
    #[error("model text line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("domain bound {max} is smaller than the {individuals} individuals of the knowledge base")]
    BoundTooSmall { max: usize, individuals: usize },
}

/// A finite interpretation. Elements are indices into a labelled domain;
/// names absent from the extension maps denote the empty set/relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpretation {
    labels: Vec<String>,
    concepts: BTreeMap<ConceptName, BTreeSet<Element>>,
    roles: BTreeMap<RoleName, BTreeSet<(Element, Element)>>,
    individuals: BTreeMap<IndividualName, Element>,
}

impl Interpretation {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>) -> Result<Self, SemanticsError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(SemanticsError::EmptyDomain);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(SemanticsError::DuplicateElement(l.clone()));
            }
        }
        Ok(Interpretation {
            labels,
            concepts: BTreeMap::new(),
            roles: BTreeMap::new(),
            individuals: BTreeMap::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn domain(&self) -> BTreeSet<Element> {
        (0..self.labels.len()).collect()
    }

    pub fn label(&self, e: Element) -> &str {
        &self.labels[e]
    }

    pub fn element(&self, label: &str) -> Option<Element> {
        self.labels.iter().position(|l| l == label)
    }

    /// Maps an individual to an element, keeping the map injective.
    pub fn assign(&mut self, a: IndividualName, e: Element) -> Result<(), SemanticsError> {
        if e >= self.labels.len() {
            return Err(SemanticsError::UnknownElement(e.to_string()));
        }
        if let Some((other, _)) = self.individuals.iter().find(|(n, &x)| x == e && **n != a) {
            return Err(SemanticsError::NotInjective(other.to_string(), a.to_string()));
        }
        self.individuals.insert(a, e);
        Ok(())
    }

    pub fn add_concept_member(&mut self, a: ConceptName, e: Element) {
        assert!(e < self.labels.len(), "element out of range");
        self.concepts.entry(a).or_default().insert(e);
    }

    /// Declares a concept name with the given extension (possibly empty).
    pub fn set_concept(&mut self, a: ConceptName, ext: impl IntoIterator<Item = Element>) {
        let ext: BTreeSet<_> = ext.into_iter().collect();
        assert!(ext.iter().all(|&e| e < self.labels.len()), "element out of range");
        self.concepts.insert(a, ext);
    }

    pub fn add_role_pair(&mut self, p: RoleName, from: Element, to: Element) {
        assert!(
            from < self.labels.len() && to < self.labels.len(),
            "element out of range"
        );
        self.roles.entry(p).or_default().insert((from, to));
    }

    pub fn set_role(&mut self, p: RoleName, ext: impl IntoIterator<Item = (Element, Element)>) {
        let ext: BTreeSet<_> = ext.into_iter().collect();
        assert!(ext.iter().all(|&(a, b)| a < self.labels.len() && b < self.labels.len()));
        self.roles.insert(p, ext);
    }

    pub fn individual(&self, a: &IndividualName) -> Option<Element> {
        self.individuals.get(a).copied()
    }

    pub fn individuals(&self) -> &BTreeMap<IndividualName, Element> {
        &self.individuals
    }

    pub fn concept_ext(&self, a: &ConceptName) -> BTreeSet<Element> {
        self.concepts.get(a).cloned().unwrap_or_default()
    }

    pub fn role_ext(&self, p: &RoleName) -> BTreeSet<(Element, Element)> {
        self.roles.get(p).cloned().unwrap_or_default()
    }

    /// Extension of a role conjunction: the intersection of its names.
    pub fn role_pairs(&self, r: &Role) -> BTreeSet<(Element, Element)> {
        let mut names = r.names().iter();
        let first = names.next().expect("roles are nonempty");
        let mut acc = self.role_ext(first);
        for p in names {
            let other = self.role_ext(p);
            acc.retain(|pair| other.contains(pair));
        }
        acc
    }

    fn successors(&self, r: &Role) -> Vec<Vec<Element>> {
        let mut out = vec![Vec::new(); self.labels.len()];
        for (a, b) in self.role_pairs(r) {
            out[a].push(b);
        }
        out
    }

    /// Renders the model text format.
    pub fn render(&self) -> String {
        let mut out = String::from("domain:");
        for l in &self.labels {
            out.push(' ');
            out.push_str(l);
        }
        out.push('\n');
        for (a, e) in &self.individuals {
            let _ = writeln!(out, "individual {a} = {}", self.labels[*e]);
        }
        for (a, ext) in &self.concepts {
            let items: Vec<&str> = ext.iter().map(|&e| self.labels[e].as_str()).collect();
            let _ = writeln!(out, "concept {a} = {{{}}}", items.join(","));
        }
        for (p, ext) in &self.roles {
            let items: Vec<String> = ext
                .iter()
                .map(|&(a, b)| format!("({},{})", self.labels[a], self.labels[b]))
                .collect();
            let _ = writeln!(out, "role {p} = {{{}}}", items.join(","));
        }
        out
    }

    /// Reads the model text format produced by [`Interpretation::render`].
    pub fn parse(text: &str) -> Result<Self, SemanticsError> {
        let fail = |line: usize, msg: &str| SemanticsError::Format {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let Some((n, first)) = lines.next() else {
            return Err(SemanticsError::EmptyDomain);
        };
        let labels = first
            .strip_prefix("domain:")
            .ok_or_else(|| fail(n + 1, "expected `domain:` line first"))?
            .split_whitespace();
        let mut interp = Interpretation::new(labels)?;
        let lookup = |i: &Interpretation, n: usize, l: &str| {
            i.element(l.trim())
                .ok_or_else(|| fail(n + 1, &format!("unknown element `{}`", l.trim())))
        };
        for (n, line) in lines {
            let (head, rest) = line
                .split_once(" = ")
                .ok_or_else(|| fail(n + 1, "expected `<kind> <name> = <value>`"))?;
            let (kind, name) = head
                .split_once(' ')
                .ok_or_else(|| fail(n + 1, "expected `<kind> <name>`"))?;
            let name = name.trim();
            let inner = || {
                rest.trim()
                    .strip_prefix('{')
                    .and_then(|r| r.strip_suffix('}'))
                    .ok_or_else(|| fail(n + 1, "expected `{...}`"))
            };
            match kind {
                "individual" => {
                    let a = IndividualName::new(name).map_err(|e| fail(n + 1, &e.to_string()))?;
                    let e = lookup(&interp, n, rest)?;
                    interp.assign(a, e)?;
                }
                "concept" => {
                    let a = ConceptName::new(name).map_err(|e| fail(n + 1, &e.to_string()))?;
                    let body = inner()?;
                    let mut ext = BTreeSet::new();
                    for item in body.split(',').filter(|s| !s.trim().is_empty()) {
                        ext.insert(lookup(&interp, n, item)?);
                    }
                    interp.set_concept(a, ext);
                }
                "role" => {
                    let p = RoleName::new(name).map_err(|e| fail(n + 1, &e.to_string()))?;
                    let body = inner()?;
                    let mut ext = BTreeSet::new();
                    let mut rest = body.trim();
                    while !rest.is_empty() {
                        let close = rest.find(')').ok_or_else(|| fail(n + 1, "unclosed pair"))?;
                        let pair = rest[..close]
                            .trim()
                            .strip_prefix('(')
                            .ok_or_else(|| fail(n + 1, "expected `(a,b)`"))?;
                        let (a, b) = pair.split_once(',').ok_or_else(|| fail(n + 1, "expected `(a,b)`"))?;
                        ext.insert((lookup(&interp, n, a)?, lookup(&interp, n, b)?));
                        rest = rest[close + 1..].trim_start_matches([',', ' ']);
                    }
                    interp.set_role(p, ext);
                }
                _ => return Err(fail(n + 1, &format!("unknown item kind `{kind}`"))),
            }
        }
        Ok(interp)
    }
}

/// The extension of a concept under an interpretation.
pub fn eval_concept(i: &Interpretation, c: &Concept) -> BTreeSet<Element> {
    match c {
        Concept::Top => i.domain(),
        Concept::Bottom => BTreeSet::new(),
        Concept::Name(a) => i.concept_ext(a),
        Concept::Not(d) => {
            let inner = eval_concept(i, d);
            i.domain().difference(&inner).copied().collect()
        }
        Concept::And(a, b) => {
            let (a, b) = (eval_concept(i, a), eval_concept(i, b));
            a.intersection(&b).copied().collect()
        }
        Concept::Or(a, b) => {
            let (a, b) = (eval_concept(i, a), eval_concept(i, b));
            a.union(&b).copied().collect()
        }
        Concept::All(r, d) => {
            let ext = eval_concept(i, d);
            let succ = i.successors(r);
            (0..i.len())
                .filter(|&e| succ[e].iter().all(|t| ext.contains(t)))
                .collect()
        }
        Concept::Some(r, d) => {
            let ext = eval_concept(i, d);
            let succ = i.successors(r);
            (0..i.len())
                .filter(|&e| succ[e].iter().any(|t| ext.contains(t)))
                .collect()
        }
        Concept::AtLeast(n, r) => {
            let succ = i.successors(r);
            (0..i.len()).filter(|&e| succ[e].len() as u64 >= *n).collect()
        }
        Concept::AtMost(n, r) => {
            let succ = i.successors(r);
            (0..i.len()).filter(|&e| succ[e].len() as u64 <= *n).collect()
        }
    }
}

/// True iff `i` satisfies every inclusion and assertion of `kb`.
pub fn is_model(i: &Interpretation, kb: &KnowledgeBase) -> Result<bool, SemanticsError> {
    let lookup = |a: &IndividualName| {
        i.individual(a)
            .ok_or_else(|| SemanticsError::MissingIndividual(a.to_string()))
    };
    for a in kb.individuals() {
        lookup(&a)?;
    }
    for inc in &kb.tbox {
        let lhs = eval_concept(i, &inc.lhs);
        if !lhs.is_subset(&eval_concept(i, &inc.rhs)) {
            return Ok(false);
        }
    }
    for a in &kb.abox {
        let holds = match a {
            Assertion::ConceptMember(x, c) => eval_concept(i, c).contains(&lookup(x)?),
            Assertion::RoleMember(x, y, r) => i.role_pairs(r).contains(&(lookup(x)?, lookup(y)?)),
        };
        if !holds {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::parser::parse_kb;

    pub(crate) const EXAMPLE_21: &str = "\
(implies (some TEACHES Course) (or (and Student (some DEGREE BS)) Prof))
(implies Prof (some DEGREE MS))
(implies (some DEGREE MS) (some DEGREE BS))
(implies (and MS BS) BOTTOM)
(related john cs156 TEACHES)
(instance john (atmost 1 DEGREE))
(instance cs156 Course)
";

    fn cn(s: &str) -> ConceptName {
        ConceptName::new(s).unwrap()
    }
    fn rn(s: &str) -> RoleName {
        RoleName::new(s).unwrap()
    }

    /// The interpretation listed alongside the university example.
    pub(crate) fn example_21_model() -> Interpretation {
        let mut i = Interpretation::new(["john", "cs156", "csb"]).unwrap();
        i.assign(IndividualName::new("john").unwrap(), 0).unwrap();
        i.assign(IndividualName::new("cs156").unwrap(), 1).unwrap();
        i.set_concept(cn("Student"), [0]);
        i.set_concept(cn("Prof"), []);
        i.set_concept(cn("Course"), [1]);
        i.set_concept(cn("BS"), [2]);
        i.set_concept(cn("MS"), []);
        i.set_role(rn("TEACHES"), [(0, 1)]);
        i.set_role(rn("DEGREE"), [(0, 2)]);
        i
    }

    #[test]
    fn example_21_evaluation() {
        let i = example_21_model();
        let c = crate::parser::parse_concept("(and Student (some DEGREE BS))").unwrap();
        assert_eq!(eval_concept(&i, &c), BTreeSet::from([0]));
        let c = crate::parser::parse_concept("(atmost 1 DEGREE)").unwrap();
        assert_eq!(eval_concept(&i, &c), i.domain());
        assert_eq!(eval_concept(&i, &Concept::Top), i.domain());
        assert!(eval_concept(&i, &Concept::Bottom).is_empty());
    }

    #[test]
    fn example_21_is_model() {
        let kb = parse_kb(EXAMPLE_21).unwrap();
        let mut i = example_21_model();
        assert!(is_model(&i, &kb).unwrap());
        i.set_concept(cn("BS"), []);
        assert!(!is_model(&i, &kb).unwrap());
    }

    #[test]
    fn example_33_is_model() {
        let kb = parse_kb(
            "(implies Italian (some FRIEND Italian)) (related peter susan FRIEND) \
             (instance peter (all FRIEND (not Italian))) (instance susan (some FRIEND Italian))",
        )
        .unwrap();
        let mut i = Interpretation::new(["peter", "susan", "x", "y"]).unwrap();
        i.assign(IndividualName::new("peter").unwrap(), 0).unwrap();
        i.assign(IndividualName::new("susan").unwrap(), 1).unwrap();
        i.set_concept(cn("Italian"), [2, 3]);
        i.set_role(rn("FRIEND"), [(0, 1), (1, 2), (2, 3), (3, 3)]);
        assert!(is_model(&i, &kb).unwrap());
    }

    #[test]
    fn missing_individual_is_an_error() {
        let kb = parse_kb("(instance a A)").unwrap();
        let i = Interpretation::new(["e"]).unwrap();
        assert_eq!(is_model(&i, &kb), Err(SemanticsError::MissingIndividual("a".into())));
    }

    #[test]
    fn una_and_nonempty_domain() {
        assert_eq!(
            Interpretation::new(Vec::<String>::new()),
            Err(SemanticsError::EmptyDomain)
        );
        let mut i = Interpretation::new(["e"]).unwrap();
        i.assign(IndividualName::new("a").unwrap(), 0).unwrap();
        assert!(i.assign(IndividualName::new("b").unwrap(), 0).is_err());
    }

    #[test]
    fn model_text_round_trip() {
        let i = example_21_model();
        let text = i.render();
        assert_eq!(
            text,
            "domain: john cs156 csb\nindividual cs156 = cs156\nindividual john = john\n\
             concept BS = {csb}\nconcept Course = {cs156}\nconcept MS = {}\nconcept Prof = {}\n\
             concept Student = {john}\nrole DEGREE = {(john,csb)}\nrole TEACHES = {(john,cs156)}\n"
        );
        assert_eq!(Interpretation::parse(&text).unwrap(), i);
        assert!(Interpretation::parse("concept A = {}").is_err());
        assert!(Interpretation::parse("domain: a\nconcept A = {b}").is_err());
    }

    #[test]
    fn role_conjunction_is_intersection() {
        let mut i = Interpretation::new(["a", "b", "c"]).unwrap();
        i.set_role(rn("P"), [(0, 1), (0, 2)]);
        i.set_role(rn("Q"), [(0, 2)]);
        let r = Role::new([rn("P"), rn("Q")]).unwrap();
        assert_eq!(i.role_pairs(&r), BTreeSet::from([(0, 2)]));
    }
}
