//! Bounded brute-force model search.
//!
//! Enumerates interpretations with up to `max_domain` elements by
//! backtracking over the truth of every concept-name and role-name atom,
//! pruning with a three-valued evaluation of the knowledge base over the
//! partial assignment. Individuals occupy the first elements (in name
//! order); anonymous elements are kept in non-increasing order of their
//! concept-name signature, which removes permutations of anonymous elements
//! without losing any model up to isomorphism.
//!
//! This is evidence, not a decision procedure: `NotFound` only refutes models
//! of size at most `max_domain`.

use std::collections::BTreeSet;

use crate::semantics::{Interpretation, SemanticsError};
use crate::syntax::{to_simple_form, Assertion, Concept, ConceptName, KnowledgeBase, Role, RoleName};

/// Largest domain the oracle will enumerate (element sets are `u64` masks).
pub const MAX_ORACLE_DOMAIN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Found(Interpretation),
    NotFound,
    BudgetExceeded,
}

/// Searches for a model of `kb` with at most `max_domain` elements, visiting
/// at most `budget` search nodes.
pub fn find_model_bounded(kb: &KnowledgeBase, max_domain: usize, budget: u64) -> Result<OracleOutcome, SemanticsError> {
    let individuals: Vec<_> = kb.individuals().into_iter().collect();
    if max_domain < individuals.len() || max_domain == 0 || max_domain > MAX_ORACLE_DOMAIN {
        return Err(SemanticsError::BoundTooSmall {
            max: max_domain,
            individuals: individuals.len(),
        });
    }
    let mut nodes = 0u64;
    for size in individuals.len().max(1)..=max_domain {
        let mut search = Search::new(kb, size, individuals.len());
        match search.run(&mut nodes, budget) {
            Step::Found => return Ok(OracleOutcome::Found(search.build(&individuals))),
            Step::Exhausted => {}
            Step::OutOfBudget => return Ok(OracleOutcome::BudgetExceeded),
        }
    }
    Ok(OracleOutcome::NotFound)
}

#[derive(Clone, Copy)]
enum Atom {
    Concept {
        name: usize,
        elem: usize,
        closes_signature: bool,
    },
    Role {
        name: usize,
        from: usize,
        to: usize,
    },
}

enum Step {
    Found,
    Exhausted,
    OutOfBudget,
}

struct Search {
    size: usize,
    full: u64,
    first_anonymous: usize,
    concept_names: Vec<ConceptName>,
    role_names: Vec<RoleName>,
    // per concept name: elements known to be in / out
    c_true: Vec<u64>,
    c_false: Vec<u64>,
    // per role name and source element: targets known to be in / out
    r_true: Vec<Vec<u64>>,
    r_false: Vec<Vec<u64>>,
    universals: Vec<Concept>,
    members: Vec<(usize, Concept)>,
    atoms: Vec<Atom>,
}

impl Search {
    fn new(kb: &KnowledgeBase, size: usize, n_individuals: usize) -> Self {
        let concept_names: Vec<_> = kb.concept_names().into_iter().collect();
        let role_names: Vec<_> = kb.role_names().into_iter().collect();
        let individuals: Vec<_> = kb.individuals().into_iter().collect();
        let full = if size == 64 { u64::MAX } else { (1u64 << size) - 1 };
        let ind_index = |a| individuals.iter().position(|x| x == a).expect("individual of kb");

        let mut r_true = vec![vec![0u64; size]; role_names.len()];
        let r_false = vec![vec![0u64; size]; role_names.len()];
        let mut members = Vec::new();
        for a in &kb.abox {
            match a {
                Assertion::ConceptMember(x, c) => members.push((ind_index(x), to_simple_form(c))),
                Assertion::RoleMember(x, y, r) => {
                    let (x, y) = (ind_index(x), ind_index(y));
                    for p in r.names() {
                        let pi = role_names.binary_search(p).expect("role of kb");
                        r_true[pi][x] |= 1 << y;
                    }
                }
            }
        }
        let universals = kb
            .tbox
            .iter()
            .map(|inc| to_simple_form(&Concept::or(Concept::not(inc.lhs.clone()), inc.rhs.clone())))
            .collect();

        let mut atoms = Vec::new();
        for e in 0..size {
            for c in 0..concept_names.len() {
                atoms.push(Atom::Concept {
                    name: c,
                    elem: e,
                    closes_signature: c + 1 == concept_names.len(),
                });
            }
            for (p, rows) in r_true.iter().enumerate() {
                for t in 0..size {
                    if rows[e] & (1 << t) == 0 {
                        atoms.push(Atom::Role {
                            name: p,
                            from: e,
                            to: t,
                        });
                    }
                }
            }
        }

        Search {
            size,
            full,
            first_anonymous: n_individuals,
            c_true: vec![0; concept_names.len()],
            c_false: vec![0; concept_names.len()],
            r_true,
            r_false,
            concept_names,
            role_names,
            universals,
            members,
            atoms,
        }
    }

    fn run(&mut self, nodes: &mut u64, budget: u64) -> Step {
        if !self.consistent() {
            return Step::Exhausted;
        }
        self.descend(0, nodes, budget)
    }

    fn descend(&mut self, i: usize, nodes: &mut u64, budget: u64) -> Step {
        if i == self.atoms.len() {
            return Step::Found;
        }
        for value in [false, true] {
            *nodes += 1;
            if *nodes > budget {
                return Step::OutOfBudget;
            }
            self.set(self.atoms[i], value, true);
            if self.symmetry_ok(self.atoms[i]) && self.consistent() {
                match self.descend(i + 1, nodes, budget) {
                    Step::Exhausted => {}
                    done => return done,
                }
            }
            self.set(self.atoms[i], value, false);
        }
        Step::Exhausted
    }

    fn set(&mut self, atom: Atom, value: bool, on: bool) {
        let (slot, bit) = match atom {
            Atom::Concept { name, elem, .. } => {
                let v = if value {
                    &mut self.c_true[name]
                } else {
                    &mut self.c_false[name]
                };
                (v, elem)
            }
            Atom::Role { name, from, to } => {
                let v = if value {
                    &mut self.r_true[name][from]
                } else {
                    &mut self.r_false[name][from]
                };
                (v, to)
            }
        };
        if on {
            *slot |= 1 << bit;
        } else {
            *slot &= !(1 << bit);
        }
    }

    fn signature(&self, e: usize) -> u64 {
        self.c_true
            .iter()
            .enumerate()
            .fold(0, |acc, (i, m)| acc | (((m >> e) & 1) << i))
    }

    fn symmetry_ok(&self, atom: Atom) -> bool {
        match atom {
            Atom::Concept {
                elem,
                closes_signature: true,
                ..
            } if elem > self.first_anonymous => self.signature(elem - 1) >= self.signature(elem),
            _ => true,
        }
    }

    fn consistent(&self) -> bool {
        for u in &self.universals {
            let (_, hi) = self.eval(u);
            if hi != self.full {
                return false;
            }
        }
        self.members.iter().all(|(e, c)| self.eval(c).1 & (1 << e) != 0)
    }

    fn role_rows(&self, r: &Role, from: usize) -> (u64, u64) {
        let mut sure = self.full;
        let mut maybe = self.full;
        for p in r.names() {
            match self.role_names.binary_search(p) {
                Ok(pi) => {
                    sure &= self.r_true[pi][from];
                    maybe &= !self.r_false[pi][from];
                }
                Err(_) => return (0, 0),
            }
        }
        (sure, maybe & self.full)
    }

    /// Lower and upper bound of the extension under the partial assignment.
    fn eval(&self, c: &Concept) -> (u64, u64) {
        let full = self.full;
        match c {
            Concept::Top => (full, full),
            Concept::Bottom => (0, 0),
            Concept::Name(a) => match self.concept_names.binary_search(a) {
                Ok(i) => (self.c_true[i], !self.c_false[i] & full),
                Err(_) => (0, 0),
            },
            Concept::Not(d) => {
                let (lo, hi) = self.eval(d);
                (!hi & full, !lo & full)
            }
            Concept::And(a, b) => {
                let (a, b) = (self.eval(a), self.eval(b));
                (a.0 & b.0, a.1 & b.1)
            }
            Concept::Or(a, b) => {
                let (a, b) = (self.eval(a), self.eval(b));
                (a.0 | b.0, a.1 | b.1)
            }
            Concept::Some(r, d) => {
                let (dlo, dhi) = self.eval(d);
                let (mut lo, mut hi) = (0, 0);
                for e in 0..self.size {
                    let (sure, maybe) = self.role_rows(r, e);
                    if sure & dlo != 0 {
                        lo |= 1 << e;
                    }
                    if maybe & dhi != 0 {
                        hi |= 1 << e;
                    }
                }
                (lo, hi)
            }
            Concept::All(r, d) => {
                let (dlo, dhi) = self.eval(d);
                let (mut lo, mut hi) = (0, 0);
                for e in 0..self.size {
                    let (sure, maybe) = self.role_rows(r, e);
                    if maybe & !dlo & full == 0 {
                        lo |= 1 << e;
                    }
                    if sure & !dhi & full == 0 {
                        hi |= 1 << e;
                    }
                }
                (lo, hi)
            }
            Concept::AtLeast(n, r) | Concept::AtMost(n, r) => {
                let at_least = matches!(c, Concept::AtLeast(..));
                let (mut lo, mut hi) = (0, 0);
                for e in 0..self.size {
                    let (sure, maybe) = self.role_rows(r, e);
                    let (s, m) = (sure.count_ones() as u64, maybe.count_ones() as u64);
                    let (surely, possibly) = if at_least {
                        (s >= *n, m >= *n)
                    } else {
                        (m <= *n, s <= *n)
                    };
                    if surely {
                        lo |= 1 << e;
                    }
                    if possibly {
                        hi |= 1 << e;
                    }
                }
                (lo, hi)
            }
        }
    }

    fn build(&self, individuals: &[crate::syntax::IndividualName]) -> Interpretation {
        let mut labels: Vec<String> = individuals.iter().map(|a| a.to_string()).collect();
        let taken: BTreeSet<String> = labels.iter().cloned().collect();
        for j in individuals.len()..self.size {
            let mut l = format!("_e{j}");
            while taken.contains(&l) {
                l.push('\'');
            }
            labels.push(l);
        }
        let mut interp = Interpretation::new(labels).expect("nonempty domain");
        for (i, a) in individuals.iter().enumerate() {
            interp.assign(a.clone(), i).expect("distinct elements");
        }
        for (ci, name) in self.concept_names.iter().enumerate() {
            interp.set_concept(
                name.clone(),
                (0..self.size).filter(|&e| self.c_true[ci] & (1 << e) != 0),
            );
        }
        for (pi, name) in self.role_names.iter().enumerate() {
            let pairs = (0..self.size)
                .flat_map(|a| (0..self.size).map(move |b| (a, b)))
                .filter(|&(a, b)| self.r_true[pi][a] & (1 << b) != 0);
            interp.set_role(name.clone(), pairs);
        }
        interp
    }
}
