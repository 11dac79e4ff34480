//! The reasoning services, each reduced to knowledge-base satisfiability.
//!
//! Concept satisfiability adds `C(b)` for a fresh individual `b`;
//! subsumption `C ⊑ D` holds iff `(C ⊓ ¬D)(b)` cannot be added; `C(a)` is
//! entailed iff `(¬C)(a)` cannot be added.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::canonical_model::{extract_model, satisfies_system};
use crate::constraint_system::translate_kb;
use crate::semantics::{is_model, Interpretation};
use crate::syntax::{Concept, IndividualName, KnowledgeBase, RESERVED_INDIVIDUAL};
use crate::tableau::{complete, Completion, Guard, Guards, Outcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(Box<Interpretation>),
    Unsat,
    Unknown(Guard),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat(_))
    }

    pub fn model(&self) -> Option<&Interpretation> {
        match self {
            Verdict::Sat(m) => Some(m),
            _ => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat(_) => "SAT",
            Verdict::Unsat => "UNSAT",
            Verdict::Unknown(_) => "UNKNOWN",
        })
    }
}

/// Answer of an entailment query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entailment {
    True,
    False,
    Unknown(Guard),
}

impl Entailment {
    /// Reads an entailment off the verdict of its refutation probe.
    pub fn from_refutation(v: &Verdict) -> Self {
        match v {
            Verdict::Unsat => Entailment::True,
            Verdict::Sat(_) => Entailment::False,
            Verdict::Unknown(g) => Entailment::Unknown(*g),
        }
    }
}

impl fmt::Display for Entailment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entailment::True => "true",
            Entailment::False => "false",
            Entailment::Unknown(_) => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    #[error("individual `{0}` does not occur in the knowledge base")]
    UnknownIndividual(IndividualName),
}

/// Result of instance retrieval.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Retrieval {
    pub members: BTreeSet<IndividualName>,
    /// Individuals whose check hit a resource guard.
    pub undecided: BTreeSet<IndividualName>,
}

/// An individual name not occurring in `kb`, for the reductions.
pub fn fresh_individual(kb: &KnowledgeBase) -> IndividualName {
    let used = kb.individuals();
    let mut name = RESERVED_INDIVIDUAL.to_string();
    loop {
        let n = IndividualName::new(name.clone()).expect("valid name");
        if !used.contains(&n) {
            return n;
        }
        name.push('\'');
    }
}

/// `kb` plus `C(b)` for a fresh individual `b`.
pub fn concept_probe(kb: &KnowledgeBase, c: &Concept) -> KnowledgeBase {
    let b = fresh_individual(kb);
    kb.clone().with_instance(b.as_str(), c.clone())
}

/// The knowledge base that is unsatisfiable iff `c` is subsumed by `d`.
pub fn subsumption_probe(kb: &KnowledgeBase, c: &Concept, d: &Concept) -> KnowledgeBase {
    concept_probe(kb, &Concept::and(c.clone(), Concept::not(d.clone())))
}

/// The knowledge base that is unsatisfiable iff `kb` entails `C(a)`.
pub fn instance_probe(kb: &KnowledgeBase, a: &IndividualName, c: &Concept) -> Result<KnowledgeBase, ServiceError> {
    if !kb.individuals().contains(a) {
        return Err(ServiceError::UnknownIndividual(a.clone()));
    }
    Ok(kb.clone().with_instance(a.as_str(), Concept::not(c.clone())))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Reasoner {
    pub guards: Guards,
}

impl Reasoner {
    pub fn new(guards: Guards) -> Self {
        Reasoner { guards }
    }

    /// Runs the tableau on `kb`, keeping the trace and statistics.
    pub fn run(&self, kb: &KnowledgeBase) -> (Verdict, Completion) {
        let s = translate_kb(kb);
        let done = complete(&s, &self.guards);
        let verdict = match &done.outcome {
            Outcome::Satisfiable(sys) => {
                let (model, alpha) = extract_model(sys).expect("completions are complete and clash-free");
                if self.guards.check_invariants {
                    assert!(
                        satisfies_system(&model, &alpha, sys),
                        "canonical model violates its system"
                    );
                    assert_eq!(is_model(&model, kb), Ok(true), "canonical model is not a model");
                }
                Verdict::Sat(Box::new(model))
            }
            Outcome::Unsatisfiable => Verdict::Unsat,
            Outcome::ResourceExceeded(g) => Verdict::Unknown(*g),
        };
        (verdict, done)
    }

    pub fn kb_satisfiable(&self, kb: &KnowledgeBase) -> Verdict {
        self.run(kb).0
    }

    pub fn concept_satisfiable(&self, kb: &KnowledgeBase, c: &Concept) -> Verdict {
        self.kb_satisfiable(&concept_probe(kb, c))
    }

    /// Whether `c` is subsumed by `d`: every model puts `c` inside `d`.
    pub fn subsumed_by(&self, kb: &KnowledgeBase, c: &Concept, d: &Concept) -> Entailment {
        Entailment::from_refutation(&self.kb_satisfiable(&subsumption_probe(kb, c, d)))
    }

    pub fn instance_of(&self, kb: &KnowledgeBase, a: &IndividualName, c: &Concept) -> Result<Entailment, ServiceError> {
        let probe = instance_probe(kb, a, c)?;
        Ok(Entailment::from_refutation(&self.kb_satisfiable(&probe)))
    }

    pub fn instances(&self, kb: &KnowledgeBase, c: &Concept) -> Retrieval {
        let mut out = Retrieval::default();
        for a in kb.individuals() {
            match self
                .instance_of(kb, &a, c)
                .expect("individual taken from the knowledge base")
            {
                Entailment::True => {
                    out.members.insert(a);
                }
                Entailment::False => {}
                Entailment::Unknown(_) => {
                    out.undecided.insert(a);
                }
            }
        }
        out
    }
}

pub fn kb_satisfiable(kb: &KnowledgeBase) -> Verdict {
    Reasoner::default().kb_satisfiable(kb)
}

pub fn concept_satisfiable(kb: &KnowledgeBase, c: &Concept) -> Verdict {
    Reasoner::default().concept_satisfiable(kb, c)
}

pub fn subsumed_by(kb: &KnowledgeBase, c: &Concept, d: &Concept) -> Entailment {
    Reasoner::default().subsumed_by(kb, c, d)
}

pub fn instance_of(kb: &KnowledgeBase, a: &IndividualName, c: &Concept) -> Result<Entailment, ServiceError> {
    Reasoner::default().instance_of(kb, a, c)
}

pub fn instances(kb: &KnowledgeBase, c: &Concept) -> Retrieval {
    Reasoner::default().instances(kb, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint_system::tests::EXAMPLE_33;
    use crate::parser::{parse_concept, parse_kb};
    use crate::semantics::tests::EXAMPLE_21;

    fn c(s: &str) -> Concept {
        parse_concept(s).unwrap()
    }

    fn ind(s: &str) -> IndividualName {
        IndividualName::new(s).unwrap()
    }

    fn uni() -> KnowledgeBase {
        parse_kb(EXAMPLE_21).unwrap()
    }

    #[test]
    fn kb_verdicts() {
        assert!(kb_satisfiable(&uni()).is_sat());
        assert!(kb_satisfiable(&parse_kb(EXAMPLE_33).unwrap()).is_sat());
        assert_eq!(
            kb_satisfiable(&parse_kb("(instance a BOTTOM)").unwrap()),
            Verdict::Unsat
        );
    }

    #[test]
    fn concept_verdicts() {
        let kb = uni();
        assert_eq!(
            concept_satisfiable(&kb, &c("(and Prof (atmost 1 DEGREE))")),
            Verdict::Unsat
        );
        assert!(concept_satisfiable(&kb, &Concept::Top).is_sat());
        assert!(concept_satisfiable(&kb, &c("Prof")).is_sat());
    }

    #[test]
    fn subsumption() {
        let kb = uni();
        assert_eq!(
            subsumed_by(&kb, &c("(some DEGREE MS)"), &c("(some DEGREE BS)")),
            Entailment::True
        );
        assert_eq!(subsumed_by(&kb, &c("Student"), &c("Student")), Entailment::True);
        assert_eq!(subsumed_by(&kb, &c("Student"), &c("Prof")), Entailment::False);
        // tbox members are always subsumptions
        for inc in &kb.tbox {
            assert_eq!(subsumed_by(&kb, &inc.lhs, &inc.rhs), Entailment::True);
        }
    }

    #[test]
    fn instance_checks() {
        let kb = uni();
        assert_eq!(instance_of(&kb, &ind("john"), &c("Student")), Ok(Entailment::True));
        assert_eq!(instance_of(&kb, &ind("john"), &c("Prof")), Ok(Entailment::False));
        assert_eq!(instance_of(&kb, &ind("cs156"), &c("Course")), Ok(Entailment::True));
        assert_eq!(
            instance_of(&kb, &ind("mary"), &c("Prof")),
            Err(ServiceError::UnknownIndividual(ind("mary")))
        );
    }

    #[test]
    fn retrieval() {
        let kb = uni();
        assert_eq!(instances(&kb, &c("Student")).members, [ind("john")].into());
        assert_eq!(instances(&kb, &Concept::Top).members, kb.individuals());
        assert!(instances(&kb, &Concept::Bottom).members.is_empty());
    }

    #[test]
    fn unsatisfiable_kb_entails_everything() {
        let kb = parse_kb("(instance a A) (implies A BOTTOM)").unwrap();
        assert_eq!(subsumed_by(&kb, &c("TOP"), &c("B")), Entailment::True);
        assert_eq!(instance_of(&kb, &ind("a"), &c("B")), Ok(Entailment::True));
        assert_eq!(concept_satisfiable(&kb, &Concept::Top), Verdict::Unsat);
    }

    #[test]
    fn fresh_individual_avoids_collisions() {
        let kb = KnowledgeBase::new().with_instance(RESERVED_INDIVIDUAL, Concept::Top);
        assert_eq!(fresh_individual(&kb).as_str(), "__fresh'");
    }
}
