//! Reading the canonical interpretation off a complete, clash-free
//! constraint system.
//!
//! Every object becomes its own domain element. Role extensions contain the
//! explicit links plus, for each blocked variable, copies of its witness's
//! outgoing links. Those implicit pairs are what make a finite model out of
//! a branch that was cut short by blocking.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::constraint_system::{Constraint, ConstraintSystem, Object};
use crate::semantics::{eval_concept, Element, Interpretation};
use crate::syntax::{Concept, RoleName};
use crate::tableau::{applicable_rule_instances, detect_clash, ClashKind};

/// Maps each object of the system to its domain element.
pub type Assignment = BTreeMap<Object, Element>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("constraint system is not complete ({0} rule instance(s) still applicable)")]
    Incomplete(usize),
    #[error("constraint system contains a {0} clash")]
    Clash(ClashKind),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RolePairKind {
    Explicit,
    /// Inherited from the witness of a blocked variable.
    Implicit(Object),
}

/// Every `(source, role name, target)` of the canonical interpretation and
/// whether it is explicit or routed through a witness.
pub fn role_pairs(s: &ConstraintSystem) -> BTreeMap<(Object, RoleName, Object), RolePairKind> {
    let mut out = BTreeMap::new();
    for o in s.objects() {
        let (from, kind) = match s.witness(o) {
            Some(w) => (w.clone(), RolePairKind::Implicit(w)),
            None => (o.clone(), RolePairKind::Explicit),
        };
        for (t, names) in s.direct_successors(&from) {
            for p in names {
                out.insert((o.clone(), p.clone(), t.clone()), kind.clone());
            }
        }
    }
    out
}

fn labels(s: &ConstraintSystem) -> Vec<String> {
    let mut taken: BTreeSet<String> = s
        .objects()
        .iter()
        .filter(|o| !o.is_var())
        .map(|o| o.to_string())
        .collect();
    s.objects()
        .iter()
        .map(|o| match o {
            Object::Ind(a) => a.to_string(),
            Object::Var(_) => {
                let mut l = o.to_string();
                while taken.contains(&l) {
                    l.push('\'');
                }
                taken.insert(l.clone());
                l
            }
        })
        .collect()
}

/// Builds the canonical interpretation `I_S` and assignment `α_S`.
pub fn extract_model(s: &ConstraintSystem) -> Result<(Interpretation, Assignment), ModelError> {
    let pending = applicable_rule_instances(s).len();
    if pending > 0 {
        return Err(ModelError::Incomplete(pending));
    }
    if let Some(c) = detect_clash(s) {
        return Err(ModelError::Clash(c.kind));
    }
    let mut interp = Interpretation::new(labels(s)).expect("labels are unique and a system has objects");
    let alpha: Assignment = s.objects().iter().cloned().zip(0..).collect();
    for (o, &e) in &alpha {
        if let Object::Ind(a) = o {
            interp.assign(a.clone(), e).expect("objects are distinct");
        }
        for c in s.sigma(o) {
            if let Concept::Name(a) = c {
                interp.add_concept_member(a.clone(), e);
            }
        }
    }
    // declare every name so that empty extensions still show up in output
    let mut concept_names = BTreeSet::new();
    let mut role_names = BTreeSet::new();
    for c in s.constraints() {
        match c {
            Constraint::Member(_, c) | Constraint::Universal(c) => {
                c.concept_names(&mut concept_names);
                c.role_names(&mut role_names);
            }
            Constraint::RoleLink(_, p, _) => {
                role_names.insert(p);
            }
            Constraint::Distinct(..) => {}
        }
    }
    if let Some(kb) = s.source() {
        concept_names.extend(kb.concept_names());
        role_names.extend(kb.role_names());
    }
    for a in concept_names {
        let ext = interp.concept_ext(&a);
        interp.set_concept(a, ext);
    }
    for p in role_names {
        interp.set_role(p, []);
    }
    for (o, p, t) in role_pairs(s).into_keys() {
        interp.add_role_pair(p, alpha[&o], alpha[&t]);
    }
    Ok((interp, alpha))
}

/// Checks that `(i, alpha)` satisfies every constraint of `s`.
pub fn satisfies_system(i: &Interpretation, alpha: &Assignment, s: &ConstraintSystem) -> bool {
    s.constraints().iter().all(|c| match c {
        Constraint::Member(o, c) => alpha.get(o).is_some_and(|e| eval_concept(i, c).contains(e)),
        Constraint::RoleLink(o, p, t) => match (alpha.get(o), alpha.get(t)) {
            (Some(&a), Some(&b)) => i.role_ext(p).contains(&(a, b)),
            _ => false,
        },
        Constraint::Universal(c) => eval_concept(i, c).len() == i.len(),
        Constraint::Distinct(a, b) => match (alpha.get(a), alpha.get(b)) {
            (Some(x), Some(y)) => x != y,
            _ => false,
        },
    })
}
