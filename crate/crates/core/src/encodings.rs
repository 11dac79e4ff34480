//! Source-to-source knowledge-base transformations.
//!
//! `c_of_tbox` folds a TBox into a single concept that must denote the whole
//! domain. `inclusions_to_introduction` rewrites a knowledge base so that
//! its only inclusion has a concept name on the left, preserving
//! satisfiability. The remaining helpers desugar definitions and encode
//! domain/range restrictions and subroles with the core constructors.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::constraint_system::ROOT_INDIVIDUAL;
use crate::syntax::{Assertion, Concept, ConceptName, Inclusion, IndividualName, KnowledgeBase, Role, RoleName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("role name `{0}` already occurs in the super-role")]
    NameCollision(RoleName),
}

/// The conjunction of `¬C ⊔ D` over all inclusions, `TOP` when empty.
pub fn c_of_tbox<'a>(tbox: impl IntoIterator<Item = &'a Inclusion>) -> Concept {
    tbox.into_iter()
        .map(|inc| Concept::or(Concept::not(inc.lhs.clone()), inc.rhs.clone()))
        .reduce(Concept::and)
        .unwrap_or(Concept::Top)
}

/// First of `__aux0`, `__aux1`, ... not used as a concept name in `kb`.
pub fn fresh_concept_name(kb: &KnowledgeBase) -> ConceptName {
    let used = kb.concept_names();
    (0u64..)
        .map(|i| ConceptName::new(format!("__aux{i}")).expect("valid name"))
        .find(|n| !used.contains(n))
        .expect("some index is free")
}

/// Rewrites `kb` into an equisatisfiable knowledge base whose TBox is the
/// single inclusion `A ⊑ C_T ⊓ ∀P1.A ⊓ ... ⊓ ∀Pn.A` for a fresh name `A`,
/// with `A(b)` asserted for every individual `b`.
///
/// A knowledge base without individuals gets one root individual, since
/// otherwise the result would be satisfiable regardless of the TBox.
pub fn inclusions_to_introduction(kb: &KnowledgeBase) -> KnowledgeBase {
    let a = fresh_concept_name(kb);
    let marker = Concept::Name(a.clone());
    let rhs = kb.role_names().into_iter().fold(c_of_tbox(&kb.tbox), |acc, p| {
        Concept::and(acc, Concept::all(Role::atomic(p), marker.clone()))
    });
    let mut individuals = kb.individuals();
    if individuals.is_empty() {
        individuals.insert(IndividualName::new(ROOT_INDIVIDUAL).expect("valid name"));
    }
    let mut abox = kb.abox.clone();
    abox.extend(
        individuals
            .into_iter()
            .map(|b| Assertion::ConceptMember(b, marker.clone())),
    );
    KnowledgeBase {
        tbox: [Inclusion::new(marker, rhs)].into(),
        abox,
    }
}

/// `∃R.⊤ ⊑ domain` and `⊤ ⊑ ∀R.range`.
pub fn domain_range_inclusions(r: &Role, domain: Concept, range: Concept) -> (Inclusion, Inclusion) {
    (
        Inclusion::new(Concept::some(r.clone(), Concept::Top), domain),
        Inclusion::new(Concept::Top, Concept::all(r.clone(), range)),
    )
}

/// Encodes `sub` as a subrole of `sup` by conjoining it with `sup`'s names.
pub fn subrole(sub: RoleName, sup: &Role) -> Result<Role, EncodingError> {
    if sup.names().contains(&sub) {
        return Err(EncodingError::NameCollision(sub));
    }
    let mut names: BTreeSet<RoleName> = sup.names().clone();
    names.insert(sub);
    Ok(Role::new(names).expect("nonempty"))
}

/// `A ≐ D` as the two inclusions `A ⊑ D` and `D ⊑ A`.
pub fn define_concept(a: ConceptName, d: Concept) -> [Inclusion; 2] {
    let a = Concept::Name(a);
    [Inclusion::new(a.clone(), d.clone()), Inclusion::new(d, a)]
}

/// A primitive definition `A ⊑ D`.
pub fn define_primitive(a: ConceptName, d: Concept) -> Inclusion {
    Inclusion::new(Concept::Name(a), d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_concept, parse_kb};
    use crate::semantics::tests::EXAMPLE_21;
    use crate::syntax::render_kb;

    fn c(s: &str) -> Concept {
        parse_concept(s).unwrap()
    }

    fn role(s: &str) -> Role {
        Role::atomic(RoleName::new(s).unwrap())
    }

    #[test]
    fn c_t_single_and_empty() {
        let kb = parse_kb(crate::constraint_system::tests::EXAMPLE_33).unwrap();
        assert_eq!(c_of_tbox(&kb.tbox), c("(or (not Italian) (some FRIEND Italian))"));
        assert_eq!(c_of_tbox(&BTreeSet::new()), Concept::Top);
    }

    #[test]
    fn c_t_has_one_conjunct_per_inclusion() {
        let kb = parse_kb(EXAMPLE_21).unwrap();
        let mut conjuncts = 0;
        let mut cur = c_of_tbox(&kb.tbox);
        while let Concept::And(l, r) = cur {
            assert!(matches!(*r, Concept::Or(..)));
            conjuncts += 1;
            cur = *l;
        }
        assert!(matches!(cur, Concept::Or(..)));
        assert_eq!(conjuncts + 1, kb.tbox.len());
        assert_eq!(kb.tbox.len(), 4);
    }

    #[test]
    fn transform_example_33() {
        let kb = parse_kb(crate::constraint_system::tests::EXAMPLE_33).unwrap();
        let out = inclusions_to_introduction(&kb);
        let aux = Concept::name("__aux0");
        let mut want = kb.clone();
        want.tbox = [Inclusion::new(
            aux.clone(),
            c("(and (or (not Italian) (some FRIEND Italian)) (all FRIEND __aux0))"),
        )]
        .into();
        want = want.with_instance("peter", aux.clone()).with_instance("susan", aux);
        assert_eq!(out, want);
        // output reparses to the same knowledge base
        assert_eq!(parse_kb(&render_kb(&out)).unwrap(), out);
    }

    #[test]
    fn transform_degenerate() {
        let kb = parse_kb("(instance a A)").unwrap();
        let out = inclusions_to_introduction(&kb);
        assert_eq!(out.tbox, [Inclusion::new(Concept::name("__aux0"), Concept::Top)].into());
        assert!(out.abox.contains(&Assertion::ConceptMember(
            IndividualName::new("a").unwrap(),
            Concept::name("__aux0")
        )));
    }

    #[test]
    fn transform_skips_used_names_and_roots_empty_abox() {
        let kb = parse_kb("(implies __aux0 BOTTOM)").unwrap();
        let out = inclusions_to_introduction(&kb);
        let aux1 = Concept::name("__aux1");
        assert!(out.tbox.iter().all(|i| i.lhs == aux1));
        assert_eq!(out.individuals().len(), 1);
    }

    #[test]
    fn domain_range() {
        let (d, r) = domain_range_inclusions(&role("TEACHES"), c("(or Prof Student)"), c("Course"));
        assert_eq!(d, Inclusion::new(c("(some TEACHES TOP)"), c("(or Prof Student)")));
        assert_eq!(r, Inclusion::new(Concept::Top, c("(all TEACHES Course)")));
    }

    #[test]
    fn subroles() {
        let child = role("CHILD");
        let adopted = subrole(RoleName::new("ADOPTEDCHILD'").unwrap(), &child).unwrap();
        assert_eq!(adopted.to_string(), "(and ADOPTEDCHILD' CHILD)");
        let nested = subrole(
            RoleName::new("S2").unwrap(),
            &subrole(RoleName::new("S1").unwrap(), &role("P")).unwrap(),
        )
        .unwrap();
        assert_eq!(nested.names().len(), 3);
        assert_eq!(
            subrole(RoleName::new("CHILD").unwrap(), &child),
            Err(EncodingError::NameCollision(RoleName::new("CHILD").unwrap()))
        );
    }

    #[test]
    fn definitions() {
        let a = ConceptName::new("A").unwrap();
        let [fwd, back] = define_concept(a.clone(), c("B"));
        assert_eq!(fwd, Inclusion::new(c("A"), c("B")));
        assert_eq!(back, Inclusion::new(c("B"), c("A")));
        assert_eq!(define_primitive(a, c("B")), Inclusion::new(c("A"), c("B")));
    }
}
