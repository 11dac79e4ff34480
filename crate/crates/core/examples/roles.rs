//! Domain/range restrictions and subroles expressed with inclusions and
//! role conjunction.

use alcnr::encodings::{domain_range_inclusions, subrole};
use alcnr::services::{instance_of, subsumed_by};
use alcnr::syntax::RoleName;
use alcnr::{parse_concept, KnowledgeBase, Role};

fn main() {
    let c = |s: &str| parse_concept(s).unwrap();
    let teaches = Role::atomic(RoleName::new("TEACHES").unwrap());
    let (dom, rng) = domain_range_inclusions(&teaches, c("(or Prof Student)"), c("Course"));
    println!("{} implies {}", dom.lhs, dom.rhs);
    println!("{} implies {}", rng.lhs, rng.rhs);

    let kb = KnowledgeBase::new()
        .with_inclusion(dom.lhs, dom.rhs)
        .with_inclusion(rng.lhs, rng.rhs)
        .with_related("ada", "logic", teaches.clone())
        .with_instance("ada", c("(not Student)"));
    println!(
        "ada is a Prof: {}",
        instance_of(&kb, &"ada".parse().unwrap(), &c("Prof")).unwrap()
    );
    println!(
        "logic is a Course: {}",
        instance_of(&kb, &"logic".parse().unwrap(), &c("Course")).unwrap()
    );

    // an adopted child is in particular a child
    let child = Role::atomic(RoleName::new("CHILD").unwrap());
    let adopted = subrole(RoleName::new("ADOPTEDCHILD'").unwrap(), &child).unwrap();
    println!("adopted child role: {adopted}");
    let q = |r: &Role| parse_concept(&format!("(some {r} Happy)")).unwrap();
    println!(
        "(some {adopted} Happy) subsumed by (some CHILD Happy): {}",
        subsumed_by(&KnowledgeBase::new(), &q(&adopted), &q(&child))
    );
}
