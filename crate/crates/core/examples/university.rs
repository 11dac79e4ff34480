//! The university knowledge base: satisfiability, concept satisfiability,
//! subsumption, instance checking and retrieval.

use alcnr::services::Reasoner;
use alcnr::{parse_concept, parse_kb};

fn main() {
    let kb = parse_kb(include_str!("../fixtures/example21.kb")).unwrap();
    let r = Reasoner::default();
    let c = |s: &str| parse_concept(s).unwrap();

    println!("knowledge base: {}", r.kb_satisfiable(&kb));
    if let Some(model) = r.kb_satisfiable(&kb).model() {
        print!("{}", model.render());
    }

    // the teacher of a course is a student or a professor; john has at most
    // one degree, and professors need two (an MS and a disjoint BS)
    for (label, q) in [
        ("a professor with one degree", "(and Prof (atmost 1 DEGREE))"),
        ("a professor", "Prof"),
    ] {
        println!("{label}: {}", r.concept_satisfiable(&kb, &c(q)));
    }
    println!(
        "(some DEGREE MS) subsumed by (some DEGREE BS): {}",
        r.subsumed_by(&kb, &c("(some DEGREE MS)"), &c("(some DEGREE BS)"))
    );
    println!(
        "Student subsumed by Prof: {}",
        r.subsumed_by(&kb, &c("Student"), &c("Prof"))
    );

    let john = "john".parse().unwrap();
    println!(
        "john is a Student: {}",
        r.instance_of(&kb, &john, &c("Student")).unwrap()
    );
    println!("john is a Prof: {}", r.instance_of(&kb, &john, &c("Prof")).unwrap());
    let students: Vec<String> = r
        .instances(&kb, &c("Student"))
        .members
        .iter()
        .map(|a| a.to_string())
        .collect();
    println!("instances of Student: {}", students.join(" "));
}
