//! Parse a knowledge base, print it back, and normalize concepts.

use alcnr::syntax::{subconcepts, to_simple_form};
use alcnr::{parse_concept, parse_kb, render_kb};

const KB: &str = "
; definitions desugar to inclusions
(define-concept Parent (and Person (atleast 1 CHILD)))
(define-primitive Person TOP)
(related ann bob (and CHILD FAMILY))
(instance ann (and Person (or Happy Busy) (not (atmost 2 CHILD))))
";

fn main() {
    let kb = parse_kb(KB).expect("valid knowledge base");
    print!("{}", render_kb(&kb));

    let c = parse_concept("(not (and A (all R (or B (atmost 3 S)))))").unwrap();
    println!("\nconcept:     {c}");
    println!("simple form: {}", to_simple_form(&c));
    println!("size {} with {} subconcepts", c.size(), subconcepts(&c).len());

    // errors carry a line:column position
    match parse_kb("(instance a (atleast 2))") {
        Ok(_) => unreachable!(),
        Err(e) => println!("\nerror at {e}"),
    }
}
