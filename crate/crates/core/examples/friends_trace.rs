//! A cyclic inclusion ("every Italian has an Italian friend") that only
//! terminates thanks to blocking. Prints the derivation and the canonical
//! model, whose FRIEND relation loops back through the witness.

use alcnr::canonical_model::{extract_model, role_pairs, RolePairKind};
use alcnr::tableau::{complete, Guards, Outcome};
use alcnr::{is_model, parse_kb, translate_kb};

fn main() {
    let kb = parse_kb(include_str!("../fixtures/example33.kb")).unwrap();
    let s = translate_kb(&kb);
    println!("initial system:\n{}", s.dump());

    let done = complete(
        &s,
        &Guards {
            trace_capacity: None,
            ..Guards::default()
        },
    );
    print!("{}", done.trace.render());
    println!(
        "{} variables, {} blocking event(s), {} branches",
        done.stats.variables_created, done.stats.blocking_events, done.stats.branches
    );

    let Outcome::Satisfiable(completion) = done.outcome else {
        panic!("the friends example is satisfiable");
    };
    for ((from, p, to), kind) in role_pairs(&completion) {
        let how = match kind {
            RolePairKind::Explicit => "explicit".to_string(),
            RolePairKind::Implicit(w) => format!("implicit via {w}"),
        };
        println!("{p}({from}, {to}) {how}");
    }
    let (model, _) = extract_model(&completion).unwrap();
    print!("\n{}", model.render());
    println!("is a model: {}", is_model(&model, &kb).unwrap());
}
