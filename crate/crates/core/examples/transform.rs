//! Fold a TBox into one concept and rewrite a knowledge base so that its
//! only inclusion has a concept name on the left.

use alcnr::encodings::{c_of_tbox, inclusions_to_introduction};
use alcnr::services::kb_satisfiable;
use alcnr::{parse_kb, render_kb};

fn main() {
    for path in ["example21.kb", "example33.kb"] {
        let text = match path {
            "example21.kb" => include_str!("../fixtures/example21.kb"),
            _ => include_str!("../fixtures/example33.kb"),
        };
        let kb = parse_kb(text).unwrap();
        println!("== {path}");
        println!("C_T = {}", c_of_tbox(&kb.tbox));
        let out = inclusions_to_introduction(&kb);
        print!("{}", render_kb(&out));
        println!(
            "original {}, transformed {}\n",
            kb_satisfiable(&kb),
            kb_satisfiable(&out)
        );
    }
}
