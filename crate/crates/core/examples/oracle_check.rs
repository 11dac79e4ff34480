//! Cross-check tableau verdicts against brute-force model search on tiny
//! domains.

use alcnr::oracle::{find_model_bounded, OracleOutcome};
use alcnr::services::kb_satisfiable;
use alcnr::{is_model, parse_kb};

fn main() {
    let cases = [
        "(instance a (atmost 1 R)) (related a b R) (related a c R)",
        "(instance a (atmost 2 R)) (related a b R) (related a c R)",
        "(implies A (some R A)) (instance a A) (instance a (all R (not A)))",
        "(implies TOP (atleast 2 R)) (instance a (atmost 1 R))",
        include_str!("../fixtures/example33.kb"),
    ];
    for text in cases {
        let kb = parse_kb(text).unwrap();
        let verdict = kb_satisfiable(&kb);
        let oracle = find_model_bounded(&kb, 4, 1_000_000).unwrap();
        let summary = match &oracle {
            OracleOutcome::Found(m) => {
                assert!(is_model(m, &kb).unwrap());
                assert!(verdict.is_sat(), "a model exists, the tableau must agree");
                format!("model with {} elements", m.len())
            }
            OracleOutcome::NotFound => "no model up to 4 elements".into(),
            OracleOutcome::BudgetExceeded => "search budget exhausted".into(),
        };
        let statements = text.lines().filter(|l| !l.trim_start().starts_with(';'));
        let flat = statements.flat_map(str::split_whitespace).collect::<Vec<_>>().join(" ");
        println!("{:<6} {summary:<27} {flat}", verdict.to_string());
    }
}
