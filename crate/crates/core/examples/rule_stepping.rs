//! Drive the propagation rules by hand instead of through the search.

use alcnr::tableau::{applicable_rule_instances, apply_rule_instance, detect_clash};
use alcnr::{parse_kb, translate_kb};

fn main() {
    let kb = parse_kb("(instance a (and (atleast 2 R) (all R (or B C)) (atmost 1 R)))").unwrap();
    let mut s = translate_kb(&kb);
    for step in 1.. {
        let instances = applicable_rule_instances(&s);
        let Some(next) = instances.first() else {
            println!("complete");
            break;
        };
        println!(
            "step {step}: {} on {} : {} ({} applicable, {} choice(s))",
            next.kind,
            next.object,
            next.concept,
            instances.len(),
            next.choice_count()
        );
        s = apply_rule_instance(&s, next, 0).unwrap();
        if let Some(clash) = detect_clash(&s) {
            // atleast created two separated successors; atmost 1 cannot merge them
            println!("clash: {} on {}", clash.kind, clash.object);
            for c in &clash.constraints {
                println!("  {c}");
            }
            break;
        }
    }
}
