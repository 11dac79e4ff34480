//! Seeded generators for small random knowledge bases and interpretations.
#![allow(dead_code)]

use alcnr::semantics::Interpretation;
use alcnr::syntax::{ConceptName, Inclusion, RoleName};
use alcnr::{Concept, KnowledgeBase, Role};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CONCEPTS: [&str; 3] = ["A", "B", "C"];
pub const ROLES: [&str; 2] = ["R", "S"];
pub const INDIVIDUALS: [&str; 3] = ["a", "b", "c"];
pub const MAX_NUMBER: u64 = 3;
pub const MAX_DEPTH: usize = 3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn role(rng: &mut ChaCha8Rng) -> Role {
    if rng.gen_ratio(1, 6) {
        Role::new(ROLES.iter().map(|r| RoleName::new(*r).unwrap())).unwrap()
    } else {
        Role::atomic(RoleName::new(*ROLES.choose(rng).unwrap()).unwrap())
    }
}

/// A random concept of nesting depth at most `depth`.
pub fn concept(rng: &mut ChaCha8Rng, depth: usize) -> Concept {
    let leaf = depth == 0 || rng.gen_ratio(1, 3);
    if leaf {
        return match rng.gen_range(0..12) {
            0 => Concept::Top,
            1 => Concept::Bottom,
            2..=7 => Concept::name(CONCEPTS.choose(rng).unwrap()),
            _ => Concept::not(Concept::name(CONCEPTS.choose(rng).unwrap())),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..8) {
        0 => Concept::not(concept(rng, d)),
        1 => Concept::and(concept(rng, d), concept(rng, d)),
        2 => Concept::or(concept(rng, d), concept(rng, d)),
        3 => Concept::all(role(rng), concept(rng, d)),
        4 => Concept::some(role(rng), concept(rng, d)),
        5 => Concept::AtLeast(rng.gen_range(0..=MAX_NUMBER), role(rng)),
        6 => Concept::AtMost(rng.gen_range(0..=MAX_NUMBER), role(rng)),
        _ => Concept::name(CONCEPTS.choose(rng).unwrap()),
    }
}

/// A random knowledge base over at most 3 concept names, 2 role names and
/// 3 individuals.
pub fn kb(seed: u64) -> KnowledgeBase {
    let mut rng = rng(seed);
    let mut kb = KnowledgeBase::new();
    for _ in 0..rng.gen_range(0..=2) {
        let lhs = concept(&mut rng, 2);
        let rhs = concept(&mut rng, MAX_DEPTH);
        kb = kb.with_inclusion(lhs, rhs);
    }
    let n_ind = rng.gen_range(0..=INDIVIDUALS.len());
    let inds = &INDIVIDUALS[..n_ind];
    if n_ind > 0 {
        for _ in 0..rng.gen_range(1..=3) {
            let c = concept(&mut rng, MAX_DEPTH);
            kb = kb.with_instance(inds.choose(&mut rng).unwrap(), c);
        }
        for _ in 0..rng.gen_range(0..=2) {
            let (a, b) = (inds.choose(&mut rng).unwrap(), inds.choose(&mut rng).unwrap());
            kb = kb.with_related(a, b, role(&mut rng));
        }
    }
    kb
}

/// A random TBox of up to 3 inclusions.
pub fn tbox(rng: &mut ChaCha8Rng) -> Vec<Inclusion> {
    (0..rng.gen_range(0..=3))
        .map(|_| Inclusion::new(concept(rng, 2), concept(rng, 2)))
        .collect()
}

/// A random interpretation with 1 to `max` elements over the generator's
/// names, with every individual assigned.
pub fn interpretation(rng: &mut ChaCha8Rng, max: usize) -> Interpretation {
    let size = rng.gen_range(INDIVIDUALS.len().min(max)..=max).max(1);
    let labels: Vec<String> = (0..size).map(|e| format!("e{e}")).collect();
    let mut i = Interpretation::new(labels).unwrap();
    for (e, a) in INDIVIDUALS.iter().take(size).enumerate() {
        i.assign(a.parse().unwrap(), e).unwrap();
    }
    for a in CONCEPTS {
        let ext: Vec<usize> = (0..size).filter(|_| rng.gen_bool(0.5)).collect();
        i.set_concept(ConceptName::new(a).unwrap(), ext);
    }
    for p in ROLES {
        let pairs: Vec<(usize, usize)> = (0..size)
            .flat_map(|x| (0..size).map(move |y| (x, y)))
            .filter(|_| rng.gen_bool(0.35))
            .collect();
        i.set_role(RoleName::new(p).unwrap(), pairs);
    }
    i
}
