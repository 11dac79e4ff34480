//! A tableau reasoner for the description logic ALCNR: concepts built from
//! names with negation, conjunction, disjunction, value and existential
//! restrictions, number restrictions, and role conjunction, over knowledge
//! bases with general (possibly cyclic) inclusions and ABox assertions under
//! the unique name assumption.
//!
//! Satisfiability is decided by expanding a constraint system with
//! propagation rules until it is complete or contains a clash. Concept
//! satisfiability, subsumption and instance checking reduce to it. A
//! satisfiable knowledge base yields a finite canonical model.
//!
//! ```
//! use alcnr::{parse_kb, parse_concept, services};
//!
//! let kb = parse_kb("(implies Italian (some FRIEND Italian)) (instance sofia Italian)").unwrap();
//! assert!(services::kb_satisfiable(&kb).is_sat());
//! let c = parse_concept("(some FRIEND Italian)").unwrap();
//! let entailed = services::instance_of(&kb, &"sofia".parse().unwrap(), &c).unwrap();
//! assert_eq!(entailed, services::Entailment::True);
//! ```

pub mod canonical_model;
pub mod cli;
pub mod constraint_system;
pub mod encodings;
pub mod oracle;
pub mod parser;
pub mod semantics;
pub mod services;
pub mod syntax;
pub mod tableau;

pub use constraint_system::{translate_kb, ConstraintSystem};
pub use semantics::{eval_concept, is_model, Interpretation};
pub use services::{Entailment, Reasoner, Verdict};
pub use syntax::{parse_concept, parse_kb, render_kb, Concept, KnowledgeBase, Role};
pub use tableau::{complete, Guards};
