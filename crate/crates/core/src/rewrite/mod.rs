//! Decomposition engine: rewrite rules, lowering to a target gate set, and
//! resource counting.

mod engine;
pub mod rules;

pub use engine::{
    decompose_to_gateset, resource_count, DecomposeError, ResourceCount, DEFAULT_MAX_DEPTH,
};
pub use rules::{apply_rule, rules, structural_expansion, AncillaSource, Counter, RewriteRule};
