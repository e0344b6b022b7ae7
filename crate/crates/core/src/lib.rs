//! Finite groupoids and quasigroups as Cayley tables: identity checking,
//! medial and trimedial predicates, exhaustive model search over small
//! orders, and a checker for equational proofs over one binary operation.

pub mod cli;
pub mod magma;
pub mod proof;
pub mod search;
pub mod term;
pub mod variety;

pub use magma::{
    check_identity, evaluate, load_table, load_tables, Assignment, CancellationProfile, CayleyTable, Check,
    CompiledIdentity, TableError,
};
pub use proof::{
    alpha_equal, builtin_script, cancel, check_script, check_step, parse_script, semantic_audit, Audit,
    Cancellation, Direction, Justification, ProofError, ProofScript, ProofStep, Verdict,
};
pub use search::{
    canonical_form, enumerate, search, verify_equivalences, verify_theorem, Constraint, SearchError, SearchReport,
    Structure,
};
pub use term::{parse_identity, parse_term, render, Dir, Identity, ParseError, Path, Substitution, Term};
pub use variety::{builtin, classify, is_medial_on, is_trimedial, subgroupoid_closure, PropertyReport, Subset};
