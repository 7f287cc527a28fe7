//! Generators, exhaustive enumeration of realizable families up to
//! symmetry, brute-force oracles and the counterexample searches built on
//! them.

pub mod canonical;
pub mod enumerate;
pub mod generate;
pub mod lemmas;
pub mod oracle;
pub mod search;

pub use canonical::{canonical_form, canonicalize, Symmetry};
pub use enumerate::{enumerate_families, EndpointPattern, EnumerationLimits, MeetRule, Slot, Template};
pub use generate::{generate_canonical_quasigrid, HubPattern};
pub use lemmas::{check_lemma32, probe_bounds, BoundProbe, Lemma32Report};
pub use search::{
    run_search, search_lemma41, search_lemma42, Budget, Checkpoint, RunResult, SearchLimits,
    SearchOutcome, SearchSpec,
};
