//! Decision procedure for uniform-width k-CNF built on clause-group value sets.
//!
//! The pipeline: a formula is bucketed into clause groups (one per variable
//! tuple), groups are combined into (k+1)-wise combinations, each combination
//! carries the set of local assignments consistent with its member clauses,
//! and pairwise clearing removes rows that lack support in some other set
//! until a greatest fixpoint is reached. The structure is empty at the
//! fixpoint iff every set is empty; the solver claims SAT on a nonempty
//! fixpoint and can attempt to extract and verify concrete models.
//!
//! `no_std` + `alloc`; all IO lives in the companion crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bits;
pub mod clearing;
pub mod formula;
pub mod groups;
pub mod oracle;
pub mod solver;
pub mod structure;
