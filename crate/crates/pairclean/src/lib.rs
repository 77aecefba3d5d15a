//! Instance generation, differential auditing, counterexample shrinking,
//! and reporting around the `pairclean-core` decision procedure.
//!
//! The core crate claims SAT iff pair cleaning leaves a nonempty fixpoint.
//! One direction of that claim is enforced by construction; the other is
//! checked here empirically: [`audit`] runs the claim against a ground
//! truth solver over seeded instance batches, [`minimize`] shrinks any
//! disagreement to a 1-minimal formula, [`report`] renders deterministic
//! CSV/JSON artifacts, and [`scaling`] measures how cleaning cost grows
//! with the number of clause groups.

#![forbid(unsafe_code)]

pub mod audit;
pub mod gen;
pub mod minimize;
pub mod report;
pub mod scaling;
