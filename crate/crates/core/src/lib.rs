//! Energy-budgeted speed-scaling scheduling for multiprocessor jobs.
//!
//! Processors run at adjustable speed `s` and draw power `s^alpha`; a job
//! spread over `m_j` processors splits its work evenly and runs all of them
//! at the same speed. Given a total energy budget, the crate computes
//! closed-form lower bounds on the sum of completion times, constructs
//! feasible schedules for rigid, moldable and two-processor dedicated jobs,
//! and cross-checks the proven approximation ratios against brute-force
//! oracles on small instances.
//!
//! Modules:
//! - [`model`]: domain types, instance validation, energy accounting.
//! - [`duropt`]: the weighted convex duration program and its solvers.
//! - [`sequencing`]: ordering rules and per-sequence lower bounds.
//! - [`listsched`]: list scheduling and the schedule verifier.
//! - [`dedicated2`]: the two-processor dedicated pipeline.
//! - [`gadgets`]: hardness-reduction and random instance generators.
//! - [`oracle`]: exhaustive and numerical cross-checks, ratio sweeps.

pub mod dedicated2;
pub mod duropt;
pub mod gadgets;
pub mod listsched;
pub mod model;
pub mod oracle;
pub mod sequencing;

mod error;

pub use error::{Error, Result};
pub use model::{Alpha, Demand, Instance, Job, JobId, JobKind, Piece, Schedule};
pub use sequencing::{LbReport, Permutation};
