//! Airline fleet assignment toolkit.
//!
//! Two models are supported:
//!
//! * a multi-day binary model ([`model_blp`]) where every flight gets exactly
//!   one fleet type and each day's usage of a fleet type is capped, and
//! * a single-day integer model ([`model_ilp`]) that adds aircraft balance
//!   over a per-airport timeline of arrival and departure events.
//!
//! Both can be solved exactly ([`exact`]: min-cost flow per day for the
//! binary model, branch-and-bound for the integer model) or heuristically by
//! compiling them to a constrained quadratic model ([`cqm`]) and running
//! multi-restart simulated annealing over its penalty form ([`anneal`]).
//! [`ingest`] reads and writes the CSV instance format and generates seeded
//! synthetic instances; [`bench`] compares the two backends over a ladder of
//! instance sizes.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod anneal;
pub mod bench;
pub mod cli;
pub mod cqm;
pub mod domain;
mod error;
pub mod exact;
pub mod ingest;
pub mod model_blp;
pub mod model_ilp;

pub use domain::{
    check_feasibility, evaluate_cents, evaluate_objective, search_space_log2, Assignment, Cents, CostMatrix,
    FeasibilityScope, FleetType, Flight, Instance, ModelKind, SolveReport, SolveStatus, Violation,
};
pub use error::{Error, Result};
