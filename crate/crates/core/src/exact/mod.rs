//! Exact backends: per-day min-cost flow for the binary model,
//! branch-and-bound for the balance model, and exhaustive enumeration as a
//! test oracle.

mod bnb;
mod brute;
pub mod flow;

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::domain::{Assignment, Cents, Grid, SolveReport, SolveStatus};
use crate::model_blp::BlpModel;

pub use bnb::solve_ilp_exact;
pub use brute::{brute_force, brute_force_with, BRUTE_FORCE_LIMIT_BITS};
use flow::MinCostFlow;

/// Optimal transportation assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transport {
    pub fleet_of: Vec<usize>,
    pub cost: Cents,
}

/// Outcome of [`solve_transport`] when no optimum is returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportFailure {
    Infeasible,
    TimedOut,
}

/// Assigns every row (flight) to a column (fleet) with at most `caps[j]`
/// rows per column, minimizing total cost.
///
/// Among equal-cost optima the one with the smallest sum of fleet indices is
/// returned; arc costs are scaled by `W > Σ j` and offset by the fleet index
/// so that this secondary goal never trades against real cost.
pub fn solve_transport(
    costs: &Grid<Cents>,
    caps: &[u32],
    deadline: Option<Instant>,
) -> Result<Transport, TransportFailure> {
    let f = costs.rows();
    let eta = caps.len();
    assert_eq!(costs.cols(), eta);
    if f == 0 {
        return Ok(Transport {
            fleet_of: vec![],
            cost: 0,
        });
    }
    if caps.iter().map(|&c| c as usize).sum::<usize>() < f {
        return Err(TransportFailure::Infeasible);
    }
    let scale = (f * eta) as i64 + 1;
    let source = 0;
    let sink = f + eta + 1;
    let mut g = MinCostFlow::new(f + eta + 2);
    let mut pair_arc = Grid::filled(f, eta, 0usize);
    for i in 0..f {
        g.add_arc(source, 1 + i, 1, 0);
        for j in 0..eta {
            let c = costs[(i, j)]
                .checked_mul(scale)
                .and_then(|c| c.checked_add(j as i64))
                .expect("cost overflow in transportation scaling");
            pair_arc[(i, j)] = g.add_arc(1 + i, 1 + f + j, 1, c);
        }
    }
    for (j, &cap) in caps.iter().enumerate() {
        g.add_arc(1 + f + j, sink, cap as i64, 0);
    }
    let result = g
        .run(source, sink, f as i64, deadline)
        .ok_or(TransportFailure::TimedOut)?;
    if result.flow < f as i64 {
        return Err(TransportFailure::Infeasible);
    }
    debug_assert!(
        f > 64 || g.certificate().is_some(),
        "min-cost flow left a negative cycle"
    );
    let fleet_of: Vec<usize> = (0..f)
        .map(|i| {
            (0..eta)
                .find(|&j| g.flow_on(pair_arc[(i, j)]) == 1)
                .expect("unit supply leaves on exactly one arc")
        })
        .collect();
    let cost = fleet_of.iter().enumerate().map(|(i, &j)| costs[(i, j)]).sum();
    debug_assert_eq!(cost, result.cost / scale);
    Ok(Transport { fleet_of, cost })
}

/// Solves each day's transportation problem to optimality.
pub fn solve_blp_exact(model: &BlpModel, time_limit: Option<Duration>) -> SolveReport {
    let start = Instant::now();
    if !model.infeasible_days.is_empty() {
        return SolveReport::infeasible(start.elapsed(), 0);
    }
    let deadline = time_limit.map(|t| start + t);
    let per_day: Vec<Result<Transport, TransportFailure>> = model
        .day_problems
        .par_iter()
        .map(|dp| solve_transport(&dp.effective_cost, &dp.fleet_caps, deadline))
        .collect();
    let mut locals = Vec::with_capacity(per_day.len());
    let mut total = 0;
    for r in per_day {
        match r {
            Ok(t) => {
                total += t.cost;
                locals.push(t.fleet_of);
            }
            Err(TransportFailure::Infeasible) => {
                return SolveReport::infeasible(start.elapsed(), model.day_problems.len() as u64)
            }
            Err(TransportFailure::TimedOut) => {
                return SolveReport {
                    status: SolveStatus::TimedOut,
                    objective: None,
                    bound: None,
                    wall_time: start.elapsed(),
                    assignment: None,
                    explored: model.day_problems.len() as u64,
                }
            }
        }
    }
    SolveReport {
        status: SolveStatus::Optimal,
        objective: Some(total),
        bound: Some(total),
        wall_time: start.elapsed(),
        assignment: Some(Assignment::new(model.assemble(&locals))),
        explored: model.day_problems.len() as u64,
    }
}
