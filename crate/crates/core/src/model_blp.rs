//! Multi-day binary model.
//!
//! Because every decision variable is binary, the quadratic mismatch penalty
//! `λ·(Q_j − D_i)²·x_ij` is linear in `x_ij`; it is folded into a per-pair
//! effective cost. The one-hot and fleet-cap rows only couple variables of
//! the same day, so the model splits into one transportation problem per day.

use crate::domain::{Cents, Grid, Instance};

/// One day's transportation problem: unit supply per flight, fleet `j`
/// absorbs at most `fleet_caps[j]` flights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DayProblem {
    pub day: u32,
    /// Flight positions within the source instance.
    pub flights: Vec<usize>,
    pub flight_ids: Vec<u64>,
    /// Flights (in `flights` order) × fleets.
    pub effective_cost: Grid<Cents>,
    pub fleet_caps: Vec<u32>,
}

impl DayProblem {
    pub fn flight_count(&self) -> usize {
        self.flights.len()
    }

    pub fn fleet_count(&self) -> usize {
        self.fleet_caps.len()
    }

    /// Whether the caps can absorb every flight.
    pub fn is_capacity_feasible(&self) -> bool {
        self.fleet_caps.iter().map(|&c| c as usize).sum::<usize>() >= self.flights.len()
    }

    /// Objective of a local assignment (fleet per flight in `flights` order).
    pub fn cost_of(&self, fleet_of: &[usize]) -> Cents {
        fleet_of
            .iter()
            .enumerate()
            .map(|(i, &j)| self.effective_cost[(i, j)])
            .sum()
    }

    pub fn respects_caps(&self, fleet_of: &[usize]) -> bool {
        let mut load = vec![0u32; self.fleet_count()];
        for &j in fleet_of {
            load[j] += 1;
        }
        load.iter().zip(&self.fleet_caps).all(|(l, c)| l <= c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlpModel {
    pub day_problems: Vec<DayProblem>,
    pub fleet_names: Vec<String>,
    pub flight_count: usize,
    /// `Σ_d |F_d|·η`.
    pub variable_count: usize,
    /// `Σ_d |F_d| + η·|D|`.
    pub constraint_count: usize,
    /// Days whose total availability is below their flight count.
    pub infeasible_days: Vec<u32>,
}

impl BlpModel {
    pub fn fleet_count(&self) -> usize {
        self.fleet_names.len()
    }

    /// Lifts per-day local assignments back to instance flight positions.
    pub fn assemble(&self, per_day: &[Vec<usize>]) -> Vec<usize> {
        let mut out = vec![0; self.flight_count];
        for (dp, local) in self.day_problems.iter().zip(per_day) {
            for (&pos, &j) in dp.flights.iter().zip(local) {
                out[pos] = j;
            }
        }
        out
    }

    /// Splits an instance-level assignment into per-day local ones.
    pub fn split(&self, fleet_of: &[usize]) -> Vec<Vec<usize>> {
        self.day_problems
            .iter()
            .map(|dp| dp.flights.iter().map(|&p| fleet_of[p]).collect())
            .collect()
    }
}

pub fn build_blp(instance: &Instance) -> BlpModel {
    let eta = instance.fleet_count();
    let caps: Vec<u32> = instance.fleets().iter().map(|f| f.available).collect();
    let mut day_problems = Vec::new();
    let mut infeasible_days = Vec::new();
    for (day, positions) in instance.flights_by_day() {
        let mut ec = Grid::filled(positions.len(), eta, 0);
        for (i, &p) in positions.iter().enumerate() {
            for j in 0..eta {
                ec[(i, j)] = instance.effective_cost(p, j);
            }
        }
        let dp = DayProblem {
            day,
            flight_ids: positions.iter().map(|&p| instance.flights()[p].id).collect(),
            flights: positions,
            effective_cost: ec,
            fleet_caps: caps.clone(),
        };
        if !dp.is_capacity_feasible() {
            infeasible_days.push(day);
        }
        day_problems.push(dp);
    }
    let m = instance.flights().len();
    BlpModel {
        day_problems,
        fleet_names: instance.fleets().iter().map(|f| f.name.clone()).collect(),
        flight_count: m,
        variable_count: m * eta,
        constraint_count: m + eta * instance.days().len(),
        infeasible_days,
    }
}

/// The independent per-day subproblems of a model.
pub fn decompose_by_day(model: &BlpModel) -> Vec<DayProblem> {
    model.day_problems.clone()
}
