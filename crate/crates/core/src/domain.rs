//! Core data model shared by every solver.
//!
//! Money is held as integer cents ([`Cents`]) so that objective comparisons in
//! the exact solvers are free of float drift; it is converted to a real only
//! when reported.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::model_ilp::{self, Grounded};
use crate::{Error, Result};

/// Currency amount in hundredths of a unit.
pub type Cents = i64;

/// Default capacity-mismatch weight, in currency units per squared seat.
pub const DEFAULT_LAMBDA: f64 = 1.0;

pub fn cents_to_real(c: Cents) -> f64 {
    c as f64 / 100.0
}

/// Formats cents as a decimal with exactly two fraction digits.
pub fn format_cents(c: Cents) -> String {
    let sign = if c < 0 { "-" } else { "" };
    let abs = c.unsigned_abs();
    format!("{sign}{}.{:02}", abs / 100, abs % 100)
}

/// Parses a decimal with at most two fraction digits into exact cents.
pub fn parse_cents(s: &str) -> Option<Cents> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if frac.len() > 2 || !whole.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let whole: i64 = if whole.is_empty() { 0 } else { whole.parse().ok()? };
    let mut frac_val: i64 = if frac.is_empty() { 0 } else { frac.parse().ok()? };
    if frac.len() == 1 {
        frac_val *= 10;
    }
    let v = whole.checked_mul(100)?.checked_add(frac_val)?;
    Some(if neg { -v } else { v })
}

/// `λ·(capacity − demand)²` in cents, rounded to the nearest cent.
pub fn mismatch_penalty_cents(lambda: f64, capacity: u32, demand: u32) -> Cents {
    let d = capacity as i64 - demand as i64;
    (lambda * 100.0 * (d * d) as f64).round() as Cents
}

/// Dense row-major table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Grid<T> {
    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }
}

impl<T> Grid<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(rows * cols, data.len(), "grid shape mismatch");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T> std::ops::Index<(usize, usize)> for Grid<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Grid<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FleetType {
    pub id: usize,
    pub name: String,
    /// Seats per aircraft.
    pub capacity: u32,
    /// Aircraft of this type that may be used.
    pub available: u32,
}

/// A scheduled leg. Times are minutes since midnight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flight {
    pub id: u64,
    pub origin: String,
    pub destination: String,
    pub departure: u16,
    pub arrival: u16,
    pub demand: u32,
    /// 1-based day index.
    pub day: u32,
}

/// Total cost of flying each flight with each fleet type, indexed by flight
/// position within the owning [`Instance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostMatrix(Grid<Cents>);

impl CostMatrix {
    pub fn new(flights: usize, fleets: usize, cents: Vec<Cents>) -> Result<Self> {
        if cents.len() != flights * fleets {
            return Err(Error::InvalidInstance(format!(
                "cost matrix has {} entries, expected {flights}x{fleets}",
                cents.len()
            )));
        }
        if let Some(c) = cents.iter().find(|&&c| c < 0) {
            return Err(Error::InvalidInstance(format!("negative cost {}", format_cents(*c))));
        }
        Ok(Self(Grid::from_vec(flights, fleets, cents)))
    }

    pub fn get(&self, flight: usize, fleet: usize) -> Cents {
        self.0[(flight, fleet)]
    }

    pub fn grid(&self) -> &Grid<Cents> {
        &self.0
    }
}

/// Solver input. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    fleets: Vec<FleetType>,
    flights: Vec<Flight>,
    costs: CostMatrix,
    days: Vec<u32>,
    lambda: f64,
    seed: Option<u64>,
}

impl Instance {
    pub fn new(fleets: Vec<FleetType>, flights: Vec<Flight>, costs: CostMatrix, lambda: f64) -> Result<Self> {
        for (idx, fleet) in fleets.iter().enumerate() {
            if fleet.id != idx {
                return Err(Error::InvalidInstance(format!(
                    "fleet `{}` has id {}, expected dense id {idx}",
                    fleet.name, fleet.id
                )));
            }
            if fleet.capacity == 0 {
                return Err(Error::InvalidInstance(format!(
                    "fleet `{}` has zero capacity",
                    fleet.name
                )));
            }
        }
        let mut seen = BTreeSet::new();
        for f in &flights {
            if f.origin == f.destination {
                return Err(Error::InvalidInstance(format!(
                    "flight {} departs and arrives at {}",
                    f.id, f.origin
                )));
            }
            if f.departure >= 1440 || f.arrival >= 1440 {
                return Err(Error::InvalidInstance(format!(
                    "flight {} has a time outside one day",
                    f.id
                )));
            }
            if f.day == 0 {
                return Err(Error::InvalidInstance(format!("flight {} has day 0", f.id)));
            }
            if !seen.insert((f.day, f.id)) {
                return Err(Error::DuplicateFlight {
                    flight: f.id,
                    day: f.day,
                });
            }
        }
        if costs.grid().rows() != flights.len() || costs.grid().cols() != fleets.len() {
            return Err(Error::InvalidInstance(format!(
                "cost matrix is {}x{}, expected {}x{}",
                costs.grid().rows(),
                costs.grid().cols(),
                flights.len(),
                fleets.len()
            )));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidInstance(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        let days: BTreeSet<u32> = flights.iter().map(|f| f.day).collect();
        Ok(Self {
            fleets,
            flights,
            costs,
            days: days.into_iter().collect(),
            lambda,
            seed: None,
        })
    }

    /// Records the generator seed the instance came from.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn fleets(&self) -> &[FleetType] {
        &self.fleets
    }

    pub fn flights(&self) -> &[Flight] {
        &self.flights
    }

    pub fn costs(&self) -> &CostMatrix {
        &self.costs
    }

    /// Sorted distinct day indices.
    pub fn days(&self) -> &[u32] {
        &self.days
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn fleet_count(&self) -> usize {
        self.fleets.len()
    }

    pub fn fleet_by_name(&self, name: &str) -> Option<&FleetType> {
        self.fleets.iter().find(|f| f.name == name)
    }

    /// Flight positions grouped by day, in day order.
    pub fn flights_by_day(&self) -> BTreeMap<u32, Vec<usize>> {
        let mut out: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (pos, f) in self.flights.iter().enumerate() {
            out.entry(f.day).or_default().push(pos);
        }
        out
    }

    /// Cost plus capacity-mismatch penalty for one (flight, fleet) pair.
    pub fn effective_cost(&self, flight: usize, fleet: usize) -> Cents {
        let f = &self.flights[flight];
        self.costs.get(flight, fleet) + mismatch_penalty_cents(self.lambda, self.fleets[fleet].capacity, f.demand)
    }

    /// Copy of this instance restricted to the flights of a single day.
    pub fn restrict_to_day(&self, day: u32) -> Instance {
        let positions: Vec<usize> = (0..self.flights.len())
            .filter(|&p| self.flights[p].day == day)
            .collect();
        let eta = self.fleet_count();
        let mut cents = Vec::with_capacity(positions.len() * eta);
        for &p in &positions {
            cents.extend_from_slice(self.costs.grid().row(p));
        }
        Instance {
            fleets: self.fleets.clone(),
            flights: positions.iter().map(|&p| self.flights[p].clone()).collect(),
            costs: CostMatrix(Grid::from_vec(positions.len(), eta, cents)),
            days: if positions.is_empty() { vec![] } else { vec![day] },
            lambda: self.lambda,
            seed: self.seed,
        }
    }
}

/// Solver output: one fleet per flight position, plus grounded-aircraft
/// counts for the balance model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub fleet_of: Vec<usize>,
    pub grounded: Option<Grounded>,
}

impl Assignment {
    pub fn new(fleet_of: Vec<usize>) -> Self {
        Self {
            fleet_of,
            grounded: None,
        }
    }
}

/// Objective value in cents: `Σ C[i, j(i)] + λ·Σ (Q_j(i) − D_i)²`.
pub fn evaluate_cents(instance: &Instance, assignment: &Assignment) -> Result<Cents> {
    if assignment.fleet_of.len() != instance.flights.len() {
        return Err(Error::ModelInconsistency(format!(
            "assignment covers {} flights, instance has {}",
            assignment.fleet_of.len(),
            instance.flights.len()
        )));
    }
    let eta = instance.fleet_count();
    let mut total = 0;
    for (pos, &j) in assignment.fleet_of.iter().enumerate() {
        if j >= eta {
            return Err(Error::ModelInconsistency(format!(
                "flight {} assigned to unknown fleet index {j}",
                instance.flights[pos].id
            )));
        }
        total += instance.effective_cost(pos, j);
    }
    Ok(total)
}

pub fn evaluate_objective(instance: &Instance, assignment: &Assignment) -> Result<f64> {
    evaluate_cents(instance, assignment).map(cents_to_real)
}

/// `log2` of the number of raw assignments, `M·log2(η)` with `M` the total
/// flight count over all days.
pub fn search_space_log2(instance: &Instance) -> f64 {
    let eta = instance.fleet_count();
    if eta == 0 {
        return 0.0;
    }
    instance.flights.len() as f64 * (eta as f64).log2()
}

/// Per-day terms of [`search_space_log2`], in day order.
pub fn search_space_log2_by_day(instance: &Instance) -> Vec<(u32, f64)> {
    let eta = (instance.fleet_count().max(1)) as f64;
    instance
        .flights_by_day()
        .into_iter()
        .map(|(d, fl)| (d, fl.len() as f64 * eta.log2()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityScope {
    /// The binary model's constraints for one day.
    BlpDay(u32),
    /// The binary model over every day.
    Blp,
    /// The balance model, applied to each day separately.
    Ilp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ConstraintFamily {
    /// Exactly one fleet per flight.
    OneHot,
    /// Flights per fleet type per day at most the available count.
    FleetCap,
    /// Grounded-aircraft conservation at a timeline node.
    Balance,
    /// Grounded count below zero.
    NonNegative,
    /// Initial grounded aircraft over all airports at most the available count.
    InitialCap,
}

/// One violated constraint row. `index` is a flight position for
/// [`ConstraintFamily::OneHot`], a fleet index for the cap families, and a
/// timeline node (within `day`) for the balance families.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub family: ConstraintFamily,
    pub day: u32,
    pub index: usize,
    pub fleet: Option<usize>,
    /// How far the row is from holding (always positive).
    pub amount: i64,
}

/// Lists every violated constraint; empty iff the assignment is feasible.
pub fn check_feasibility(instance: &Instance, assignment: &Assignment, scope: FeasibilityScope) -> Vec<Violation> {
    let eta = instance.fleet_count();
    let mut out = Vec::new();
    let by_day = instance.flights_by_day();
    let days: Vec<u32> = match scope {
        FeasibilityScope::BlpDay(d) => vec![d],
        _ => by_day.keys().copied().collect(),
    };
    for day in days {
        let Some(positions) = by_day.get(&day) else {
            continue;
        };
        let mut load = vec![0i64; eta];
        let mut day_fleets = Vec::with_capacity(positions.len());
        let mut total = true;
        for &pos in positions {
            match assignment.fleet_of.get(pos) {
                Some(&j) if j < eta => {
                    load[j] += 1;
                    day_fleets.push(j);
                }
                _ => {
                    out.push(Violation {
                        family: ConstraintFamily::OneHot,
                        day,
                        index: pos,
                        fleet: None,
                        amount: 1,
                    });
                    total = false;
                }
            }
        }
        for (j, fleet) in instance.fleets.iter().enumerate() {
            let excess = load[j] - fleet.available as i64;
            if excess > 0 {
                out.push(Violation {
                    family: ConstraintFamily::FleetCap,
                    day,
                    index: j,
                    fleet: Some(j),
                    amount: excess,
                });
            }
        }
        if scope == FeasibilityScope::Ilp && total {
            let flights: Vec<Flight> = positions.iter().map(|&p| instance.flights[p].clone()).collect();
            let network = model_ilp::build_timeline(&flights).expect("single-day slice");
            let caps: Vec<u32> = instance.fleets.iter().map(|f| f.available).collect();
            // Only the first day's grounded map can be checked; it describes a
            // single-day network.
            let grounded = assignment.grounded.as_ref().filter(|_| by_day.len() == 1);
            out.extend(model_ilp::balance_violations(
                &network,
                &day_fleets,
                &caps,
                grounded,
                day,
            ));
        }
    }
    out
}

/// Which formulation a solve or check refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Multi-day binary model.
    Blp,
    /// Single-day model with aircraft balance.
    Ilp,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Blp => "blp",
            ModelKind::Ilp => "ilp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimedOut,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::Feasible => "Feasible",
            SolveStatus::Infeasible => "Infeasible",
            SolveStatus::TimedOut => "TimedOut",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Objective of the reported assignment, in cents.
    pub objective: Option<Cents>,
    /// Proven lower bound, in cents.
    pub bound: Option<Cents>,
    pub wall_time: Duration,
    pub assignment: Option<Assignment>,
    /// Search effort: enumerated candidates, branch-and-bound nodes, or
    /// annealing restarts, depending on the backend.
    pub explored: u64,
}

impl SolveReport {
    pub fn infeasible(wall_time: Duration, explored: u64) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            objective: None,
            bound: None,
            wall_time,
            assignment: None,
            explored,
        }
    }

    pub fn objective_real(&self) -> Option<f64> {
        self.objective.map(cents_to_real)
    }

    pub fn has_solution(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    /// Promotes a feasible heuristic result to optimal when it attains a
    /// bound proven elsewhere.
    pub fn mark_optimal_if(&mut self, bound: Cents) {
        if self.status == SolveStatus::Feasible && self.objective == Some(bound) {
            self.status = SolveStatus::Optimal;
            self.bound = Some(bound);
        }
    }
}
