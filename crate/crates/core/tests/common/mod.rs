//! Shared fixtures: tiny random instances and brute-force oracles written
//! independently of the library's solvers.
#![allow(dead_code)]

use fleetopt::{Cents, CostMatrix, FleetType, Flight, Instance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const AIRPORTS: [&str; 4] = ["SYD", "MEL", "HBA", "OOL"];

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_flights_per_day: usize,
    pub max_fleets: usize,
    pub max_days: u32,
    pub airports: usize,
    /// Upper bound on aircraft per fleet.
    pub max_available: u32,
}

pub fn tiny_instance(seed: u64, shape: Shape) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta = rng.gen_range(1..=shape.max_fleets);
    let fleets: Vec<FleetType> = (0..eta)
        .map(|j| FleetType {
            id: j,
            name: format!("F{j}"),
            capacity: rng.gen_range(100..=220),
            available: rng.gen_range(1..=shape.max_available),
        })
        .collect();
    let days = rng.gen_range(1..=shape.max_days);
    let mut flights = Vec::new();
    for day in 1..=days {
        let n = rng.gen_range(1..=shape.max_flights_per_day);
        for k in 0..n {
            let o = rng.gen_range(0..shape.airports);
            let d = (o + rng.gen_range(1..shape.airports)) % shape.airports;
            let departure: u16 = 360 + 5 * rng.gen_range(0..120);
            let arrival = departure + 5 * rng.gen_range(6..=40);
            flights.push(Flight {
                id: 11111 + k as u64,
                origin: AIRPORTS[o].into(),
                destination: AIRPORTS[d].into(),
                departure,
                arrival,
                demand: rng.gen_range(100..=210),
                day,
            });
        }
    }
    let cents: Vec<Cents> = (0..flights.len() * eta)
        .map(|_| rng.gen_range(400_000..=650_000))
        .collect();
    let lambda = [0.0, 0.5, 1.0, 2.5][rng.gen_range(0..4)];
    let costs = CostMatrix::new(flights.len(), eta, cents).unwrap();
    Instance::new(fleets, flights, costs, lambda).unwrap()
}

/// Cost plus λ·100·(Q − D)² cents, recomputed from the raw fields.
pub fn oracle_cost(inst: &Instance, fleet_of: &[usize]) -> Cents {
    fleet_of
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let f = &inst.flights()[i];
            let gap = inst.fleets()[j].capacity as f64 - f.demand as f64;
            inst.costs().get(i, j) + (inst.lambda() * 100.0 * gap * gap).round() as Cents
        })
        .sum()
}

/// Calls `visit` with every assignment of `m` flights to `eta` fleets.
pub fn for_each_assignment(m: usize, eta: usize, mut visit: impl FnMut(&[usize])) {
    let mut a = vec![0usize; m];
    loop {
        visit(&a);
        let mut k = 0;
        loop {
            if k == m {
                return;
            }
            a[k] += 1;
            if a[k] < eta {
                break;
            }
            a[k] = 0;
            k += 1;
        }
    }
}

fn within_daily_caps(inst: &Instance, fleet_of: &[usize]) -> bool {
    inst.days().iter().all(|&day| {
        (0..inst.fleet_count()).all(|j| {
            let used = inst
                .flights()
                .iter()
                .zip(fleet_of)
                .filter(|(f, &k)| f.day == day && k == j)
                .count();
            used as u32 <= inst.fleets()[j].available
        })
    })
}

/// Cheapest assignment meeting one fleet per flight and the daily fleet
/// caps, by exhaustive enumeration.
pub fn oracle_blp(inst: &Instance) -> Option<Cents> {
    let mut best: Option<Cents> = None;
    for_each_assignment(inst.flights().len(), inst.fleet_count(), |a| {
        if within_daily_caps(inst, a) {
            let c = oracle_cost(inst, a);
            best = Some(best.map_or(c, |b: Cents| b.min(c)));
        }
    });
    best
}

/// Whether fleet `j` can fly its flights from some placement of at most
/// `available` aircraft, tried exhaustively. At equal times arrivals are
/// processed before departures.
fn fleet_can_fly(inst: &Instance, fleet_of: &[usize], j: usize) -> bool {
    let codes: Vec<&str> = {
        let mut c: Vec<&str> = inst
            .flights()
            .iter()
            .flat_map(|f| [f.origin.as_str(), f.destination.as_str()])
            .collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    let at = |code: &str| codes.iter().position(|c| *c == code).unwrap();
    // (time, 0 = arrival / 1 = departure, airport)
    let mut events: Vec<(u16, u8, usize)> = Vec::new();
    for (f, &k) in inst.flights().iter().zip(fleet_of) {
        if k == j {
            events.push((f.departure, 1, at(&f.origin)));
            events.push((f.arrival, 0, at(&f.destination)));
        }
    }
    events.sort_unstable();
    let avail = inst.fleets()[j].available as usize;
    let mut placement = vec![0usize; codes.len()];
    loop {
        if placement.iter().sum::<usize>() <= avail {
            let mut ground: Vec<i64> = placement.iter().map(|&v| v as i64).collect();
            let ok = events.iter().all(|&(_, kind, a)| {
                ground[a] += if kind == 0 { 1 } else { -1 };
                ground[a] >= 0
            });
            if ok {
                return true;
            }
        }
        let mut k = 0;
        loop {
            if k == placement.len() {
                return false;
            }
            placement[k] += 1;
            if placement[k] <= avail {
                break;
            }
            placement[k] = 0;
            k += 1;
        }
    }
}

/// Cheapest single-day assignment that meets the flight caps and admits a
/// non-negative grounded schedule from some initial placement within
/// availability, by enumerating assignments and placements. Without
/// `flight_cap` only the placement limits how many flights a fleet flies.
pub fn oracle_ilp(inst: &Instance, flight_cap: bool) -> Option<Cents> {
    let mut best: Option<Cents> = None;
    for_each_assignment(inst.flights().len(), inst.fleet_count(), |a| {
        if (!flight_cap || within_daily_caps(inst, a)) && (0..inst.fleet_count()).all(|j| fleet_can_fly(inst, a, j)) {
            let c = oracle_cost(inst, a);
            best = Some(best.map_or(c, |b: Cents| b.min(c)));
        }
    });
    best
}
