use std::time::Instant;

use crate::domain::{search_space_log2, Assignment, Cents, Instance, ModelKind, SolveReport, SolveStatus};
use crate::model_ilp::{self, IlpOptions};
use crate::{Error, Result};

/// Largest search space, in bits, that [`brute_force`] will enumerate.
pub const BRUTE_FORCE_LIMIT_BITS: f64 = 24.0;

pub fn brute_force(instance: &Instance, kind: ModelKind) -> Result<SolveReport> {
    brute_force_with(instance, kind, IlpOptions::default())
}

/// Enumerates every one of the `η^M` assignments and keeps the cheapest
/// feasible one (the lexicographically smallest among ties). For the balance
/// model feasibility is decided per day through the minimal initial
/// placement.
pub fn brute_force_with(instance: &Instance, kind: ModelKind, ilp: IlpOptions) -> Result<SolveReport> {
    let bits = search_space_log2(instance);
    if bits > BRUTE_FORCE_LIMIT_BITS {
        return Err(Error::TooLarge {
            bits,
            limit: BRUTE_FORCE_LIMIT_BITS,
        });
    }
    let start = Instant::now();
    let m = instance.flights().len();
    let eta = instance.fleet_count();
    if eta == 0 && m > 0 {
        return Ok(SolveReport::infeasible(start.elapsed(), 0));
    }
    let caps: Vec<i64> = instance.fleets().iter().map(|f| f.available as i64).collect();
    let days: Vec<(Vec<usize>, Option<model_ilp::TimelineNetwork>)> = instance
        .flights_by_day()
        .into_values()
        .map(|positions| {
            let network = (kind == ModelKind::Ilp).then(|| {
                let flights: Vec<_> = positions.iter().map(|&p| instance.flights()[p].clone()).collect();
                model_ilp::build_timeline(&flights).expect("single-day slice")
            });
            (positions, network)
        })
        .collect();
    let check_caps = kind == ModelKind::Blp || ilp.flight_cap;

    let ec: Vec<Vec<Cents>> = (0..m)
        .map(|i| (0..eta).map(|j| instance.effective_cost(i, j)).collect())
        .collect();
    let mut fleet_of = vec![0usize; m];
    let mut best: Option<(Cents, Vec<usize>)> = None;
    let mut explored = 0u64;
    let mut local = Vec::new();
    loop {
        explored += 1;
        let feasible = days.iter().all(|(positions, network)| {
            if check_caps {
                let mut load = vec![0i64; eta];
                for &p in positions {
                    load[fleet_of[p]] += 1;
                }
                if load.iter().zip(&caps).any(|(l, c)| l > c) {
                    return false;
                }
            }
            match network {
                Some(net) => {
                    local.clear();
                    local.extend(positions.iter().map(|&p| fleet_of[p]));
                    model_ilp::required_aircraft(net, &local, eta)
                        .iter()
                        .zip(&caps)
                        .all(|(need, cap)| need <= cap)
                }
                None => true,
            }
        });
        if feasible {
            let cost: Cents = fleet_of.iter().enumerate().map(|(i, &j)| ec[i][j]).sum();
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, fleet_of.clone()));
            }
        }
        if !advance(&mut fleet_of, eta) {
            break;
        }
    }
    let wall_time = start.elapsed();
    Ok(match best {
        Some((cost, fleet_of)) => {
            let grounded = (kind == ModelKind::Ilp && days.len() == 1).then(|| {
                let net = days[0].1.as_ref().expect("network built for balance model");
                let init = model_ilp::minimal_initials(net, &fleet_of, eta);
                model_ilp::propagate_grounded(net, &fleet_of, &init).expect("minimal initials are feasible")
            });
            SolveReport {
                status: SolveStatus::Optimal,
                objective: Some(cost),
                bound: Some(cost),
                wall_time,
                assignment: Some(Assignment { fleet_of, grounded }),
                explored,
            }
        }
        None => SolveReport::infeasible(wall_time, explored),
    })
}

/// Odometer step with the last flight fastest; false once it wraps.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
