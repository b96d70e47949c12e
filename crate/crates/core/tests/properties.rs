mod common;

use common::{oracle_blp, oracle_ilp, tiny_instance, Shape};
use fleetopt::anneal::{solve_blp_anneal, solve_ilp_anneal, AnnealConfig};
use fleetopt::cqm::{self, Penalty};
use fleetopt::exact::{solve_blp_exact, solve_ilp_exact};
use fleetopt::ingest::{load_dir, read_assignment_csv, save_instance, write_assignment_csv};
use fleetopt::model_blp::build_blp;
use fleetopt::model_ilp::{build_ilp_with, minimal_initials, propagate_grounded, IlpOptions};
use fleetopt::{check_feasibility, Assignment, CostMatrix, FeasibilityScope, FleetType, Instance, SolveStatus};
use proptest::prelude::*;

const MULTI_DAY: Shape = Shape {
    max_flights_per_day: 5,
    max_fleets: 3,
    max_days: 3,
    airports: 4,
    max_available: 4,
};

const ONE_DAY: Shape = Shape {
    max_flights_per_day: 6,
    max_fleets: 3,
    max_days: 1,
    airports: 3,
    max_available: 3,
};

fn quick_anneal(seed: u64) -> AnnealConfig {
    AnnealConfig {
        sweeps: Some(300),
        restarts: 2,
        ..AnnealConfig::with_seed(seed)
    }
}

/// Same instance with fleets listed in reverse and flights rotated by one.
fn shuffled(inst: &Instance) -> Instance {
    let eta = inst.fleet_count();
    let m = inst.flights().len();
    let fleets: Vec<FleetType> = (0..eta)
        .map(|j| FleetType {
            id: j,
            ..inst.fleets()[eta - 1 - j].clone()
        })
        .collect();
    let order: Vec<usize> = (0..m).map(|i| (i + 1) % m).collect();
    let flights = order.iter().map(|&i| inst.flights()[i].clone()).collect();
    let cents = order
        .iter()
        .flat_map(|&i| (0..eta).map(move |j| (i, eta - 1 - j)))
        .map(|(i, j)| inst.costs().get(i, j))
        .collect();
    Instance::new(fleets, flights, CostMatrix::new(m, eta, cents).unwrap(), inst.lambda()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn effective_cost_adds_nonnegative_mismatch(seed in any::<u64>()) {
        let inst = tiny_instance(seed, MULTI_DAY);
        for i in 0..inst.flights().len() {
            for j in 0..inst.fleet_count() {
                let gap = inst.fleets()[j].capacity as f64 - inst.flights()[i].demand as f64;
                let mismatch = (inst.lambda() * 100.0 * gap * gap).round() as i64;
                prop_assert!(mismatch >= 0);
                prop_assert_eq!(inst.effective_cost(i, j), inst.costs().get(i, j) + mismatch);
            }
        }
    }

    #[test]
    fn exact_blp_matches_enumeration_and_ignores_order(seed in any::<u64>()) {
        let inst = tiny_instance(seed, MULTI_DAY);
        let report = solve_blp_exact(&build_blp(&inst), None);
        prop_assert_eq!(report.objective, oracle_blp(&inst));
        let again = solve_blp_exact(&build_blp(&shuffled(&inst)), None);
        prop_assert_eq!(report.objective, again.objective);
        if let Some(a) = &report.assignment {
            prop_assert_eq!(report.status, SolveStatus::Optimal);
            prop_assert_eq!(report.bound, report.objective);
            prop_assert!(check_feasibility(&inst, a, FeasibilityScope::Blp).is_empty());
        }
    }

    #[test]
    fn exact_ilp_certifies_optimum(seed in any::<u64>(), flight_cap in any::<bool>()) {
        let inst = tiny_instance(seed, ONE_DAY);
        let model = build_ilp_with(&inst, IlpOptions { flight_cap }).unwrap();
        let report = solve_ilp_exact(&model, None);
        prop_assert_eq!(report.objective, oracle_ilp(&inst, flight_cap));
        if report.status == SolveStatus::Optimal {
            prop_assert!(report.bound.unwrap() >= report.objective.unwrap() - 1);
        }
    }

    #[test]
    fn minimal_initials_are_tight(seed in any::<u64>(), pick in any::<u64>()) {
        let inst = tiny_instance(seed, ONE_DAY);
        let model = build_ilp_with(&inst, IlpOptions { flight_cap: false }).unwrap();
        let eta = model.fleet_count();
        let fleet_of: Vec<usize> = (0..model.flight_count())
            .map(|i| (pick.rotate_left(7 * i as u32) % eta as u64) as usize)
            .collect();
        let init = minimal_initials(&model.network, &fleet_of, eta);
        let g = propagate_grounded(&model.network, &fleet_of, &init).unwrap();
        for j in 0..eta {
            let start: i64 = (0..init.rows()).map(|a| init[(a, j)]).sum();
            let end: i64 = (0..init.rows()).map(|a| g.end_of_day[(a, j)]).sum();
            prop_assert_eq!(start, end);
        }
        for cell in 0..init.as_slice().len() {
            if init.as_slice()[cell] > 0 {
                let mut lower = init.clone();
                lower[(cell / eta, cell % eta)] -= 1;
                prop_assert!(propagate_grounded(&model.network, &fleet_of, &lower).is_err());
            }
        }
    }

    #[test]
    fn qubo_energy_decomposes(seed in any::<u64>(), mask in any::<u64>()) {
        let inst = tiny_instance(seed, MULTI_DAY);
        let model = build_blp(&inst);
        let source = cqm::from_blp(&model);
        let qubo = cqm::to_qubo(&source, Penalty::Auto).unwrap();
        let bits: Vec<bool> = (0..qubo.num_bits()).map(|b| mask.rotate_left(b as u32) & 1 == 1).collect();
        prop_assert_eq!(qubo.energy(&bits), qubo.split_energy(&bits));
        if let Some(a) = solve_blp_exact(&model, None).assignment {
            let eta = inst.fleet_count();
            let x: Vec<i64> = a.fleet_of.iter().flat_map(|&j| (0..eta).map(move |k| (k == j) as i64)).collect();
            let encoded = qubo.encode(&x).unwrap();
            prop_assert_eq!(qubo.energy(&encoded), source.objective(&x));
        }
    }

    #[test]
    fn anneal_reports_only_feasible_assignments(seed in any::<u64>()) {
        let inst = tiny_instance(seed, MULTI_DAY);
        let report = solve_blp_anneal(&build_blp(&inst), &quick_anneal(seed)).unwrap();
        if let Some(a) = &report.assignment {
            prop_assert!(check_feasibility(&inst, a, FeasibilityScope::Blp).is_empty());
            prop_assert!(report.objective >= oracle_blp(&inst));
        } else {
            prop_assert_eq!(report.status, SolveStatus::Infeasible);
        }
        let day = tiny_instance(seed, ONE_DAY);
        let model = build_ilp_with(&day, IlpOptions::default()).unwrap();
        let report = solve_ilp_anneal(&model, &quick_anneal(seed)).unwrap();
        if let Some(a) = &report.assignment {
            prop_assert!(check_feasibility(&day, a, FeasibilityScope::Ilp).is_empty());
        }
    }

    #[test]
    fn instance_and_assignment_round_trip(seed in any::<u64>(), pick in any::<u64>()) {
        let inst = tiny_instance(seed, ONE_DAY);
        let dir = tempfile::tempdir().unwrap();
        save_instance(&inst, dir.path()).unwrap();
        let back = load_dir(dir.path()).unwrap();
        prop_assert_eq!(&back, &inst);
        let eta = inst.fleet_count() as u64;
        let a = Assignment::new((0..inst.flights().len()).map(|i| ((pick >> (2 * i)) % eta) as usize).collect());
        let path = dir.path().join("assignment.csv");
        write_assignment_csv(std::fs::File::create(&path).unwrap(), &inst, &a).unwrap();
        prop_assert_eq!(read_assignment_csv(&path, &inst).unwrap().fleet_of, a.fleet_of);
    }
}
