//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line per criterion and fails at the end if any did.
//!
//! `cargo test --release --test acceptance -- --nocapture`

mod common;

use std::time::{Duration, Instant};

use common::{oracle_blp, oracle_ilp, tiny_instance, Shape};
use fleetopt::anneal::{solve_blp_anneal, solve_ilp_anneal, AnnealConfig};
use fleetopt::bench::{self, BenchSettings};
use fleetopt::cqm::{self, Penalty};
use fleetopt::exact::{brute_force, brute_force_with, solve_blp_exact, solve_ilp_exact};
use fleetopt::ingest::{generate_instance, FleetSpec, GeneratorConfig, LADDER_SIZES};
use fleetopt::model_blp::build_blp;
use fleetopt::model_ilp::{build_ilp_with, propagate_grounded, IlpModel, IlpOptions};
use fleetopt::{
    check_feasibility, search_space_log2, Assignment, FeasibilityScope, Instance, ModelKind, SolveReport, SolveStatus,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// Seeds whose instance fits `max_bits`, in order.
fn instances(shape: Shape, count: usize, max_bits: f64, salt: u64) -> Vec<(u64, Instance)> {
    (0..)
        .map(|k| salt * 1_000_000 + k)
        .map(|seed| (seed, tiny_instance(seed, shape)))
        .filter(|(_, inst)| search_space_log2(inst) <= max_bits)
        .take(count)
        .collect()
}

fn criterion_1() -> Verdict {
    let shape = Shape {
        max_flights_per_day: 8,
        max_fleets: 3,
        max_days: 2,
        airports: 4,
        max_available: 8,
    };
    let mut mismatches = Vec::new();
    for (seed, inst) in instances(shape, 200, 16.0, 1) {
        let exact = solve_blp_exact(&build_blp(&inst), None);
        let brute = brute_force(&inst, ModelKind::Blp).unwrap();
        let oracle = oracle_blp(&inst);
        if exact.objective != brute.objective || exact.objective != oracle {
            mismatches.push(seed);
        }
    }
    verdict(
        mismatches.is_empty(),
        format!("200 instances, mismatching seeds {mismatches:?}"),
    )
}

/// Per-fleet conservation and non-negativity of a reported grounded map,
/// re-derived by propagation from its initial counts.
fn conservation_violations(model: &IlpModel, assignment: &Assignment) -> usize {
    let Some(g) = &assignment.grounded else {
        return 1;
    };
    let mut bad = 0;
    match propagate_grounded(&model.network, &assignment.fleet_of, &g.initial) {
        Ok(again) if again == *g => {}
        _ => bad += 1,
    }
    for j in 0..model.fleet_count() {
        let start: i64 = (0..g.initial.rows()).map(|a| g.initial[(a, j)]).sum();
        let end: i64 = (0..g.end_of_day.rows()).map(|a| g.end_of_day[(a, j)]).sum();
        if start != end || start > model.fleet_caps[j] as i64 {
            bad += 1;
        }
    }
    bad + g
        .at_node
        .as_slice()
        .iter()
        .chain(g.initial.as_slice())
        .filter(|&&v| v < 0)
        .count()
}

#[derive(Default)]
struct Conservation {
    solves: usize,
    violations: usize,
}

impl Conservation {
    fn record(&mut self, model: &IlpModel, report: &SolveReport) {
        if report.status == SolveStatus::Optimal {
            self.solves += 1;
            self.violations += conservation_violations(model, report.assignment.as_ref().unwrap());
        }
    }
}

fn criterion_2(conservation: &mut Conservation) -> Verdict {
    let shape = Shape {
        max_flights_per_day: 6,
        max_fleets: 3,
        max_days: 1,
        airports: 3,
        max_available: 3,
    };
    let mut mismatches = Vec::new();
    let mut infeasible = 0;
    for (seed, inst) in instances(shape, 200, f64::INFINITY, 2) {
        for flight_cap in [true, false] {
            let options = IlpOptions { flight_cap };
            let model = build_ilp_with(&inst, options).unwrap();
            let exact = solve_ilp_exact(&model, None);
            conservation.record(&model, &exact);
            let oracle = oracle_ilp(&inst, flight_cap);
            let brute = brute_force_with(&inst, ModelKind::Ilp, options).unwrap();
            let verdict_agrees = (exact.status == SolveStatus::Infeasible) == oracle.is_none();
            if !verdict_agrees || exact.objective != oracle || brute.objective != oracle {
                mismatches.push((seed, flight_cap));
            }
            infeasible += oracle.is_none() as usize;
        }
    }
    verdict(
        mismatches.is_empty(),
        format!("200 instances x 2 cap settings ({infeasible} infeasible), mismatches {mismatches:?}"),
    )
}

fn criterion_3() -> Verdict {
    let expected = [
        (1288, 350),
        (2576, 672),
        (5152, 1316),
        (7728, 1960),
        (10304, 2604),
        (30912, 7756),
        (51520, 12908),
        (103040, 25788),
    ];
    let mut wrong = Vec::new();
    for (&n, &want) in LADDER_SIZES.iter().zip(&expected) {
        let model = build_blp(&generate_instance(&GeneratorConfig::new(n, 7, 0)).unwrap());
        if (model.variable_count, model.constraint_count) != want {
            wrong.push((n, model.variable_count, model.constraint_count));
        }
    }
    for (i, &n) in LADDER_SIZES.iter().take(5).enumerate() {
        let inst = generate_instance(&GeneratorConfig::new(n, 1, i as u64)).unwrap();
        for flight_cap in [true, false] {
            let m = build_ilp_with(&inst, IlpOptions { flight_cap }).unwrap();
            let (f, eta, nodes) = (m.flight_count(), m.fleet_count(), m.network.node_count());
            let rows = f + if flight_cap { eta } else { 0 } + nodes * eta;
            if m.variable_count != f * eta + nodes * eta || m.constraint_count != rows {
                wrong.push((n, m.variable_count, m.constraint_count));
            }
        }
    }
    verdict(
        wrong.is_empty(),
        format!("8 binary-model sizes, 5 balance-model sizes, wrong {wrong:?}"),
    )
}

fn criterion_4() -> Verdict {
    let shape = Shape {
        max_flights_per_day: 3,
        max_fleets: 3,
        max_days: 1,
        airports: 4,
        max_available: 3,
    };
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut seed = 4_000_000u64;
    while checked < 100 {
        seed += 1;
        let inst = tiny_instance(seed, shape);
        let model = build_blp(&inst);
        let source = cqm::from_blp(&model);
        let qubo = cqm::to_qubo(&source, Penalty::Auto).unwrap();
        let n = qubo.num_bits();
        if n > 12 {
            continue;
        }
        checked += 1;
        let mut best = (i64::MAX, 0u32);
        for mask in 0u32..1 << n {
            let bits: Vec<bool> = (0..n).map(|b| mask >> b & 1 == 1).collect();
            let e = qubo.energy(&bits);
            if e < best.0 {
                best = (e, mask);
            }
        }
        let bits: Vec<bool> = (0..n).map(|b| best.1 >> b & 1 == 1).collect();
        let values = qubo.decode(&bits);
        let expected = brute_force(&inst, ModelKind::Blp).unwrap().objective;
        let ok = match expected {
            Some(opt) => {
                source.is_feasible(&values) && source.objective(&values) == opt && opt == oracle_blp(&inst).unwrap()
            }
            None => !source.is_feasible(&values),
        };
        if !ok {
            failures.push(seed);
        }
    }
    verdict(
        failures.is_empty(),
        format!("100 toys up to 12 bits, failing seeds {failures:?}"),
    )
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let runs: Vec<(usize, u64)> = (0..20)
        .map(|s| (92, s))
        .chain((0..10).map(|s| (184, 100 + s)))
        .collect();
    let mut gaps = Vec::new();
    let mut infeasible = Vec::new();
    for (fpd, seed) in runs {
        let inst = generate_instance(&GeneratorConfig::new(fpd, 7, seed)).unwrap();
        let model = build_blp(&inst);
        let exact = solve_blp_exact(&model, None);
        let annealed = solve_blp_anneal(&model, &AnnealConfig::default()).unwrap();
        let feasible = annealed
            .assignment
            .as_ref()
            .is_some_and(|a| check_feasibility(&inst, a, FeasibilityScope::Blp).is_empty());
        match (exact.objective, annealed.objective) {
            (Some(opt), Some(got)) if feasible => gaps.push((got - opt) as f64 / opt as f64),
            _ => infeasible.push((fpd, seed)),
        }
    }
    let elapsed = start.elapsed();
    let max = gaps.iter().copied().fold(0.0, f64::max);
    let med = median(&mut gaps.clone());
    let pass = infeasible.is_empty() && med <= 0.01 && max <= 0.03 && elapsed < Duration::from_secs(600);
    verdict(
        pass,
        format!(
            "30 runs, infeasible {infeasible:?}, median gap {:.4}%, max gap {:.4}%, {:.1}s",
            100.0 * med,
            100.0 * max,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_6(conservation: &mut Conservation) -> Verdict {
    let mut hits = 0;
    for seed in 0..20 {
        let inst = generate_instance(&GeneratorConfig::new(46, 1, seed)).unwrap();
        let model = build_ilp_with(&inst, IlpOptions::default()).unwrap();
        let exact = solve_ilp_exact(&model, None);
        conservation.record(&model, &exact);
        let annealed = solve_ilp_anneal(&model, &AnnealConfig::default()).unwrap();
        if annealed.objective.is_some() && annealed.objective == exact.objective {
            hits += 1;
        }
    }
    // Too few aircraft for any restart to place: the cost cell must carry the
    // status word and the gap cell stay empty.
    let mut starved = GeneratorConfig::new(46, 1, 7);
    starved.fleet_spec = (0..4)
        .map(|j| FleetSpec {
            name: format!("T{j}"),
            capacity: 150 + 10 * j,
            available: 2,
        })
        .collect();
    let settings = BenchSettings {
        model: ModelKind::Ilp,
        ..BenchSettings::default()
    };
    let rows = bench::run_suite(&[starved], &settings).unwrap();
    let csv = bench::render_csv(&rows);
    let line = csv.lines().nth(1).unwrap_or_default().to_string();
    let cells: Vec<&str> = line.rsplitn(6, ',').collect();
    let rendered = rows[0].anneal.status == SolveStatus::Infeasible
        && cells.len() == 6
        && cells[3] == "Infeasible"
        && cells[0].is_empty();
    verdict(
        hits >= 16 && rendered,
        format!("optimum reached in {hits}/20 seeds; infeasible row `{line}`"),
    )
}

fn criterion_7(conservation: &Conservation) -> Verdict {
    verdict(
        conservation.solves > 0 && conservation.violations == 0,
        format!(
            "{} optimal balance-model solves, {} violations",
            conservation.solves, conservation.violations
        ),
    )
}

fn strip_times(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut cells: Vec<&str> = l.split(',').collect();
            let n = cells.len();
            cells.drain(n - 3..n - 1);
            cells.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_8() -> Verdict {
    let configs = bench::ladder(ModelKind::Blp, false, 0);
    let settings = BenchSettings::default();
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let rows = bench::run_suite(&configs, &settings).unwrap();
        bench::write_report(&rows, &configs, &settings, dir.path()).unwrap();
        let csv = std::fs::read_to_string(dir.path().join(bench::CSV_FILE)).unwrap();
        let json = std::fs::read_to_string(dir.path().join(bench::JSON_FILE)).unwrap();
        outputs.push((strip_times(&csv), json));
    }
    let same = outputs[0] == outputs[1];
    verdict(
        same,
        format!(
            "default ladder ({} rows) run twice, csv and json identical: {same}",
            configs.len()
        ),
    )
}

fn criterion_9() -> Verdict {
    let shape = Shape {
        max_flights_per_day: 5,
        max_fleets: 3,
        max_days: 4,
        airports: 4,
        max_available: 4,
    };
    let mut mismatches = Vec::new();
    let multi = (0..).map(|k| (9_000_000 + k, tiny_instance(9_000_000 + k, shape)));
    for (seed, inst) in multi.filter(|(_, i)| i.days().len() >= 2).take(50) {
        let joint = solve_blp_exact(&build_blp(&inst), None).objective;
        let per_day: Option<i64> = inst
            .days()
            .iter()
            .map(|&d| solve_blp_exact(&build_blp(&inst.restrict_to_day(d)), None).objective)
            .sum();
        let by_hand: Option<i64> = inst.days().iter().map(|&d| oracle_blp(&inst.restrict_to_day(d))).sum();
        if joint != per_day || joint != by_hand {
            mismatches.push(seed);
        }
    }
    verdict(
        mismatches.is_empty(),
        format!("50 multi-day toys, mismatches {mismatches:?}"),
    )
}

#[test]
fn acceptance() {
    let mut conservation = Conservation::default();
    let mut results: Vec<(u32, Verdict, Duration)> = Vec::new();
    let mut timed = |n: u32, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        let t = start.elapsed();
        println!(
            "criterion {n}: {} ({}; {:.1}s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.as_secs_f64()
        );
        results.push((n, v, t));
    };
    timed(1, &mut criterion_1);
    timed(2, &mut || criterion_2(&mut conservation));
    timed(3, &mut criterion_3);
    timed(4, &mut criterion_4);
    timed(5, &mut criterion_5);
    timed(6, &mut || criterion_6(&mut conservation));
    timed(7, &mut || criterion_7(&conservation));
    timed(8, &mut criterion_8);
    timed(9, &mut criterion_9);
    let failed: Vec<u32> = results.iter().filter(|(_, v, _)| !v.pass).map(|(n, _, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
