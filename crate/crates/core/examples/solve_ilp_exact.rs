//! Solves one day of the balance model by branch and bound and prints the
//! aircraft left at each airport at the end of the day.
//!
//! `cargo run --release --example solve_ilp_exact -- [flights] [seed]`

use fleetopt::exact::solve_ilp_exact;
use fleetopt::ingest::{generate_instance, GeneratorConfig};
use fleetopt::model_ilp::{build_ilp, write_grounded_csv};

fn main() -> fleetopt::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let flights = args.first().copied().unwrap_or(46) as usize;
    let instance = generate_instance(&GeneratorConfig::new(flights, 1, args.get(1).copied().unwrap_or(0)))?;
    let model = build_ilp(&instance)?;
    println!(
        "variables={} constraints={}",
        model.variable_count, model.constraint_count
    );
    let report = solve_ilp_exact(&model, None);
    println!(
        "{} {:?} nodes={}",
        report.status,
        report.objective_real(),
        report.explored
    );
    if let Some(g) = report.assignment.as_ref().and_then(|a| a.grounded.as_ref()) {
        write_grounded_csv(
            std::io::stdout().lock(),
            model.network.airports(),
            &model.fleet_names,
            &g.end_of_day,
        )?;
    }
    Ok(())
}
