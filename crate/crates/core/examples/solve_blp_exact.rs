//! Solves the multi-day binary model exactly and prints the first day's
//! assignment table.
//!
//! `cargo run --release --example solve_blp_exact -- [instance_dir]`

use fleetopt::exact::solve_blp_exact;
use fleetopt::ingest::{generate_instance, load_dir, write_assignment_csv, GeneratorConfig};
use fleetopt::model_blp::build_blp;
use fleetopt::{check_feasibility, FeasibilityScope};

fn main() -> fleetopt::Result<()> {
    let instance = match std::env::args().nth(1) {
        Some(dir) => load_dir(dir.as_ref())?,
        None => generate_instance(&GeneratorConfig::new(46, 7, 1))?,
    };
    let model = build_blp(&instance);
    println!(
        "variables={} constraints={}",
        model.variable_count, model.constraint_count
    );
    let report = solve_blp_exact(&model, None);
    println!(
        "{} {:?} in {:?}",
        report.status,
        report.objective_real(),
        report.wall_time
    );
    if let Some(a) = &report.assignment {
        assert!(check_feasibility(&instance, a, FeasibilityScope::Blp).is_empty());
        let first = instance.days()[0];
        let day = instance.restrict_to_day(first);
        let local = fleetopt::Assignment::new(
            instance
                .flights()
                .iter()
                .zip(&a.fleet_of)
                .filter(|(f, _)| f.day == first)
                .map(|(_, &j)| j)
                .collect(),
        );
        write_assignment_csv(std::io::stdout().lock(), &day, &local)?;
    }
    Ok(())
}
