//! Solves one generated day and writes its schedule as a Graphviz timeline.
//!
//! `cargo run --example timeline_dot -- [out.dot]`

use fleetopt::bench::export_timeline_dot;
use fleetopt::exact::solve_blp_exact;
use fleetopt::ingest::{generate_instance, GeneratorConfig};
use fleetopt::model_blp::build_blp;

fn main() -> fleetopt::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "timeline.dot".into());
    let instance = generate_instance(&GeneratorConfig::new(46, 1, 0))?;
    let report = solve_blp_exact(&build_blp(&instance), None);
    let assignment = report.assignment.expect("the sample fleet covers one day");
    export_timeline_dot(&instance, &assignment, out.as_ref())?;
    println!("{out}: render with `dot -Tsvg {out} > timeline.svg`");
    Ok(())
}
