//! Compiles a small day into its constrained model and penalty form, checks
//! the penalty form by enumeration and writes it in the text export format.
//!
//! `cargo run --example compile_qubo -- [flights] [seed]`

use fleetopt::cqm::{self, Penalty};
use fleetopt::ingest::{generate_instance, GeneratorConfig};
use fleetopt::model_blp::build_blp;

fn main() -> fleetopt::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut config = GeneratorConfig::new(
        args.first().copied().unwrap_or(3) as usize,
        1,
        args.get(1).copied().unwrap_or(0),
    );
    config.fleet_spec.truncate(2);
    for f in &mut config.fleet_spec {
        f.available = 2;
    }
    let model = build_blp(&generate_instance(&config)?);
    let source = cqm::from_blp(&model);
    let qubo = cqm::to_qubo(&source, Penalty::Auto)?;
    eprintln!(
        "{} variables, {} constraints -> {} bits, penalty weights {:?}",
        source.variables().len(),
        source.constraints().len(),
        qubo.num_bits(),
        qubo.penalty_weights
    );
    if qubo.num_bits() <= 20 {
        let n = qubo.num_bits();
        let best = (0u32..1 << n)
            .map(|m| (0..n).map(|b| m >> b & 1 == 1).collect::<Vec<_>>())
            .min_by_key(|bits| qubo.energy(bits))
            .expect("at least one pattern");
        let values = qubo.decode(&best);
        eprintln!(
            "ground state feasible={} objective={}",
            source.is_feasible(&values),
            source.objective(&values)
        );
    }
    qubo.write_to(std::io::stdout().lock())?;
    Ok(())
}
