//! Generates a seeded synthetic week and writes it as an instance directory.
//!
//! `cargo run --example generate_instance -- <out_dir> [flights_per_day] [days] [seed]`

use std::path::PathBuf;

use fleetopt::ingest::{generate_instance, save_instance, GeneratorConfig};

fn main() -> fleetopt::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "instance".into()));
    let rest: Vec<u64> = args.filter_map(|a| a.parse().ok()).collect();
    let config = GeneratorConfig::new(
        rest.first().copied().unwrap_or(46) as usize,
        rest.get(1).copied().unwrap_or(7) as u32,
        rest.get(2).copied().unwrap_or(0),
    );
    let instance = generate_instance(&config)?;
    let saved = save_instance(&instance, &out)?;
    println!(
        "{} flights, {} fleets -> {}",
        instance.flights().len(),
        instance.fleet_count(),
        saved.schedule.display()
    );
    Ok(())
}
