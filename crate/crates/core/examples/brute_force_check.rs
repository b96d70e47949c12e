//! Cross-checks both exact solvers against full enumeration on small
//! generated days.
//!
//! `cargo run --release --example brute_force_check -- [instances]`

use fleetopt::exact::{brute_force, solve_blp_exact, solve_ilp_exact};
use fleetopt::ingest::{generate_instance, GeneratorConfig};
use fleetopt::model_blp::build_blp;
use fleetopt::model_ilp::build_ilp;
use fleetopt::ModelKind;

fn main() -> fleetopt::Result<()> {
    let count: u64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let mut agree = 0;
    for seed in 0..count {
        let mut config = GeneratorConfig::new(7, 1, seed);
        config.fleet_spec.truncate(3);
        for f in &mut config.fleet_spec {
            f.available = 3;
        }
        let instance = generate_instance(&config)?;
        let blp = solve_blp_exact(&build_blp(&instance), None).objective;
        let ilp = solve_ilp_exact(&build_ilp(&instance)?, None).objective;
        let ok = blp == brute_force(&instance, ModelKind::Blp)?.objective
            && ilp == brute_force(&instance, ModelKind::Ilp)?.objective;
        agree += ok as u64;
        println!(
            "seed {seed}: blp {blp:?} ilp {ilp:?} {}",
            if ok { "ok" } else { "MISMATCH" }
        );
    }
    println!("{agree}/{count} agree");
    Ok(())
}
