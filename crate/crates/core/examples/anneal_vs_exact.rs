//! Compares the annealing backend with the exact optimum on generated
//! multi-day instances.
//!
//! `cargo run --release --example anneal_vs_exact -- [flights_per_day] [days] [seeds]`

use fleetopt::anneal::{solve_blp_anneal, AnnealConfig};
use fleetopt::exact::solve_blp_exact;
use fleetopt::ingest::{generate_instance, GeneratorConfig};
use fleetopt::model_blp::build_blp;

fn main() -> fleetopt::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let fpd = args.first().copied().unwrap_or(46);
    let days = args.get(1).copied().unwrap_or(7) as u32;
    let seeds = args.get(2).copied().unwrap_or(3) as u64;
    for seed in 0..seeds {
        let instance = generate_instance(&GeneratorConfig::new(fpd, days, seed))?;
        let model = build_blp(&instance);
        let exact = solve_blp_exact(&model, None);
        let annealed = solve_blp_anneal(&model, &AnnealConfig::with_seed(seed))?;
        let (Some(opt), Some(got)) = (exact.objective, annealed.objective) else {
            println!("seed {seed}: exact {} anneal {}", exact.status, annealed.status);
            continue;
        };
        println!(
            "seed {seed}: exact {:.2} ({:.1}s) anneal {:.2} ({:.1}s) gap {:.4}%",
            opt as f64 / 100.0,
            exact.wall_time.as_secs_f64(),
            got as f64 / 100.0,
            annealed.wall_time.as_secs_f64(),
            100.0 * (got - opt) as f64 / opt as f64
        );
    }
    Ok(())
}
