//! Runs both backends over the first rungs of the ladder and writes the
//! report files.
//!
//! `cargo run --release --example bench_ladder -- [out_dir] [rungs]`

use std::path::PathBuf;

use fleetopt::bench::{ladder, render_csv, run_suite, write_report, BenchSettings};
use fleetopt::ModelKind;

fn main() -> fleetopt::Result<()> {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "bench-out".into()));
    let rungs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2);
    let configs: Vec<_> = ladder(ModelKind::Blp, false, 0).into_iter().take(rungs).collect();
    let settings = BenchSettings::default();
    let rows = run_suite(&configs, &settings)?;
    print!("{}", render_csv(&rows));
    for p in write_report(&rows, &configs, &settings, &out)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}
